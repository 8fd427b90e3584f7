//! One reverberant scene processed by all three methods, with the energy
//! maps written as PPM heatmaps.
//!
//! `cargo run --release --example single_trial -- [n_sources] [distance_m] [seed] [out_dir]`

use std::path::PathBuf;

use hybridsr::export::{energy_map_ppm, write_file};
use hybridsr::metrics::PeakSelectConfig;
use hybridsr::pipeline::PipelineConfig;
use hybridsr::roomsim::{run_trial, FrontEnd, SceneSpec, TrialSetup};

fn main() -> hybridsr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scene = SceneSpec {
        n_sources: args.first().and_then(|s| s.parse().ok()).unwrap_or(4),
        source_distance: args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2.5),
        seed: args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1),
        ..SceneSpec::default()
    };
    let out = PathBuf::from(args.get(3).map_or("trial_maps", String::as_str));
    let pipeline = PipelineConfig {
        bin_stride: 8,
        ..PipelineConfig::default()
    };
    let setup = TrialSetup::new(FrontEnd::default(), pipeline, PeakSelectConfig::default(), &scene.room)?;
    let r = run_trial(&scene, &setup)?;
    for (m, map) in &r.maps {
        write_file(&out.join(format!("{m}.ppm")), &energy_map_ppm(map, &setup.grid)?)?;
    }
    write_file(&out.join("truth.ppm"), &energy_map_ppm(&r.ground_truth, &setup.grid)?)?;
    for s in &r.scores {
        let ang = s
            .median_angular_error()
            .map_or("n/a".to_string(), |a| format!("{:.2} deg", a.to_degrees()));
        println!(
            "{:<5} mismatch {:.4}  median angular error {ang}  miss rate {:.2}",
            s.method.name(),
            s.mismatch,
            s.miss_rate()
        );
    }
    println!("maps in {}", out.display());
    Ok(())
}
