//! Wall-clock cost of each processing stage for one reverberant scene.
//!
//! `cargo run --release --example stage_timing -- [n_sources] [distance_m] [seed] [rt60] [grid]`

use std::time::Instant;

use hybridsr::irls::row_energies;
use hybridsr::metrics::{angular_errors, energy_map_mismatch};
use hybridsr::pipeline::{energy_map, refine_with_residue, sr_joint_onestep, sr_sma, PipelineConfig};
use hybridsr::roomsim::{ground_truth_map, simulate_scene, FrontEnd, SceneSpec, TrialSetup};
use hybridsr::metrics::PeakSelectConfig;

fn main() -> hybridsr::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(4);
    let dist: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2.5);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let rt60: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let on_grid = args.get(4).is_some_and(|s| s == "grid");
    let mut scene = SceneSpec {
        n_sources: n,
        source_distance: dist,
        seed,
        on_grid,
        ..SceneSpec::default()
    };
    scene.room.rt60 = rt60;
    let pipeline = PipelineConfig {
        bin_stride: 4,
        ..PipelineConfig::default()
    };

    let t = Instant::now();
    let setup = TrialSetup::new(FrontEnd::default(), pipeline, PeakSelectConfig::default(), &scene.room)?;
    println!("setup          {:>7.2} s ({} bins)", t.elapsed().as_secs_f64(), setup.bins.len());

    let t = Instant::now();
    let data = simulate_scene(&scene, &setup.front, Some(&setup.grid))?;
    println!("simulate       {:>7.2} s ({} frames)", t.elapsed().as_secs_f64(), data.sma.frames());

    let t = Instant::now();
    let b_hoa = setup.encode(&data, &scene.room)?;
    println!("encode         {:>7.2} s", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let x_hoa = sr_sma(&b_hoa, &setup.d_hoa, &setup.bins, &setup.pipeline)?;
    println!("stage 1 (sma)  {:>7.2} s", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let joint = sr_joint_onestep(&b_hoa, &data.lma, &setup.d_hoa, &setup.d_lma, &setup.pipeline)?;
    println!("joint          {:>7.2} s", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let rr = refine_with_residue(x_hoa.clone(), &data.lma, &setup.d_lma, &setup.pipeline)?;
    println!("stages 2-4     {:>7.2} s", t.elapsed().as_secs_f64());

    let truth = ground_truth_map(&data.truths, &setup.grid);
    println!(
        "residue energy ratio {:.3}",
        (rr.b_res.norm_sqr() / data.lma.norm_sqr()).sqrt()
    );
    println!(
        "x_res / x_hoa energy {:.3}",
        rr.x_res.norm_sqr() / rr.x_hoa.norm_sqr()
    );
    for (name, x) in [("sma", &x_hoa), ("joint", &joint), ("rr", &rr.fused), ("res", &rr.x_res)] {
        let map = energy_map(x);
        let e = energy_map_mismatch(&map, &truth, &setup.kernel)?;
        let ang: Vec<String> = angular_errors(&map, &setup.grid, &data.truths, &setup.peaks)
            .iter()
            .map(|r| r.error_rad.map_or("miss".into(), |a| format!("{:.1}", a.to_degrees())))
            .collect();
        println!("{name:<6} mismatch {e:.4}  errors [{}]", ang.join(", "));
    }
    let top: f64 = row_energies(&x_hoa.data[0]).iter().cloned().fold(0.0, f64::max);
    println!("stage-1 max row energy, first bin: {top:.3e}");
    Ok(())
}
