//! A small seeded experiment grid summarized per method, source count and
//! distance.
//!
//! `cargo run --release --example experiment_grid -- [trials]`

use hybridsr::export::summary_csv;
use hybridsr::metrics::{summarize, PeakSelectConfig, ScoredTrial};
use hybridsr::pipeline::PipelineConfig;
use hybridsr::roomsim::{run_experiment, ExperimentSpec, FrontEnd, SceneSpec, TrialSetup};

fn main() -> hybridsr::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let spec = ExperimentSpec {
        base: SceneSpec {
            seed: 5,
            duration_s: 0.5,
            ..SceneSpec::default()
        },
        source_counts: vec![2, 4],
        distances: vec![1.5, 3.5],
        trials,
    };
    let pipeline = PipelineConfig {
        bin_stride: 16,
        ..PipelineConfig::default()
    };
    let setup = TrialSetup::new(FrontEnd::default(), pipeline, PeakSelectConfig::default(), &spec.base.room)?;
    let rows = run_experiment(&spec, &setup)?;
    let entries: Vec<ScoredTrial<'_>> = rows
        .iter()
        .flat_map(|r| r.scores.iter().map(move |s| (r.n_sources, r.distance_m, s)))
        .collect();
    print!("{}", summary_csv(&summarize(entries)));
    Ok(())
}
