//! TOML run configuration.
//!
//! ```toml
//! [room]
//! dimensions = [10.0, 8.0, 3.0]
//! rt60 = 0.3
//!
//! [arrays]
//! hoa_order = 4
//!
//! [sources]
//! n_sources = 4
//! distance = 2.5
//! counts = [4, 6, 8]
//! distances = [1.5, 2.5, 3.5]
//! trials = 10
//!
//! [solver]
//! methods = ["sma", "joint", "rr"]
//!
//! [metrics]
//! neighborhood_deg = 20.0
//! ```
//!
//! Every key except the section headers `[room]`, `[arrays]`, `[sources]`,
//! `[solver]` and `[metrics]` has a default; unknown keys are rejected.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::dictionary::BlockWeights;
use crate::error::{Error, Result};
use crate::irls::{IrlsConfig, LambdaRange};
use crate::metrics::PeakSelectConfig;
use crate::pipeline::{Method, PipelineConfig};
use crate::roomsim::{ArraySpec, ExperimentSpec, FrontEnd, RoomSpec, SceneSpec};
use crate::sigproc::{EncoderConfig, StftConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    room: Option<RoomSection>,
    arrays: Option<ArraysSection>,
    sources: Option<SourcesSection>,
    solver: Option<SolverSection>,
    metrics: Option<MetricsSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomSection {
    dimensions: Option<[f64; 3]>,
    rt60: Option<f64>,
    max_image_order: Option<usize>,
    speed_of_sound: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArraysSection {
    sma_center: Option<[f64; 3]>,
    sma_radius: Option<f64>,
    sma_mics: Option<usize>,
    lma_offset: Option<f64>,
    lma_spacing: Option<f64>,
    lma_mics: Option<usize>,
    hoa_order: Option<usize>,
    grid_level: Option<usize>,
    sample_rate: Option<f64>,
    frame_len: Option<usize>,
    hop: Option<usize>,
    max_gain_db: Option<f64>,
    fit_order: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourcesSection {
    n_sources: Option<usize>,
    distance: Option<f64>,
    snr_db: Option<f64>,
    seed: Option<u64>,
    duration_s: Option<f64>,
    on_grid: Option<bool>,
    min_separation_deg: Option<f64>,
    max_elevation_deg: Option<f64>,
    wall_margin: Option<f64>,
    band_hz: Option<[f64; 2]>,
    counts: Option<Vec<usize>>,
    distances: Option<Vec<f64>>,
    trials: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    methods: Option<Vec<String>>,
    p: Option<f64>,
    l1_warmup_iters: Option<usize>,
    max_iters: Option<usize>,
    epsilon_init: Option<f64>,
    epsilon_decay: Option<f64>,
    stall_tol: Option<f64>,
    convergence_tol: Option<f64>,
    lambda_override: Option<f64>,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    prune_tol: Option<f64>,
    band_hz: Option<[f64; 2]>,
    bin_stride: Option<usize>,
    hoa_weight: Option<f64>,
    lma_weight: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricsSection {
    neighborhood_deg: Option<f64>,
    energy_floor_db: Option<f64>,
    local_peak_ratio: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scene: SceneSpec,
    pub front: FrontEnd,
    pub pipeline: PipelineConfig,
    pub peaks: PeakSelectConfig,
    pub experiment: ExperimentSpec,
}

fn set<T>(target: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *target = v;
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let missing = |name: &str| Error::Config(format!("missing required section [{name}]"));
        let room_s = raw.room.ok_or_else(|| missing("room"))?;
        let arrays_s = raw.arrays.ok_or_else(|| missing("arrays"))?;
        let sources_s = raw.sources.ok_or_else(|| missing("sources"))?;
        let solver_s = raw.solver.ok_or_else(|| missing("solver"))?;
        let metrics_s = raw.metrics.ok_or_else(|| missing("metrics"))?;

        let mut room = RoomSpec::default();
        set(&mut room.dimensions, room_s.dimensions);
        set(&mut room.rt60, room_s.rt60);
        set(&mut room.max_image_order, room_s.max_image_order);
        set(&mut room.speed_of_sound, room_s.speed_of_sound);
        room.validate().map_err(|e| Error::Config(format!("[room]: {e}")))?;

        let mut arrays = ArraySpec::default();
        arrays.sma_center = arrays_s.sma_center.or(arrays.sma_center);
        set(&mut arrays.sma_radius, arrays_s.sma_radius);
        set(&mut arrays.sma_mics, arrays_s.sma_mics);
        set(&mut arrays.lma_offset, arrays_s.lma_offset);
        set(&mut arrays.lma_spacing, arrays_s.lma_spacing);
        set(&mut arrays.lma_mics, arrays_s.lma_mics);

        let mut front = FrontEnd {
            arrays,
            encoder: EncoderConfig {
                speed_of_sound: room.speed_of_sound,
                ..EncoderConfig::default()
            },
            ..FrontEnd::default()
        };
        set(&mut front.hoa_order, arrays_s.hoa_order);
        set(&mut front.grid_level, arrays_s.grid_level);
        set(&mut front.sample_rate, arrays_s.sample_rate);
        let mut stft = StftConfig::default();
        set(&mut stft.frame_len, arrays_s.frame_len);
        set(&mut stft.hop, arrays_s.hop);
        stft.validate().map_err(|e| Error::Config(format!("[arrays]: {e}")))?;
        front.stft = stft;
        set(&mut front.encoder.max_gain_db, arrays_s.max_gain_db);
        front.encoder.fit_order = arrays_s.fit_order;
        if front.hoa_order == 0 || front.hoa_order > 10 {
            return Err(Error::Config("[arrays]: hoa_order must lie in 1..=10".into()));
        }
        if front.grid_level > 6 {
            return Err(Error::Config("[arrays]: grid_level must be <= 6".into()));
        }

        let mut scene = SceneSpec {
            room,
            ..SceneSpec::default()
        };
        set(&mut scene.n_sources, sources_s.n_sources);
        set(&mut scene.source_distance, sources_s.distance);
        set(&mut scene.snr_db, sources_s.snr_db);
        set(&mut scene.seed, sources_s.seed);
        set(&mut scene.duration_s, sources_s.duration_s);
        set(&mut scene.on_grid, sources_s.on_grid);
        set(&mut scene.min_separation_deg, sources_s.min_separation_deg);
        set(&mut scene.max_elevation_deg, sources_s.max_elevation_deg);
        set(&mut scene.wall_margin, sources_s.wall_margin);
        if let Some([lo, hi]) = sources_s.band_hz {
            scene.source_band_hz = (lo, hi);
        }

        if let Some(names) = &solver_s.methods {
            scene.methods = parse_methods(&names.join(","))?;
        }
        scene.validate().map_err(|e| Error::Config(format!("[sources]: {e}")))?;

        let mut irls = IrlsConfig::default();
        set(&mut irls.p, solver_s.p);
        set(&mut irls.l1_warmup_iters, solver_s.l1_warmup_iters);
        set(&mut irls.max_iters, solver_s.max_iters);
        set(&mut irls.epsilon_init, solver_s.epsilon_init);
        set(&mut irls.epsilon_decay, solver_s.epsilon_decay);
        set(&mut irls.stall_tol, solver_s.stall_tol);
        set(&mut irls.convergence_tol, solver_s.convergence_tol);
        set(&mut irls.prune_tol, solver_s.prune_tol);
        irls.lambda_override = solver_s.lambda_override;
        irls.validate().map_err(|e| Error::Config(format!("[solver]: {e}")))?;
        let mut lambda = LambdaRange::default();
        set(&mut lambda.min, solver_s.lambda_min);
        set(&mut lambda.max, solver_s.lambda_max);
        if !(lambda.min > 0.0 && lambda.max >= lambda.min) {
            return Err(Error::Config("[solver]: need 0 < lambda_min <= lambda_max".into()));
        }
        let mut pipeline = PipelineConfig {
            irls,
            lambda,
            speed_of_sound: room.speed_of_sound,
            ..PipelineConfig::default()
        };
        if let Some([lo, hi]) = solver_s.band_hz {
            pipeline.band_hz = (lo, hi);
        }
        set(&mut pipeline.bin_stride, solver_s.bin_stride);
        if pipeline.bin_stride == 0 {
            return Err(Error::Config("[solver]: bin_stride must be >= 1".into()));
        }
        let mut w = BlockWeights::default();
        set(&mut w.hoa, solver_s.hoa_weight);
        set(&mut w.lma, solver_s.lma_weight);
        pipeline.block_weights = w;

        let mut peaks = PeakSelectConfig::default();
        set(&mut peaks.neighborhood_deg, metrics_s.neighborhood_deg);
        set(&mut peaks.energy_floor_db, metrics_s.energy_floor_db);
        set(&mut peaks.local_peak_ratio, metrics_s.local_peak_ratio);
        peaks.validate().map_err(|e| Error::Config(format!("[metrics]: {e}")))?;

        let experiment = ExperimentSpec {
            base: scene.clone(),
            source_counts: sources_s.counts.unwrap_or_else(|| vec![scene.n_sources]),
            distances: sources_s.distances.unwrap_or_else(|| vec![scene.source_distance]),
            trials: sources_s.trials.unwrap_or(1),
        };
        if experiment.trials == 0 || experiment.source_counts.is_empty() || experiment.distances.is_empty() {
            return Err(Error::Config("[sources]: counts, distances and trials must be non-empty".into()));
        }

        Ok(Self {
            scene,
            front,
            pipeline,
            peaks,
            experiment,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Replaces the seed everywhere it is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scene.seed = seed;
        self.experiment.base.seed = seed;
        self
    }

    pub fn with_methods(mut self, methods: Vec<Method>) -> Self {
        self.scene.methods = methods.clone();
        self.experiment.base.methods = methods;
        self
    }
}

/// Comma-separated method list, e.g. `sma,rr`. Duplicates are dropped.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for part in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty method list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[room]\n[arrays]\n[sources]\n[solver]\n[metrics]\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.scene.room, RoomSpec::default());
        assert_eq!(c.front, FrontEnd::default());
        assert_eq!(c.pipeline, PipelineConfig::default());
        assert_eq!(c.scene.methods, Method::ALL.to_vec());
    }

    #[test]
    fn missing_room_section_is_named() {
        let err = RunConfig::from_toml_str("[arrays]\n[sources]\n[solver]\n[metrics]\n").unwrap_err();
        assert!(err.to_string().contains("[room]"), "{err}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = RunConfig::from_toml_str("[room]\nrt60 = 0.3\nbogus = 1\n[arrays]\n[sources]\n[solver]\n[metrics]\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") || msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn methods_parse_and_dedup() {
        assert_eq!(
            parse_methods("rr, sma,rr").unwrap(),
            vec![Method::ResidueRefine, Method::SmaOnly]
        );
        assert!(parse_methods("music").is_err());
        assert!(parse_methods("").is_err());
    }
}
