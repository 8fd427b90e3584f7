//! Energy-map mismatch and angular error.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{angular_distance, DirectionGrid, Vec3};
use crate::pipeline::{EnergyMap, Method};

/// Kernel support radius, `pi / 12`.
pub const KERNEL_RADIUS: f64 = PI / 12.0;

/// Triangular kernel falling linearly from 1 to 0 over `pi / 12`.
pub fn spatial_kernel(w1: &Vec3, w2: &Vec3) -> f64 {
    kernel_of_angle(angular_distance(w1, w2))
}

fn kernel_of_angle(a: f64) -> f64 {
    (1.0 - a / KERNEL_RADIUS).max(0.0)
}

/// Nonzero kernel entries between all pairs of grid directions.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pairs: Vec<Vec<(usize, f64)>>,
}

impl KernelTable {
    pub fn new(grid: &DirectionGrid) -> Self {
        let dirs = grid.directions();
        let pairs = dirs
            .iter()
            .map(|a| {
                dirs.iter()
                    .enumerate()
                    .filter_map(|(j, b)| {
                        let k = spatial_kernel(a, b);
                        (k > 0.0).then_some((j, k))
                    })
                    .collect()
            })
            .collect();
        Self { pairs }
    }

    fn cross(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for (q, row) in self.pairs.iter().enumerate() {
            if a[q] == 0.0 {
                continue;
            }
            let sa = a[q].sqrt();
            for &(p, k) in row {
                if b[p] != 0.0 {
                    s += sa * b[p].sqrt() * k;
                }
            }
        }
        s
    }
}

fn normalized(map: &EnergyMap) -> Vec<f64> {
    let total = map.total();
    if total > 0.0 {
        map.energy.iter().map(|e| e / total).collect()
    } else {
        map.energy.clone()
    }
}

/// Kernel mismatch `(K11 + K22 - 2 K12) / (K11 + K22)` in `[0, 1]`.
///
/// Each map is scaled to unit total energy first, so the value depends only
/// on the spatial distribution of energy.
pub fn energy_map_mismatch(map1: &EnergyMap, map2: &EnergyMap, table: &KernelTable) -> Result<f64> {
    if map1.grid != map2.grid || map1.len() != map2.len() || map1.len() != table.pairs.len() {
        return Err(Error::GridMismatch);
    }
    let a = normalized(map1);
    let b = normalized(map2);
    let k11 = table.cross(&a, &a);
    let k22 = table.cross(&b, &b);
    if k11 + k22 == 0.0 {
        return Err(Error::EmptyMaps);
    }
    let k12 = 0.5 * (table.cross(&a, &b) + table.cross(&b, &a));
    Ok(((k11 + k22 - 2.0 * k12) / (k11 + k22)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSelectConfig {
    pub neighborhood_deg: f64,
    /// Candidates must be within this many dB (energy) of the global maximum.
    pub energy_floor_db: f64,
    /// Candidates must reach this fraction of the neighborhood maximum.
    pub local_peak_ratio: f64,
}

impl Default for PeakSelectConfig {
    fn default() -> Self {
        Self {
            neighborhood_deg: 20.0,
            energy_floor_db: -20.0,
            local_peak_ratio: 0.8,
        }
    }
}

impl PeakSelectConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.neighborhood_deg > 0.0) {
            return Err(Error::Argument("neighborhood_deg must be > 0".into()));
        }
        if !(self.local_peak_ratio > 0.0 && self.local_peak_ratio <= 1.0) {
            return Err(Error::Argument("local_peak_ratio must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularRecord {
    pub truth: Vec3,
    /// Selected grid index, `None` for a miss.
    pub estimate: Option<usize>,
    pub error_rad: Option<f64>,
}

/// Per-truth angular error under the neighborhood / floor / local-peak rule.
pub fn angular_errors(
    map: &EnergyMap,
    grid: &DirectionGrid,
    truths: &[Vec3],
    cfg: &PeakSelectConfig,
) -> Vec<AngularRecord> {
    let radius = cfg.neighborhood_deg.to_radians();
    let floor = map.max() * 10f64.powf(cfg.energy_floor_db / 10.0);
    truths
        .iter()
        .map(|truth| {
            let hood: Vec<(usize, f64)> = grid
                .directions()
                .iter()
                .enumerate()
                .map(|(i, d)| (i, angular_distance(truth, d)))
                .filter(|&(_, a)| a <= radius)
                .collect();
            let local_max = hood.iter().map(|&(i, _)| map.energy[i]).fold(0.0, f64::max);
            let best = hood
                .iter()
                .filter(|&&(i, _)| {
                    let e = map.energy[i];
                    e > 0.0 && e >= floor && e >= cfg.local_peak_ratio * local_max
                })
                .min_by(|&&(i, ai), &&(j, aj)| {
                    map.energy[j]
                        .total_cmp(&map.energy[i])
                        .then(ai.total_cmp(&aj))
                        .then(i.cmp(&j))
                })
                .copied();
            AngularRecord {
                truth: *truth,
                estimate: best.map(|(i, _)| i),
                error_rad: best.map(|(_, a)| a),
            }
        })
        .collect()
}

/// Lower order statistic at fraction `q` of a sample: `sorted[floor(q (n-1))]`.
pub fn order_statistic(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = (q.clamp(0.0, 1.0) * (v.len() - 1) as f64).floor() as usize;
    Some(v[idx])
}

/// Lower median.
pub fn median(values: &[f64]) -> Option<f64> {
    order_statistic(values, 0.5)
}

/// Metrics of one method in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodScore {
    pub method: Method,
    pub mismatch: f64,
    pub angular: Vec<AngularRecord>,
}

impl MethodScore {
    /// Median angular error over resolved sources; misses excluded.
    pub fn median_angular_error(&self) -> Option<f64> {
        let errs: Vec<f64> = self.angular.iter().filter_map(|r| r.error_rad).collect();
        median(&errs)
    }

    pub fn miss_rate(&self) -> f64 {
        if self.angular.is_empty() {
            return 0.0;
        }
        self.angular.iter().filter(|r| r.estimate.is_none()).count() as f64 / self.angular.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub method: Method,
    pub n_sources: usize,
    /// Source distance in millimeters.
    pub distance_mm: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub key: CellKey,
    pub trials: usize,
    pub mismatch_q1: f64,
    pub mismatch_median: f64,
    pub mismatch_q3: f64,
    /// Median over trials of each trial's median angular error (radians).
    pub angular_median: Option<f64>,
    pub miss_rate: f64,
}

/// One scored entry: `(n_sources, distance_m, score)`.
pub type ScoredTrial<'a> = (usize, f64, &'a MethodScore);

/// Order statistics per method, source count and distance.
pub fn summarize<'a>(entries: impl IntoIterator<Item = ScoredTrial<'a>>) -> Vec<CellSummary> {
    let mut cells: BTreeMap<CellKey, Vec<&MethodScore>> = BTreeMap::new();
    for (n, dist, score) in entries {
        let key = CellKey {
            method: score.method,
            n_sources: n,
            distance_mm: (dist * 1000.0).round() as i64,
        };
        cells.entry(key).or_default().push(score);
    }
    cells
        .into_iter()
        .map(|(key, scores)| {
            let mm: Vec<f64> = scores.iter().map(|s| s.mismatch).collect();
            let ang: Vec<f64> = scores.iter().filter_map(|s| s.median_angular_error()).collect();
            let miss = scores.iter().map(|s| s.miss_rate()).sum::<f64>() / scores.len() as f64;
            CellSummary {
                key,
                trials: scores.len(),
                mismatch_q1: order_statistic(&mm, 0.25).unwrap_or(f64::NAN),
                mismatch_median: median(&mm).unwrap_or(f64::NAN),
                mismatch_q3: order_statistic(&mm, 0.75).unwrap_or(f64::NAN),
                angular_median: median(&ang),
                miss_rate: miss,
            }
        })
        .collect()
}
