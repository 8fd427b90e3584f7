//! Shoebox image-source room simulation, scene assembly and trial
//! orchestration.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::dictionary::{hoa_dictionary, Dictionary};
use crate::error::{Error, Result};
use crate::geometry::{
    angular_distance, from_azimuth_elevation, icosphere, linear_array, nearest_grid_index, spherical_array,
    ArrayGeometry, DirectionGrid, Vec3,
};
use crate::metrics::{angular_errors, energy_map_mismatch, KernelTable, MethodScore, PeakSelectConfig};
use crate::pipeline::{reconstruct, EnergyMap, LmaDictionaries, Method, PipelineConfig, ReconstructionSetup};
use crate::sigproc::{add_noise, hoa_encode, stft, EncoderConfig, StftConfig, TfTensor};
use crate::specfun::SphereKind;

/// Amplitude factor below which images are dropped (-60 dB).
const IMAGE_AMPLITUDE_FLOOR: f64 = 1e-3;
/// Half-width in samples of the windowed-sinc fractional delay.
const SINC_HALF_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomSpec {
    pub dimensions: [f64; 3],
    pub rt60: f64,
    pub max_image_order: usize,
    pub speed_of_sound: f64,
}

impl Default for RoomSpec {
    fn default() -> Self {
        Self {
            dimensions: [10.0, 8.0, 3.0],
            rt60: 0.3,
            max_image_order: 20,
            speed_of_sound: crate::SPEED_OF_SOUND,
        }
    }
}

impl RoomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimensions.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Argument("room dimensions must be positive".into()));
        }
        if !(self.rt60 >= 0.0) {
            return Err(Error::Argument("rt60 must be >= 0".into()));
        }
        if !(self.speed_of_sound > 0.0) {
            return Err(Error::Argument("speed of sound must be > 0".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(self.dimensions[0], self.dimensions[1], self.dimensions[2]) * 0.5
    }

    pub fn volume(&self) -> f64 {
        self.dimensions.iter().product()
    }

    pub fn surface(&self) -> f64 {
        let [x, y, z] = self.dimensions;
        2.0 * (x * y + x * z + y * z)
    }

    /// True when `p` is at least `margin` away from every wall.
    pub fn contains(&self, p: &Vec3, margin: f64) -> bool {
        (0..3).all(|i| p[i] > margin && p[i] < self.dimensions[i] - margin)
    }

    fn check_inside(&self, p: &Vec3) -> Result<()> {
        if self.contains(p, 0.0) {
            Ok(())
        } else {
            Err(Error::OutsideRoom { x: p.x, y: p.y, z: p.z })
        }
    }
}

/// Uniform wall absorption from Sabine's formula; `rt60 = 0` means anechoic.
pub fn sabine_absorption(room: &RoomSpec) -> f64 {
    if room.rt60 <= 0.0 {
        return 1.0;
    }
    (0.161 * room.volume() / (room.surface() * room.rt60)).min(1.0)
}

fn add_fractional_tap(h: &mut [f64], delay: f64, amplitude: f64) {
    let w = SINC_HALF_WIDTH as f64;
    let lo = (delay - w).ceil().max(0.0) as usize;
    let hi = ((delay + w).floor() as usize).min(h.len().saturating_sub(1));
    if lo > hi {
        return;
    }
    // sin(pi (n - delay)) alternates in sign with n, and the window phase
    // advances by a fixed step, so both are updated incrementally
    let x0 = lo as f64 - delay;
    let mut s = (PI * x0).sin();
    let step = PI / (w + 1.0);
    let rot = Complex64::from_polar(1.0, step);
    let mut ph = Complex64::from_polar(1.0, x0 * step);
    for (k, v) in h[lo..=hi].iter_mut().enumerate() {
        let x = x0 + k as f64;
        let sinc = if x.abs() < 1e-12 { 1.0 } else { s / (PI * x) };
        *v += amplitude * sinc * 0.5 * (1.0 + ph.re);
        s = -s;
        ph *= rot;
    }
}

/// One image source: distance and reflection-amplitude factor.
fn images(room: &RoomSpec, src: &Vec3, mic: &Vec3, alpha: f64) -> Vec<(f64, f64)> {
    let refl = 1.0 - alpha;
    let order = if refl == 0.0 { 0 } else { room.max_image_order as i64 };
    // per axis: (offset, reflection count)
    let axis: Vec<Vec<(f64, u32)>> = (0..3)
        .map(|i| {
            let l = room.dimensions[i];
            let mut v = Vec::new();
            for n in -order..=order {
                for q in 0..2i64 {
                    let off = (1 - 2 * q) as f64 * src[i] + 2.0 * n as f64 * l - mic[i];
                    let r = ((n - q).abs() + n.abs()) as u32;
                    v.push((off, r));
                }
            }
            v
        })
        .collect();
    let max_r = if refl == 0.0 {
        0
    } else {
        (2.0 * IMAGE_AMPLITUDE_FLOOR.ln() / refl.ln()).floor() as u32
    };
    let mut out = Vec::new();
    for &(dx, rx) in &axis[0] {
        if rx > max_r {
            continue;
        }
        for &(dy, ry) in &axis[1] {
            if rx + ry > max_r {
                continue;
            }
            for &(dz, rz) in &axis[2] {
                let r = rx + ry + rz;
                if r > max_r {
                    continue;
                }
                let d = (dx * dx + dy * dy + dz * dz).sqrt();
                let gain = if r == 0 { 1.0 } else { refl.powf(r as f64 / 2.0) };
                out.push((d, gain));
            }
        }
    }
    out
}

/// Shoebox image-source impulse response from `src` to `mic`.
///
/// Each image contributes `(1 - alpha)^(r/2) / (4 pi d)` at delay `d / c`,
/// with `r` the number of wall reflections. Images whose reflection factor
/// falls below -60 dB are dropped.
pub fn image_source_rir(room: &RoomSpec, src: &Vec3, mic: &Vec3, alpha: f64, sample_rate: f64) -> Result<Vec<f64>> {
    room.validate()?;
    room.check_inside(src)?;
    room.check_inside(mic)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Argument(format!("absorption {alpha} outside (0, 1]")));
    }
    let imgs = images(room, src, mic, alpha);
    let max_d = imgs.iter().map(|&(d, _)| d).fold(0.0, f64::max);
    let len = (max_d / room.speed_of_sound * sample_rate).ceil() as usize + SINC_HALF_WIDTH + 1;
    let mut h = vec![0.0; len];
    for (d, g) in imgs {
        let amp = g / (4.0 * PI * d.max(1e-6));
        add_fractional_tap(&mut h, d / room.speed_of_sound * sample_rate, amp);
    }
    Ok(h)
}

/// Backward-integrated energy decay curve in dB, normalized to 0 dB at t = 0.
pub fn schroeder_decay_db(rir: &[f64]) -> Vec<f64> {
    let mut edc = vec![0.0; rir.len()];
    let mut acc = 0.0;
    for i in (0..rir.len()).rev() {
        acc += rir[i] * rir[i];
        edc[i] = acc;
    }
    let total = edc.first().copied().unwrap_or(0.0);
    edc.iter()
        .map(|e| if total > 0.0 && *e > 0.0 { 10.0 * (e / total).log10() } else { f64::NEG_INFINITY })
        .collect()
}

/// First time (seconds) at which the decay curve reaches `level_db` (negative).
pub fn decay_time(rir: &[f64], sample_rate: f64, level_db: f64) -> Option<f64> {
    schroeder_decay_db(rir)
        .iter()
        .position(|&v| v <= level_db)
        .map(|i| i as f64 / sample_rate)
}

/// Layout of the SMA and the four line arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySpec {
    /// SMA center; `None` places it at the room center.
    pub sma_center: Option<[f64; 3]>,
    pub sma_radius: f64,
    pub sma_mics: usize,
    pub lma_offset: f64,
    pub lma_spacing: f64,
    pub lma_mics: usize,
}

impl Default for ArraySpec {
    fn default() -> Self {
        Self {
            sma_center: None,
            sma_radius: 0.10,
            sma_mics: 64,
            lma_offset: 0.5,
            lma_spacing: 0.04,
            lma_mics: 8,
        }
    }
}

impl ArraySpec {
    pub fn sma_center(&self, room: &RoomSpec) -> Vec3 {
        self.sma_center.map_or_else(|| room.center(), |c| Vec3::new(c[0], c[1], c[2]))
    }

    pub fn sma(&self, room: &RoomSpec) -> ArrayGeometry {
        spherical_array(self.sma_center(room), self.sma_radius, self.sma_mics, "sma")
    }

    /// Lines along +x, -x, +y, -y of the SMA center, each oriented along its
    /// offset axis.
    pub fn lmas(&self, room: &RoomSpec) -> Vec<ArrayGeometry> {
        let c = self.sma_center(room);
        let (x, y) = (Vec3::x(), Vec3::y());
        let o = self.lma_offset;
        let (s, n) = (self.lma_spacing, self.lma_mics);
        vec![
            linear_array(c + o * x, x, s, n, "lma+x"),
            linear_array(c - o * x, x, s, n, "lma-x"),
            linear_array(c + o * y, y, s, n, "lma+y"),
            linear_array(c - o * y, y, s, n, "lma-y"),
        ]
    }
}

/// Front-end settings shared by every trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontEnd {
    pub sample_rate: f64,
    pub stft: StftConfig,
    pub hoa_order: usize,
    pub grid_level: usize,
    pub encoder: EncoderConfig,
    pub arrays: ArraySpec,
}

impl Default for FrontEnd {
    fn default() -> Self {
        Self {
            sample_rate: 16000.0,
            stft: StftConfig::default(),
            hoa_order: 4,
            grid_level: 3,
            encoder: EncoderConfig::default(),
            arrays: ArraySpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub room: RoomSpec,
    pub n_sources: usize,
    /// Source distance from the SMA center in meters.
    pub source_distance: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub duration_s: f64,
    pub methods: Vec<Method>,
    /// Snap drawn directions to the nearest grid direction.
    pub on_grid: bool,
    pub min_separation_deg: f64,
    pub max_elevation_deg: f64,
    /// Minimum clearance between a source and any wall.
    pub wall_margin: f64,
    /// Pass band of the synthetic source signals.
    pub source_band_hz: (f64, f64),
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            room: RoomSpec::default(),
            n_sources: 4,
            source_distance: 2.5,
            snr_db: 30.0,
            seed: 1,
            duration_s: 1.0,
            methods: Method::ALL.to_vec(),
            on_grid: false,
            min_separation_deg: 15.0,
            max_elevation_deg: 60.0,
            wall_margin: 0.2,
            source_band_hz: (300.0, 4000.0),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        if !(1..=20).contains(&self.n_sources) {
            return Err(Error::Argument(format!("n_sources {} outside [1, 20]", self.n_sources)));
        }
        if !(self.source_distance > 0.0) || !(self.duration_s > 0.0) {
            return Err(Error::Argument("source distance and duration must be > 0".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Argument("no methods requested".into()));
        }
        Ok(())
    }
}

/// SplitMix64 step, used to derive independent stream seeds.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TAG_DIRECTIONS: u64 = 1;
const TAG_SIGNALS: u64 = 2;
const TAG_NOISE_SMA: u64 = 3;
const TAG_NOISE_LMA: u64 = 4;

/// Draws source directions with bounded elevation, minimum pairwise
/// separation and sources kept inside the room.
pub fn draw_directions(scene: &SceneSpec, origin: &Vec3, grid: Option<&DirectionGrid>) -> Result<Vec<Vec3>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scene.seed, TAG_DIRECTIONS));
    let max_el = scene.max_elevation_deg.to_radians();
    let min_sep = scene.min_separation_deg.to_radians();
    let mut out: Vec<Vec3> = Vec::with_capacity(scene.n_sources);
    let mut attempts = 0usize;
    while out.len() < scene.n_sources {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Argument(format!(
                "could not place {} sources at {} m inside the room",
                scene.n_sources, scene.source_distance
            )));
        }
        let az = rng.random_range(-PI..PI);
        let sin_el = rng.random_range(-max_el.sin()..=max_el.sin());
        let mut u = from_azimuth_elevation(az, sin_el.asin());
        if let Some(g) = grid {
            u = g.direction(nearest_grid_index(g, &u));
        }
        let pos = origin + scene.source_distance * u;
        if !scene.room.contains(&pos, scene.wall_margin) {
            continue;
        }
        if out.iter().any(|v| angular_distance(v, &u) < min_sep) {
            continue;
        }
        out.push(u);
    }
    Ok(out)
}

/// Seeded white noise restricted to `band` by zeroing FFT bins, scaled to
/// unit RMS.
pub fn bandlimited_noise(len: usize, sample_rate: f64, band: (f64, f64), seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft(len, FftDirection::Forward).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k.min(len - k) as f64 * sample_rate / len as f64;
        if f < band.0 || f > band.1 {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft(len, FftDirection::Inverse).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|v| v.re).collect();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
    if rms > 0.0 {
        x.iter().map(|v| v / rms).collect()
    } else {
        x
    }
}

/// Simulated observations of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneData {
    /// SMA pressures, one channel per SMA microphone.
    pub sma: TfTensor,
    /// Stacked line-array pressures in declaration order.
    pub lma: TfTensor,
    /// Unit DOAs seen from the SMA center.
    pub truths: Vec<Vec3>,
}

/// Convolves `sources` with the image-source responses to each microphone and
/// truncates to the source length.
pub fn render_microphones(
    room: &RoomSpec,
    sources: &[(Vec3, Vec<f64>)],
    mics: &[Vec3],
    sample_rate: f64,
) -> Result<Vec<Vec<f64>>> {
    let len = sources.first().map_or(0, |s| s.1.len());
    let alpha = sabine_absorption(room);
    let rirs: Vec<Vec<Vec<f64>>> = mics
        .par_iter()
        .map(|m| {
            sources
                .iter()
                .map(|(p, _)| image_source_rir(room, p, m, alpha, sample_rate))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let max_rir = rirs.iter().flatten().map(Vec::len).max().unwrap_or(1);
    let nfft = (len + max_rir).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft(nfft, FftDirection::Forward);
    let inv = planner.plan_fft(nfft, FftDirection::Inverse);
    let spectra: Vec<Vec<Complex64>> = sources
        .iter()
        .map(|(_, s)| {
            let mut b: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            b.resize(nfft, Complex64::new(0.0, 0.0));
            fwd.process(&mut b);
            b
        })
        .collect();
    let out = rirs
        .par_iter()
        .map(|per_src| {
            let mut acc = vec![Complex64::new(0.0, 0.0); nfft];
            let mut h = vec![Complex64::new(0.0, 0.0); nfft];
            for (rir, s) in per_src.iter().zip(&spectra) {
                h.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for (d, &v) in h.iter_mut().zip(rir) {
                    *d = Complex64::new(v, 0.0);
                }
                fwd.process(&mut h);
                for ((a, hv), sv) in acc.iter_mut().zip(&h).zip(s) {
                    *a += hv * sv;
                }
            }
            inv.process(&mut acc);
            acc.iter().take(len).map(|v| v.re / nfft as f64).collect()
        })
        .collect();
    Ok(out)
}

/// Simulates the SMA and line-array STFT observations of a scene.
pub fn simulate_scene(scene: &SceneSpec, front: &FrontEnd, grid: Option<&DirectionGrid>) -> Result<SceneData> {
    scene.validate()?;
    let origin = front.arrays.sma_center(&scene.room);
    let sma = front.arrays.sma(&scene.room);
    let lmas = front.arrays.lmas(&scene.room);
    let snap = if scene.on_grid { grid } else { None };
    let truths = draw_directions(scene, &origin, snap)?;
    let len = (scene.duration_s * front.sample_rate).round() as usize;
    if len < front.stft.frame_len {
        return Err(Error::TooShort {
            got: len,
            need: front.stft.frame_len,
        });
    }
    let sig_seed = derive_seed(scene.seed, TAG_SIGNALS);
    let sources: Vec<(Vec3, Vec<f64>)> = truths
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let pos = origin + scene.source_distance * u;
            let s = bandlimited_noise(len, front.sample_rate, scene.source_band_hz, derive_seed(sig_seed, i as u64));
            (pos, s)
        })
        .collect();
    for (p, _) in &sources {
        scene.room.check_inside(p)?;
    }
    let mut mics: Vec<Vec3> = sma.positions.clone();
    let n_sma = mics.len();
    for l in &lmas {
        mics.extend_from_slice(&l.positions);
    }
    let mut signals = render_microphones(&scene.room, &sources, &mics, front.sample_rate)?;
    let lma_sig = signals.split_off(n_sma);
    let sma_tf = stft(&signals, &front.stft, front.sample_rate)?;
    let lma_tf = stft(&lma_sig, &front.stft, front.sample_rate)?;
    Ok(SceneData {
        sma: add_noise(&sma_tf, scene.snr_db, derive_seed(scene.seed, TAG_NOISE_SMA)),
        lma: add_noise(&lma_tf, scene.snr_db, derive_seed(scene.seed, TAG_NOISE_LMA)),
        truths,
    })
}

/// Unit mass at the nearest grid direction of each truth.
pub fn ground_truth_map(truths: &[Vec3], grid: &DirectionGrid) -> EnergyMap {
    let mut energy = vec![0.0; grid.len()];
    for t in truths {
        energy[nearest_grid_index(grid, t)] += 1.0;
    }
    EnergyMap { grid: grid.id(), energy }
}

/// Everything that can be shared across trials of one front end.
pub struct TrialSetup {
    pub front: FrontEnd,
    pub pipeline: PipelineConfig,
    pub peaks: PeakSelectConfig,
    pub grid: DirectionGrid,
    pub d_hoa: Dictionary,
    pub d_lma: LmaDictionaries,
    pub kernel: KernelTable,
    pub bins: Vec<usize>,
}

impl TrialSetup {
    pub fn new(front: FrontEnd, pipeline: PipelineConfig, peaks: PeakSelectConfig, room: &RoomSpec) -> Result<Self> {
        front.stft.validate()?;
        pipeline.irls.validate()?;
        peaks.validate()?;
        let grid = icosphere(front.grid_level);
        let d_hoa = hoa_dictionary(&grid, front.hoa_order);
        let frames = front.stft.frame_count(front.stft.frame_len);
        let layout = TfTensor::zeros(1, frames, front.sample_rate, front.stft.frame_len, front.stft.hop);
        let bins = pipeline.processed_bins(&layout);
        let origin = front.arrays.sma_center(room);
        let d_lma = LmaDictionaries::build(
            &front.arrays.lmas(room),
            &origin,
            &grid,
            &layout,
            &bins,
            pipeline.speed_of_sound,
        );
        let kernel = KernelTable::new(&grid);
        Ok(Self {
            front,
            pipeline,
            peaks,
            grid,
            d_hoa,
            d_lma,
            kernel,
            bins,
        })
    }

    /// Encodes simulated SMA pressures to the HOA domain.
    pub fn encode(&self, data: &SceneData, room: &RoomSpec) -> Result<TfTensor> {
        let sma = self.front.arrays.sma(room);
        hoa_encode(&data.sma, &sma, self.front.hoa_order, SphereKind::Open, &self.front.encoder)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub scene: SceneSpec,
    pub truths: Vec<Vec3>,
    pub ground_truth: EnergyMap,
    pub maps: Vec<(Method, EnergyMap)>,
    pub scores: Vec<MethodScore>,
}

/// Simulates one scene, runs every requested method and scores it.
pub fn run_trial(scene: &SceneSpec, setup: &TrialSetup) -> Result<TrialResult> {
    let grid_opt = scene.on_grid.then_some(&setup.grid);
    let data = simulate_scene(scene, &setup.front, grid_opt)?;
    let b_hoa = setup.encode(&data, &scene.room)?;
    let rs = ReconstructionSetup {
        grid: &setup.grid,
        d_hoa: &setup.d_hoa,
        d_lma: &setup.d_lma,
        cfg: &setup.pipeline,
    };
    let maps = reconstruct(&scene.methods, &b_hoa, &data.lma, &rs)?;
    let ground_truth = ground_truth_map(&data.truths, &setup.grid);
    let scores = maps
        .iter()
        .map(|(m, map)| {
            let mismatch = if map.total() > 0.0 {
                energy_map_mismatch(map, &ground_truth, &setup.kernel)?
            } else {
                1.0
            };
            Ok(MethodScore {
                method: *m,
                mismatch,
                angular: angular_errors(map, &setup.grid, &data.truths, &setup.peaks),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialResult {
        scene: scene.clone(),
        truths: data.truths,
        ground_truth,
        maps,
        scores,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub base: SceneSpec,
    pub source_counts: Vec<usize>,
    pub distances: Vec<f64>,
    pub trials: usize,
}

/// One trial of an experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub trial_id: usize,
    pub n_sources: usize,
    pub distance_m: f64,
    pub seed: u64,
    pub scores: Vec<MethodScore>,
}

impl ExperimentSpec {
    /// Scenes in a fixed order: source count, then distance, then trial.
    pub fn scenes(&self) -> Vec<SceneSpec> {
        let mut out = Vec::new();
        for &n in &self.source_counts {
            for &d in &self.distances {
                for t in 0..self.trials {
                    let tag = ((n as u64) << 40) ^ (((d * 1000.0).round() as u64) << 16) ^ t as u64;
                    out.push(SceneSpec {
                        n_sources: n,
                        source_distance: d,
                        seed: derive_seed(self.base.seed, tag),
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

/// Runs every scene of the grid; results come back in scene order whatever
/// the thread count.
pub fn run_experiment(spec: &ExperimentSpec, setup: &TrialSetup) -> Result<Vec<ExperimentRow>> {
    spec.scenes()
        .par_iter()
        .enumerate()
        .map(|(i, scene)| {
            let r = run_trial(scene, setup)?;
            Ok(ExperimentRow {
                trial_id: i,
                n_sources: scene.n_sources,
                distance_m: scene.source_distance,
                seed: scene.seed,
                scores: r.scores,
            })
        })
        .collect()
}
