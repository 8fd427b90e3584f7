//! Time-frequency analysis, plane-wave synthesis, noise injection and HOA
//! encoding of spherical-array pressures.
//!
//! Phasor convention: the STFT uses the kernel `exp(+j 2 pi k n / N)`, so a
//! signal delayed by `tau` seconds picks up `exp(+j 2 pi f tau)`. Under this
//! convention a plane wave arriving from unit direction `u` is observed at
//! position `r` (relative to the phase origin) with the factor
//! `exp(-j (2 pi f / c) <r, u>)`, which is the form used by the steering
//! dictionaries.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{FftDirection, FftPlanner};

use crate::dictionary::steering;
use crate::error::{Error, Result};
use crate::geometry::{inclination_azimuth, ArrayGeometry, Vec3};
use crate::specfun::{mode_strength, sph_harm_all, SphereKind};

/// Complex STFT-domain data indexed `(channel, frame, bin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfTensor {
    channels: usize,
    frames: usize,
    bins: usize,
    pub sample_rate: f64,
    pub frame_len: usize,
    pub hop: usize,
    data: Vec<Complex64>,
}

impl TfTensor {
    pub fn zeros(channels: usize, frames: usize, sample_rate: f64, frame_len: usize, hop: usize) -> Self {
        let bins = frame_len / 2 + 1;
        Self {
            channels,
            frames,
            bins,
            sample_rate,
            frame_len,
            hop,
            data: vec![Complex64::new(0.0, 0.0); channels * frames * bins],
        }
    }

    /// Tensor with the same metadata and `channels` zeroed channels.
    pub fn zeros_like(&self, channels: usize) -> Self {
        Self::zeros(channels, self.frames, self.sample_rate, self.frame_len, self.hop)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bin_freq(&self, f: usize) -> f64 {
        f as f64 * self.sample_rate / self.frame_len as f64
    }

    pub fn bin_freqs(&self) -> Vec<f64> {
        (0..self.bins).map(|f| self.bin_freq(f)).collect()
    }

    #[inline]
    fn idx(&self, ch: usize, t: usize, f: usize) -> usize {
        (ch * self.frames + t) * self.bins + f
    }

    #[inline]
    pub fn get(&self, ch: usize, t: usize, f: usize) -> Complex64 {
        self.data[self.idx(ch, t, f)]
    }

    #[inline]
    pub fn set(&mut self, ch: usize, t: usize, f: usize, v: Complex64) {
        let i = self.idx(ch, t, f);
        self.data[i] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Observations of one bin as a `channels x frames` matrix.
    pub fn bin_matrix(&self, f: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.channels, self.frames, |c, t| self.get(c, t, f))
    }

    pub fn set_bin_matrix(&mut self, f: usize, m: &DMatrix<Complex64>) {
        assert_eq!((m.nrows(), m.ncols()), (self.channels, self.frames));
        for c in 0..self.channels {
            for t in 0..self.frames {
                self.set(c, t, f, m[(c, t)]);
            }
        }
    }

    pub fn same_layout(&self, other: &TfTensor) -> bool {
        self.channels == other.channels && self.frames == other.frames && self.bins == other.bins
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn scale(&mut self, a: Complex64) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    /// Elementwise `self += other`.
    pub fn add_assign(&mut self, other: &TfTensor) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::Dimension("tensor layouts differ".into()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// Channels of `parts` stacked in order.
    pub fn stack_channels(parts: &[TfTensor]) -> Result<TfTensor> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Argument("nothing to stack".into()))?;
        let channels = parts.iter().map(|p| p.channels).sum();
        let mut out = first.zeros_like(channels);
        let mut off = 0;
        for p in parts {
            if p.frames != first.frames || p.bins != first.bins {
                return Err(Error::Dimension("stacked tensors differ in frames/bins".into()));
            }
            let n = p.data.len();
            let start = off * p.frames * p.bins;
            out.data[start..start + n].copy_from_slice(&p.data);
            off += p.channels;
        }
        Ok(out)
    }

    /// CSV dump `channel,frame,bin,freq_hz,magnitude`.
    pub fn magnitudes_csv(&self) -> String {
        let mut s = String::from("channel,frame,bin,freq_hz,magnitude\n");
        for c in 0..self.channels {
            for t in 0..self.frames {
                for f in 0..self.bins {
                    let _ = writeln!(s, "{c},{t},{f},{:.3},{:.9e}", self.bin_freq(f), self.get(c, t, f).norm());
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            frame_len: 1024,
            hop: 512,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.frame_len.is_power_of_two() || self.hop == 0 || self.frame_len % self.hop != 0 {
            return Err(Error::Argument(format!(
                "frame_len must be a power of two divisible by hop (frame_len {}, hop {})",
                self.frame_len, self.hop
            )));
        }
        Ok(())
    }

    /// Periodic Hann window.
    pub fn window(&self) -> Vec<f64> {
        let n = self.frame_len as f64;
        (0..self.frame_len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos())
            .collect()
    }

    pub fn frame_count(&self, len: usize) -> usize {
        if len <= self.frame_len {
            1
        } else {
            (len - self.frame_len).div_ceil(self.hop) + 1
        }
    }
}

/// Hann-windowed one-sided STFT of each channel; the tail is zero-padded.
pub fn stft(signal: &[Vec<f64>], cfg: &StftConfig, sample_rate: f64) -> Result<TfTensor> {
    cfg.validate()?;
    let len = signal.first().map_or(0, |s| s.len());
    if len < cfg.frame_len {
        return Err(Error::TooShort { got: len, need: cfg.frame_len });
    }
    if signal.iter().any(|s| s.len() != len) {
        return Err(Error::Dimension("channels differ in length".into()));
    }
    let frames = cfg.frame_count(len);
    let window = cfg.window();
    let fft = FftPlanner::new().plan_fft(cfg.frame_len, FftDirection::Inverse);
    let mut out = TfTensor::zeros(signal.len(), frames, sample_rate, cfg.frame_len, cfg.hop);
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.frame_len];
    for (c, x) in signal.iter().enumerate() {
        for t in 0..frames {
            let start = t * cfg.hop;
            for (i, b) in buf.iter_mut().enumerate() {
                let v = x.get(start + i).copied().unwrap_or(0.0);
                *b = Complex64::new(v * window[i], 0.0);
            }
            fft.process(&mut buf);
            for f in 0..out.bins {
                out.set(c, t, f, buf[f]);
            }
        }
    }
    Ok(out)
}

/// Overlap-add inverse of [`stft`], normalized by the summed analysis window.
pub fn istft(tensor: &TfTensor, cfg: &StftConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    if tensor.frame_len != cfg.frame_len || tensor.hop != cfg.hop {
        return Err(Error::Dimension("tensor was produced with a different STFT config".into()));
    }
    let n = cfg.frame_len;
    let len = (tensor.frames - 1) * cfg.hop + n;
    let window = cfg.window();
    let mut wsum = vec![0.0; len];
    for t in 0..tensor.frames {
        for i in 0..n {
            wsum[t * cfg.hop + i] += window[i];
        }
    }
    let fft = FftPlanner::new().plan_fft(n, FftDirection::Forward);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut out = Vec::with_capacity(tensor.channels);
    for c in 0..tensor.channels {
        let mut y = vec![0.0; len];
        for t in 0..tensor.frames {
            for k in 0..tensor.bins {
                buf[k] = tensor.get(c, t, k);
            }
            for k in tensor.bins..n {
                buf[k] = tensor.get(c, t, n - k).conj();
            }
            fft.process(&mut buf);
            for i in 0..n {
                y[t * cfg.hop + i] += buf[i].re / n as f64;
            }
        }
        for (v, w) in y.iter_mut().zip(&wsum) {
            if *w > 1e-8 {
                *v /= w;
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Far-field plane wave from direction `u` observed by `geometry`, phase
/// referenced to `origin`.
pub fn synth_plane_wave(
    geometry: &ArrayGeometry,
    origin: &Vec3,
    u: &Vec3,
    source: &TfTensor,
    c: f64,
) -> Result<TfTensor> {
    if source.channels != 1 {
        return Err(Error::Dimension(format!("source must be single-channel, got {}", source.channels)));
    }
    let rel = geometry.relative_to(origin);
    let mut out = source.zeros_like(rel.len());
    for f in 0..source.bins {
        let freq = source.bin_freq(f);
        for (q, r) in rel.iter().enumerate() {
            let a = steering(r, u, freq, c);
            for t in 0..source.frames {
                out.set(q, t, f, source.get(0, t, f) * a);
            }
        }
    }
    Ok(out)
}

/// Adds spatially white complex Gaussian noise so that total signal power over
/// total noise power equals `snr_db`. `f64::INFINITY` leaves the tensor as is.
pub fn add_noise(tensor: &TfTensor, snr_db: f64, seed: u64) -> TfTensor {
    let mut out = tensor.clone();
    if snr_db.is_infinite() && snr_db > 0.0 {
        return out;
    }
    let count = out.data.len().max(1) as f64;
    let power = tensor.norm_sqr() / count;
    let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in &mut out.data {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *v += Complex64::new(sigma * re, sigma * im);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderConfig {
    /// Maximum radial-equalization gain in dB above `1 / (4 pi)`.
    pub max_gain_db: f64,
    /// Order of the least-squares SH fit; `None` fits at the output order.
    pub fit_order: Option<usize>,
    pub speed_of_sound: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            max_gain_db: 20.0,
            fit_order: None,
            speed_of_sound: crate::SPEED_OF_SOUND,
        }
    }
}

impl EncoderConfig {
    /// Tikhonov constant `beta` such that `max |conj(b)/(|b|^2+beta^2)| = 1/(2 beta)`
    /// equals the configured gain cap.
    pub fn beta(&self) -> f64 {
        let cap = 10f64.powf(self.max_gain_db / 20.0) / (4.0 * PI);
        1.0 / (2.0 * cap)
    }

    pub fn max_gain(&self) -> f64 {
        10f64.powf(self.max_gain_db / 20.0) / (4.0 * PI)
    }
}

/// SH sampling matrix of an SMA (`mics x (L+1)^2`) and its pseudo-inverse.
pub struct ShSampling {
    pub matrix: DMatrix<Complex64>,
    pub pinv: DMatrix<Complex64>,
    pub condition: f64,
    pub radius: f64,
}

pub fn sh_sampling(geometry: &ArrayGeometry, fit_order: usize) -> Result<ShSampling> {
    let rel = geometry.relative_to(&geometry.center);
    let k = (fit_order + 1) * (fit_order + 1);
    let mut y = DMatrix::zeros(rel.len(), k);
    for (q, r) in rel.iter().enumerate() {
        let (theta, phi) = inclination_azimuth(r);
        for (i, v) in sph_harm_all(fit_order, theta, phi).into_iter().enumerate() {
            y[(q, i)] = v;
        }
    }
    let svd = y.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if rel.len() < k || !(condition <= 1e6) {
        return Err(Error::IllConditioned {
            label: geometry.label.clone(),
            cond: condition,
        });
    }
    let pinv = svd
        .pseudo_inverse(1e-12 * smax)
        .map_err(|e| Error::Argument(e.to_string()))?;
    let radius = rel.iter().map(|r| r.norm()).sum::<f64>() / rel.len() as f64;
    Ok(ShSampling {
        matrix: y,
        pinv,
        condition,
        radius,
    })
}

/// Encodes SMA pressures into plane-wave-domain SH coefficients up to `order`.
///
/// Per bin the pressures are projected onto the SH basis by least squares and
/// each order is divided by its mode strength with Tikhonov-regularized
/// inversion. Output channels follow ACN order and match
/// [`crate::dictionary::plane_wave_sh`] for a free-field plane wave.
pub fn hoa_encode(
    sma_obs: &TfTensor,
    geometry: &ArrayGeometry,
    order: usize,
    kind: SphereKind,
    cfg: &EncoderConfig,
) -> Result<TfTensor> {
    if order > 10 {
        return Err(Error::Argument(format!("HOA order {order} > 10")));
    }
    if sma_obs.channels != geometry.len() {
        return Err(Error::Dimension(format!(
            "{} observation channels for {} microphones",
            sma_obs.channels,
            geometry.len()
        )));
    }
    let fit_order = cfg.fit_order.unwrap_or(order).max(order);
    let sampling = sh_sampling(geometry, fit_order)?;
    let out_ch = (order + 1) * (order + 1);
    let beta2 = cfg.beta().powi(2);
    let mut out = sma_obs.zeros_like(out_ch);
    for f in 0..sma_obs.bins {
        let k = 2.0 * PI * sma_obs.bin_freq(f) / cfg.speed_of_sound;
        let kr = k * sampling.radius;
        let mut gains = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let b = match kind {
                SphereKind::Rigid { .. } if kr == 0.0 => Complex64::new(0.0, 0.0),
                _ => mode_strength(n, kr, kind, k)?,
            };
            gains.push(b.conj() / (b.norm_sqr() + beta2));
        }
        let p = sma_obs.bin_matrix(f);
        let pnm = &sampling.pinv * p;
        for n in 0..=order {
            for ch in (n * n)..((n + 1) * (n + 1)) {
                for t in 0..sma_obs.frames {
                    out.set(ch, t, f, pnm[(ch, t)] * gains[n]);
                }
            }
        }
    }
    Ok(out)
}

/// Reads a WAV file (16/24/32-bit PCM or 32-bit float) as per-channel samples
/// in `[-1, 1]`, returning the sample rate alongside.
pub fn read_wav(path: &Path) -> Result<(Vec<Vec<f64>>, f64)> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let nch = spec.channels as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()?,
        hound::SampleFormat::Int => {
            let scale = 2f64.powi(spec.bits_per_sample as i32 - 1);
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    let mut chans = vec![Vec::with_capacity(interleaved.len() / nch.max(1)); nch];
    for (i, v) in interleaved.into_iter().enumerate() {
        chans[i % nch].push(v);
    }
    Ok((chans, spec.sample_rate as f64))
}
