//! SMA-only, one-step joint and two-stage residue-refinement reconstruction,
//! and energy-map accumulation.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dictionary::{concat_dictionary, lma_steering_dictionary, BlockWeights, Dictionary};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, DirectionGrid, GridId, Vec3};
use crate::irls::{diffuseness, irls_solve, lambda_from_diffuseness, IrlsConfig, LambdaRange};
use crate::sigproc::TfTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    SmaOnly,
    JointOneStep,
    ResidueRefine,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::SmaOnly, Method::JointOneStep, Method::ResidueRefine];

    pub fn name(&self) -> &'static str {
        match self {
            Method::SmaOnly => "sma",
            Method::JointOneStep => "joint",
            Method::ResidueRefine => "rr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sma" | "sma_only" | "smaonly" => Ok(Method::SmaOnly),
            "joint" | "joint_one_step" | "jointonestep" => Ok(Method::JointOneStep),
            "rr" | "residue" | "residue_refine" | "residuerefine" => Ok(Method::ResidueRefine),
            other => Err(Error::Config(format!("unknown method '{other}' (expected sma, joint or rr)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    /// Processing band in Hz; bins outside contribute nothing.
    pub band_hz: (f64, f64),
    /// Keep every `bin_stride`-th bin inside the band.
    pub bin_stride: usize,
    pub irls: IrlsConfig,
    pub lambda: LambdaRange,
    pub block_weights: BlockWeights,
    pub speed_of_sound: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            band_hz: (300.0, 4000.0),
            bin_stride: 1,
            irls: IrlsConfig::default(),
            lambda: LambdaRange::default(),
            block_weights: BlockWeights::default(),
            speed_of_sound: crate::SPEED_OF_SOUND,
        }
    }
}

impl PipelineConfig {
    pub fn processed_bins(&self, tensor: &TfTensor) -> Vec<usize> {
        let stride = self.bin_stride.max(1);
        (0..tensor.bins())
            .filter(|&f| {
                let hz = tensor.bin_freq(f);
                hz >= self.band_hz.0 && hz <= self.band_hz.1
            })
            .step_by(stride)
            .collect()
    }
}

/// Plane-wave coefficients (directions x frames) for each processed bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoeffs {
    pub grid: GridId,
    pub directions: usize,
    pub frames: usize,
    pub bins: Vec<usize>,
    pub data: Vec<DMatrix<Complex64>>,
}

impl SparseCoeffs {
    pub fn zeros(grid: GridId, directions: usize, frames: usize, bins: Vec<usize>) -> Self {
        let data = bins.iter().map(|_| DMatrix::zeros(directions, frames)).collect();
        Self {
            grid,
            directions,
            frames,
            bins,
            data,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().flat_map(|m| m.iter()).map(|v| v.norm_sqr()).sum()
    }

    fn check_compatible(&self, other: &SparseCoeffs) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.bins != other.bins || self.frames != other.frames || self.directions != other.directions {
            return Err(Error::Dimension("coefficient sets differ in shape".into()));
        }
        Ok(())
    }
}

/// Steering dictionaries of the stacked LMAs for a list of bins.
#[derive(Debug, Clone)]
pub struct LmaDictionaries {
    pub grid: GridId,
    pub bins: Vec<usize>,
    pub dicts: Vec<Dictionary>,
}

impl LmaDictionaries {
    pub fn build(
        arrays: &[ArrayGeometry],
        origin: &Vec3,
        grid: &DirectionGrid,
        tensor: &TfTensor,
        bins: &[usize],
        c: f64,
    ) -> Self {
        let dicts = bins
            .par_iter()
            .map(|&f| lma_steering_dictionary(arrays, origin, grid, tensor.bin_freq(f), c))
            .collect();
        Self {
            grid: grid.id(),
            bins: bins.to_vec(),
            dicts,
        }
    }

    fn get(&self, bin: usize) -> Result<&Dictionary> {
        self.bins
            .iter()
            .position(|&b| b == bin)
            .map(|i| &self.dicts[i])
            .ok_or_else(|| Error::Dimension(format!("no LMA dictionary for bin {bin}")))
    }
}

fn bin_lambda_from_psi(b_hoa: &TfTensor, f: usize, cfg: &PipelineConfig) -> Result<f64> {
    let d = diffuseness(b_hoa, 0..b_hoa.frames(), &[f])?;
    Ok(lambda_from_diffuseness(d.psi, 1.0, cfg.lambda))
}

/// Stage 1: sparse recovery on the HOA signals with diffuseness-driven
/// regularization.
pub fn sr_sma(b_hoa: &TfTensor, d_hoa: &Dictionary, bins: &[usize], cfg: &PipelineConfig) -> Result<SparseCoeffs> {
    if b_hoa.channels() != d_hoa.rows() {
        return Err(Error::Dimension(format!(
            "{} HOA channels for a {}-row dictionary",
            b_hoa.channels(),
            d_hoa.rows()
        )));
    }
    let data = bins
        .par_iter()
        .map(|&f| {
            let lambda = bin_lambda_from_psi(b_hoa, f, cfg)?;
            Ok(irls_solve(&b_hoa.bin_matrix(f), &d_hoa.matrix, &cfg.irls, lambda)?.x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseCoeffs {
        grid: d_hoa.grid,
        directions: d_hoa.cols(),
        frames: b_hoa.frames(),
        bins: bins.to_vec(),
        data,
    })
}

/// `B_proj = D_LMA(f) X_hoa(f)` for every bin of `x_hoa`; other bins are zero.
pub fn project_to_lma(x_hoa: &SparseCoeffs, d_lma: &LmaDictionaries, layout: &TfTensor) -> Result<TfTensor> {
    if x_hoa.grid != d_lma.grid {
        return Err(Error::GridMismatch);
    }
    let channels = d_lma.dicts.first().map_or(0, |d| d.rows());
    let mut out = layout.zeros_like(channels);
    for (f, x) in x_hoa.bins.iter().zip(&x_hoa.data) {
        let d = d_lma.get(*f)?;
        out.set_bin_matrix(*f, &(&d.matrix * x));
    }
    Ok(out)
}

pub fn residue(b_lma: &TfTensor, b_proj: &TfTensor) -> Result<TfTensor> {
    if !b_lma.same_layout(b_proj) {
        return Err(Error::Dimension("residue operands differ in shape".into()));
    }
    let mut out = b_lma.clone();
    for (o, p) in out.data_mut().iter_mut().zip(b_proj.data()) {
        *o -= p;
    }
    Ok(out)
}

fn bin_energy(t: &TfTensor, f: usize) -> f64 {
    let mut e = 0.0;
    for c in 0..t.channels() {
        for k in 0..t.frames() {
            e += t.get(c, k, f).norm_sqr();
        }
    }
    e
}

/// Stage 3: sparse recovery of the residue with the LMA dictionary.
///
/// Regularization interpolates between the configured bounds with the
/// per-bin ratio `min(1, ||B_res|| / ||B_lma||)`.
pub fn sr_residue(b_res: &TfTensor, b_lma: &TfTensor, d_lma: &LmaDictionaries, cfg: &PipelineConfig) -> Result<SparseCoeffs> {
    if !b_res.same_layout(b_lma) {
        return Err(Error::Dimension("residue and LMA observations differ in shape".into()));
    }
    let directions = d_lma.dicts.first().map_or(0, |d| d.cols());
    let data = d_lma
        .bins
        .par_iter()
        .zip(d_lma.dicts.par_iter())
        .map(|(&f, d)| {
            let er = bin_energy(b_res, f);
            let el = bin_energy(b_lma, f);
            let ratio = if el > 0.0 { (er / el).sqrt().min(1.0) } else { 1.0 };
            let lambda = lambda_from_diffuseness(ratio, 1.0, cfg.lambda);
            Ok(irls_solve(&b_res.bin_matrix(f), &d.matrix, &cfg.irls, lambda)?.x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseCoeffs {
        grid: d_lma.grid,
        directions,
        frames: b_res.frames(),
        bins: d_lma.bins.clone(),
        data,
    })
}

/// Stage 4: plain elementwise sum.
pub fn fuse(x_hoa: &SparseCoeffs, x_res: &SparseCoeffs) -> Result<SparseCoeffs> {
    x_hoa.check_compatible(x_res)?;
    let mut out = x_hoa.clone();
    for (a, b) in out.data.iter_mut().zip(&x_res.data) {
        *a += b;
    }
    Ok(out)
}

/// One-step recovery on the row-stacked HOA + LMA observations.
pub fn sr_joint_onestep(
    b_hoa: &TfTensor,
    b_lma: &TfTensor,
    d_hoa: &Dictionary,
    d_lma: &LmaDictionaries,
    cfg: &PipelineConfig,
) -> Result<SparseCoeffs> {
    if d_hoa.grid != d_lma.grid {
        return Err(Error::GridMismatch);
    }
    if b_hoa.frames() != b_lma.frames() || b_hoa.bins() != b_lma.bins() {
        return Err(Error::Dimension("HOA and LMA tensors differ in frames/bins".into()));
    }
    let w = cfg.block_weights;
    let kh = b_hoa.channels();
    let data = d_lma
        .bins
        .par_iter()
        .zip(d_lma.dicts.par_iter())
        .map(|(&f, dl)| {
            let joint = concat_dictionary(d_hoa, dl, w)?;
            let bh = b_hoa.bin_matrix(f);
            let bl = b_lma.bin_matrix(f);
            let mut b = DMatrix::zeros(kh + bl.nrows(), b_hoa.frames());
            b.rows_mut(0, kh).copy_from(&(bh * Complex64::from(w.hoa)));
            b.rows_mut(kh, bl.nrows()).copy_from(&(bl * Complex64::from(w.lma)));
            let lambda = bin_lambda_from_psi(b_hoa, f, cfg)?;
            Ok(irls_solve(&b, &joint.matrix, &cfg.irls, lambda)?.x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseCoeffs {
        grid: d_hoa.grid,
        directions: d_hoa.cols(),
        frames: b_hoa.frames(),
        bins: d_lma.bins.clone(),
        data,
    })
}

/// Intermediate products of the two-stage method.
#[derive(Debug, Clone)]
pub struct ResidueRefinement {
    pub x_hoa: SparseCoeffs,
    pub b_proj: TfTensor,
    pub b_res: TfTensor,
    pub x_res: SparseCoeffs,
    pub fused: SparseCoeffs,
}

/// Stages 2-4 given a stage-1 estimate.
pub fn refine_with_residue(
    x_hoa: SparseCoeffs,
    b_lma: &TfTensor,
    d_lma: &LmaDictionaries,
    cfg: &PipelineConfig,
) -> Result<ResidueRefinement> {
    let b_proj = project_to_lma(&x_hoa, d_lma, b_lma)?;
    let b_res = residue(b_lma, &b_proj)?;
    let x_res = sr_residue(&b_res, b_lma, d_lma, cfg)?;
    let fused = fuse(&x_hoa, &x_res)?;
    Ok(ResidueRefinement {
        x_hoa,
        b_proj,
        b_res,
        x_res,
        fused,
    })
}

/// Per-direction energy accumulated over frames and processed bins.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMap {
    pub grid: GridId,
    pub energy: Vec<f64>,
}

impl EnergyMap {
    pub fn new(grid: GridId, energy: Vec<f64>) -> Result<Self> {
        if energy.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::Argument("energy map entries must be finite and >= 0".into()));
        }
        Ok(Self { grid, energy })
    }

    pub fn total(&self) -> f64 {
        self.energy.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.energy.iter().cloned().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }
}

pub fn energy_map(x: &SparseCoeffs) -> EnergyMap {
    let mut energy = vec![0.0; x.directions];
    for m in &x.data {
        for (i, e) in energy.iter_mut().enumerate() {
            *e += m.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
    }
    EnergyMap { grid: x.grid, energy }
}

/// Everything the three methods need besides the observations.
pub struct ReconstructionSetup<'a> {
    pub grid: &'a DirectionGrid,
    pub d_hoa: &'a Dictionary,
    pub d_lma: &'a LmaDictionaries,
    pub cfg: &'a PipelineConfig,
}

/// Runs the requested methods on shared observations, reusing stage 1.
pub fn reconstruct(
    methods: &[Method],
    b_hoa: &TfTensor,
    b_lma: &TfTensor,
    setup: &ReconstructionSetup<'_>,
) -> Result<Vec<(Method, EnergyMap)>> {
    let bins = setup.d_lma.bins.clone();
    let needs_stage1 = methods
        .iter()
        .any(|m| matches!(m, Method::SmaOnly | Method::ResidueRefine));
    let x_hoa = if needs_stage1 {
        Some(sr_sma(b_hoa, setup.d_hoa, &bins, setup.cfg)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(methods.len());
    for &m in methods {
        let map = match m {
            Method::SmaOnly => energy_map(x_hoa.as_ref().expect("stage 1 computed")),
            Method::JointOneStep => {
                energy_map(&sr_joint_onestep(b_hoa, b_lma, setup.d_hoa, setup.d_lma, setup.cfg)?)
            }
            Method::ResidueRefine => {
                let x = x_hoa.clone().expect("stage 1 computed");
                energy_map(&refine_with_residue(x, b_lma, setup.d_lma, setup.cfg)?.fused)
            }
        };
        out.push((m, map));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::icosphere;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("beamformer".parse::<Method>().is_err());
    }

    #[test]
    fn energy_map_of_unit_entry() {
        let g = icosphere(1);
        let mut x = SparseCoeffs::zeros(g.id(), g.len(), 3, vec![10, 11]);
        x.data[1][(7, 2)] = Complex64::new(0.6, 0.8);
        let m = energy_map(&x);
        assert!((m.energy[7] - 1.0).abs() < 1e-15);
        assert_eq!(m.energy.iter().filter(|&&e| e != 0.0).count(), 1);
        let mut y = x.clone();
        for d in &mut y.data {
            *d *= Complex64::from(3.0);
        }
        assert!((energy_map(&y).energy[7] - 9.0).abs() < 1e-12);
        assert!((m.total() - x.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn fuse_and_residue_identities() {
        let g = icosphere(1);
        let mut a = SparseCoeffs::zeros(g.id(), g.len(), 2, vec![5]);
        let mut b = a.clone();
        a.data[0][(1, 0)] = Complex64::new(1.0, 2.0);
        b.data[0][(4, 1)] = Complex64::new(-3.0, 0.5);
        let zero = SparseCoeffs::zeros(g.id(), g.len(), 2, vec![5]);
        assert_eq!(fuse(&a, &zero).unwrap(), a);
        assert_eq!(fuse(&zero, &b).unwrap(), b);
        let s = fuse(&a, &b).unwrap();
        assert_eq!(s.data[0][(1, 0)], a.data[0][(1, 0)]);
        assert_eq!(s.data[0][(4, 1)], b.data[0][(4, 1)]);
        let other = SparseCoeffs::zeros(icosphere(2).id(), 162, 2, vec![5]);
        assert!(matches!(fuse(&a, &other), Err(Error::GridMismatch)));

        let mut t = TfTensor::zeros(3, 2, 16000.0, 32, 16);
        t.set(1, 1, 4, Complex64::new(2.0, -1.0));
        assert_eq!(residue(&t, &t.zeros_like(3)).unwrap(), t);
        assert_eq!(residue(&t, &t).unwrap().norm_sqr(), 0.0);
        assert!(residue(&t, &t.zeros_like(2)).is_err());
    }

    #[test]
    fn processed_bins_respect_band_and_stride() {
        let t = TfTensor::zeros(1, 1, 16000.0, 1024, 512);
        let cfg = PipelineConfig::default();
        let bins = cfg.processed_bins(&t);
        assert!(bins.iter().all(|&f| (300.0..=4000.0).contains(&t.bin_freq(f))));
        assert_eq!(bins.len(), 237);
        let strided = PipelineConfig { bin_stride: 4, ..cfg }.processed_bins(&t);
        assert_eq!(strided.len(), 60);
        assert_eq!(strided[1] - strided[0], 4);
    }
}
