//! Joint-sparse recovery by iteratively reweighted least squares.
//!
//! For one frequency bin the solver estimates `X` (directions x frames) from
//! `B = D X + noise` by minimizing the smoothed mixed norm
//! `sum_i (||x_i||^2 + eps)^(p/2)` plus a quadratic residual penalty. Each
//! iteration solves the weighted regularized normal equations
//!
//! ```text
//! X <- W D^H (D W D^H + lambda I)^-1 B,   w_i = (||x_i||^2 + eps)^((2-p)/2)
//! ```
//!
//! where `||x_i||` is the l2 norm of row `i` across frames, which couples the
//! frames and yields row (direction) sparsity. The first `l1_warmup_iters`
//! iterations use `p = 1`.
//!
//! Observations are normalized to unit per-channel energy `||B||^2 / K`
//! (summed over frames) before solving. Both `lambda` and `eps` are relative
//! to that reference, so they are dimensionless and the solution is
//! scale-equivariant.

use std::fmt::Write as _;
use std::ops::Range;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigproc::TfTensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsConfig {
    pub p: f64,
    pub l1_warmup_iters: usize,
    pub max_iters: usize,
    /// Initial smoothing relative to the per-channel observation energy.
    pub epsilon_init: f64,
    /// Factor applied to `eps` whenever the objective stalls.
    pub epsilon_decay: f64,
    /// Relative objective change below which `eps` is decayed.
    pub stall_tol: f64,
    pub convergence_tol: f64,
    pub lambda_override: Option<f64>,
    /// Columns whose weight falls below `prune_tol * max(w)` are skipped when
    /// forming `D W D^H`. Zero keeps every column.
    pub prune_tol: f64,
    pub trace: bool,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        Self {
            p: 0.7,
            l1_warmup_iters: 10,
            max_iters: 50,
            epsilon_init: 1e-2,
            epsilon_decay: 0.5,
            stall_tol: 1e-2,
            convergence_tol: 1e-6,
            lambda_override: None,
            prune_tol: 0.0,
            trace: false,
        }
    }
}

impl IrlsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::Argument(format!("p must lie in (0, 1], got {}", self.p)));
        }
        if self.max_iters < self.l1_warmup_iters {
            return Err(Error::Argument("max_iters must be >= l1_warmup_iters".into()));
        }
        if !(self.epsilon_init > 0.0) {
            return Err(Error::Argument("epsilon_init must be > 0".into()));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return Err(Error::Argument("epsilon_decay must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// One row of the optional per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub p: f64,
    pub epsilon: f64,
    pub objective: f64,
    pub residual: f64,
    pub active: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsStatus {
    pub iterations: usize,
    pub converged: bool,
    pub lambda: f64,
    /// The Hermitian factorization needed the x10 regularization retry.
    pub retried: bool,
}

#[derive(Debug, Clone)]
pub struct IrlsSolution {
    /// Coefficients, directions x frames.
    pub x: DMatrix<Complex64>,
    pub status: IrlsStatus,
    pub trace: Vec<TraceRow>,
}

impl IrlsSolution {
    /// `l2` energy of each row (direction) across frames.
    pub fn row_energies(&self) -> Vec<f64> {
        row_energies(&self.x)
    }
}

pub fn row_energies(x: &DMatrix<Complex64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| x.row(i).iter().map(|v| v.norm_sqr()).sum())
        .collect()
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut s = String::from("iteration,p,epsilon,objective,residual,active\n");
    for r in trace {
        let _ = writeln!(
            s,
            "{},{},{:.6e},{:.12e},{:.6e},{}",
            r.iteration, r.p, r.epsilon, r.objective, r.residual, r.active
        );
    }
    s
}

fn smoothed_norm(gamma2: &[f64], eps: f64, p: f64) -> f64 {
    gamma2.iter().map(|g| (g + eps).powf(p / 2.0)).sum()
}

fn objective(gamma2: &[f64], eps: f64, p: f64, lambda: f64, resid2: f64) -> f64 {
    let s = smoothed_norm(gamma2, eps, p);
    if lambda > 0.0 {
        s + p / (2.0 * lambda) * resid2
    } else {
        s
    }
}

/// Complex matrix held as separate real and imaginary parts, so products run
/// through the real matrix-multiply kernel.
struct SplitMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl SplitMatrix {
    fn new(m: &DMatrix<Complex64>) -> Self {
        Self {
            re: m.map(|v| v.re),
            im: m.map(|v| v.im),
        }
    }

    fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex64> {
        re.zip_map(im, Complex64::new)
    }
}

/// `D diag(w) D^H` restricted to columns with `w_i > cutoff`.
fn weighted_gram(d: &SplitMatrix, w: &[f64], cutoff: f64) -> DMatrix<Complex64> {
    let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > cutoff).collect();
    let k = d.re.nrows();
    let mut er = DMatrix::zeros(k, keep.len());
    let mut ei = DMatrix::zeros(k, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let s = w[i].sqrt();
        er.set_column(j, &(d.re.column(i) * s));
        ei.set_column(j, &(d.im.column(i) * s));
    }
    let re = &er * er.transpose() + &ei * ei.transpose();
    let im = &ei * er.transpose() - &er * ei.transpose();
    SplitMatrix::join(&re, &im)
}

/// `D^H Y`.
fn adjoint_times(d: &SplitMatrix, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let y = SplitMatrix::new(y);
    let re = d.re.tr_mul(&y.re) + d.im.tr_mul(&y.im);
    let im = d.re.tr_mul(&y.im) - d.im.tr_mul(&y.re);
    SplitMatrix::join(&re, &im)
}

fn solve_regularized(
    gram: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    lambda: f64,
    active_rows: usize,
) -> Result<(DMatrix<Complex64>, f64, bool)> {
    let attempt = |lam: f64| {
        let mut a = gram.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += Complex64::from(lam);
        }
        Cholesky::new(a).map(|c| c.solve(b))
    };
    if let Some(y) = attempt(lambda) {
        return Ok((y, lambda, false));
    }
    let mean_diag = (0..gram.nrows()).map(|i| gram[(i, i)].re).sum::<f64>() / active_rows.max(1) as f64;
    let retry = (10.0 * lambda).max(1e-12 * mean_diag).max(f64::MIN_POSITIVE);
    attempt(retry).map(|y| (y, retry, true)).ok_or(Error::Factorization)
}

/// Solves one bin: `b` is `K x T`, `d` is `K x N`, `lambda` is relative to
/// unit-power observations (`cfg.lambda_override` takes precedence).
pub fn irls_solve(b: &DMatrix<Complex64>, d: &DMatrix<Complex64>, cfg: &IrlsConfig, lambda: f64) -> Result<IrlsSolution> {
    cfg.validate()?;
    if b.nrows() != d.nrows() {
        return Err(Error::Dimension(format!(
            "observations have {} rows, dictionary {}",
            b.nrows(),
            d.nrows()
        )));
    }
    if b.iter().chain(d.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("irls input"));
    }
    let lambda = cfg.lambda_override.unwrap_or(lambda);
    if !(lambda >= 0.0) {
        return Err(Error::Argument(format!("lambda must be >= 0, got {lambda}")));
    }
    let n = d.ncols();
    let t = b.ncols();
    let active_rows = (0..d.nrows())
        .filter(|&r| d.row(r).iter().any(|v| v.norm_sqr() > 0.0))
        .count();
    let energy: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 || active_rows == 0 || t == 0 {
        return Ok(IrlsSolution {
            x: DMatrix::zeros(n, t),
            status: IrlsStatus {
                iterations: 0,
                converged: true,
                lambda,
                retried: false,
            },
            trace: Vec::new(),
        });
    }
    let scale = (energy / active_rows as f64).sqrt();
    let bn = b / Complex64::from(scale);
    let ds = SplitMatrix::new(d);

    let mut eps = cfg.epsilon_init;
    let eps_floor = 1e-12;
    let mut retried = false;

    let ones = vec![1.0; n];
    let gram = weighted_gram(&ds, &ones, -1.0);
    let (y, mut lam, r) = solve_regularized(&gram, &bn, lambda, active_rows)?;
    retried |= r;
    let mut x = adjoint_times(&ds, &y);
    let mut resid2 = lam * lam * y.iter().map(|v| v.norm_sqr()).sum::<f64>();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..cfg.max_iters {
        let p = if iter < cfg.l1_warmup_iters { 1.0 } else { cfg.p };
        let gamma2 = row_energies(&x);
        let obj_old = objective(&gamma2, eps, p, lam, resid2);
        let w: Vec<f64> = gamma2.iter().map(|g| (g + eps).powf((2.0 - p) / 2.0)).collect();
        let wmax = w.iter().cloned().fold(0.0, f64::max);
        let gram = weighted_gram(&ds, &w, cfg.prune_tol * wmax);
        let (y, used, r) = solve_regularized(&gram, &bn, lambda, active_rows)?;
        retried |= r;
        lam = used;
        let mut xn = adjoint_times(&ds, &y);
        for (i, wi) in w.iter().enumerate() {
            let wi = Complex64::from(*wi);
            for v in xn.row_mut(i).iter_mut() {
                *v *= wi;
            }
        }
        x = xn;
        resid2 = lam * lam * y.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let gamma2 = row_energies(&x);
        let obj_new = objective(&gamma2, eps, p, lam, resid2);
        iterations = iter + 1;
        if cfg.trace {
            let gmax = gamma2.iter().cloned().fold(0.0, f64::max);
            trace.push(TraceRow {
                iteration: iter,
                p,
                epsilon: eps,
                objective: obj_new,
                residual: (resid2 / active_rows as f64).sqrt(),
                active: gamma2.iter().filter(|&&g| g > 1e-6 * gmax).count(),
            });
        }
        let rel = (obj_old - obj_new).abs() / obj_old.abs().max(f64::MIN_POSITIVE);
        if iter + 1 >= cfg.l1_warmup_iters && rel < cfg.convergence_tol {
            converged = true;
            break;
        }
        if rel < cfg.stall_tol {
            eps = (eps * cfg.epsilon_decay).max(eps_floor);
        }
    }
    x *= Complex64::from(scale);
    Ok(IrlsSolution {
        x,
        status: IrlsStatus {
            iterations,
            converged,
            lambda: lam,
            retried,
        },
        trace,
    })
}

/// Result of a diffuseness estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffuseness {
    pub psi: f64,
    /// The field was silent; `psi` is the sentinel 1.0.
    pub silent: bool,
}

/// Energy below which a field counts as silent.
const SILENCE_FLOOR: f64 = 1e-30;

/// Diffuseness `1 - |<I>| / <E>` from the order-0/1 plane-wave-domain HOA
/// channels, averaged over `frames` and `bins`.
///
/// With channels following [`crate::dictionary::plane_wave_sh`], a plane wave
/// of amplitude `s` from direction `u` maps to an omni signal `s` and a
/// dipole vector `s u`, so the pseudo-intensity points at the source and its
/// norm equals the energy density.
pub fn diffuseness(b_hoa: &TfTensor, frames: Range<usize>, bins: &[usize]) -> Result<Diffuseness> {
    if b_hoa.channels() < 4 {
        return Err(Error::Argument("diffuseness needs first-order channels".into()));
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    let s0 = four_pi.sqrt();
    let s1 = (four_pi / 3.0).sqrt();
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let j = Complex64::new(0.0, 1.0);
    let mut intensity = [0.0f64; 3];
    let mut energy = 0.0;
    for &f in bins {
        for t in frames.clone() {
            let p0 = b_hoa.get(0, t, f) * s0;
            let cm = b_hoa.get(1, t, f);
            let c0 = b_hoa.get(2, t, f);
            let cp = b_hoa.get(3, t, f);
            let v = [
                (cp - cm) * (r2 * s1),
                j * (cm + cp) * (r2 * s1),
                -c0 * s1,
            ];
            for k in 0..3 {
                intensity[k] += (p0.conj() * v[k]).re;
            }
            energy += 0.5 * (p0.norm_sqr() + v.iter().map(|c| c.norm_sqr()).sum::<f64>());
        }
    }
    if energy <= SILENCE_FLOOR {
        return Ok(Diffuseness { psi: 1.0, silent: true });
    }
    let inorm = intensity.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(Diffuseness {
        psi: (1.0 - inorm / energy).clamp(0.0, 1.0),
        silent: false,
    })
}

/// Bounds of the regularization interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRange {
    pub min: f64,
    pub max: f64,
}

impl Default for LambdaRange {
    fn default() -> Self {
        Self { min: 1e-4, max: 1e-1 }
    }
}

/// `lambda = min * (max/min)^psi * power_scale`.
///
/// [`irls_solve`] normalizes observations to unit power, so pipelines pass
/// `power_scale = 1`.
pub fn lambda_from_diffuseness(psi: f64, power_scale: f64, range: LambdaRange) -> f64 {
    let psi = psi.clamp(0.0, 1.0);
    range.min * (range.max / range.min).powf(psi) * power_scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_observations_give_zero() {
        let d = DMatrix::from_fn(4, 9, |i, j| Complex64::new((i * j) as f64 + 1.0, i as f64));
        let b = DMatrix::zeros(4, 3);
        let s = irls_solve(&b, &d, &IrlsConfig::default(), 1e-3).unwrap();
        assert!(s.x.iter().all(|v| v.norm() == 0.0));
        assert_eq!((s.x.nrows(), s.x.ncols()), (9, 3));
    }

    #[test]
    fn rejects_bad_input() {
        let d = DMatrix::from_element(3, 5, Complex64::new(1.0, 0.0));
        let b = DMatrix::from_element(4, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(irls_solve(&b, &d, &IrlsConfig::default(), 0.1), Err(Error::Dimension(_))));
        let mut b = DMatrix::from_element(3, 2, Complex64::new(1.0, 0.0));
        b[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(irls_solve(&b, &d, &IrlsConfig::default(), 0.1), Err(Error::NonFinite(_))));
        let cfg = IrlsConfig { p: 1.5, ..IrlsConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lambda_endpoints() {
        let r = LambdaRange::default();
        assert!((lambda_from_diffuseness(0.0, 2.0, r) - 2e-4).abs() < 1e-18);
        assert!((lambda_from_diffuseness(1.0, 2.0, r) - 0.2).abs() < 1e-15);
        let mid = lambda_from_diffuseness(0.5, 1.0, r);
        assert!((mid - (1e-4f64 * 1e-1).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn silent_field_is_flagged() {
        let tf = TfTensor::zeros(25, 4, 16000.0, 64, 32);
        let d = diffuseness(&tf, 0..4, &[3]).unwrap();
        assert!(d.silent);
        assert_eq!(d.psi, 1.0);
    }
}
