//! Spherical Bessel/Hankel functions, complex spherical harmonics and the
//! spherical-array mode strength.
//!
//! Spherical harmonics are complex, orthonormal over the unit sphere and carry
//! the Condon–Shortley phase. `theta` is the inclination from +z, `phi` the
//! azimuth from +x towards +y.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest order served by the Bessel routines.
pub const MAX_ORDER: usize = 30;

/// Radial boundary condition of a spherical array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereKind {
    Open,
    /// Rigid baffle of radius `r_a` (meters).
    Rigid { radius: f64 },
}

impl SphereKind {
    pub fn rigid(radius: f64) -> Result<Self> {
        if radius > 0.0 && radius.is_finite() {
            Ok(SphereKind::Rigid { radius })
        } else {
            Err(Error::Argument(format!("rigid sphere radius must be > 0, got {radius}")))
        }
    }
}

fn series_j(n: usize, x: f64) -> f64 {
    // x^n / (2n+1)!! * sum_k (-x^2/2)^k / (k! (2n+3)(2n+5)...(2n+2k+1))
    let mut lead = 1.0;
    for i in 0..=n {
        lead *= x / (2 * i + 1) as f64;
    }
    // lead now holds x^(n+1)/(2n+1)!!; undo the extra factor of x
    lead /= x;
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= y / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn miller_j(n: usize, x: f64) -> f64 {
    let start = n + x.ceil() as usize + 40;
    let mut next = 0.0_f64; // f_{k+1}
    let mut cur = 1e-300_f64; // f_k
    let mut at_n = 0.0;
    let mut f1 = 0.0;
    let mut k = start;
    loop {
        // f_{k-1} = (2k+1)/x f_k - f_{k+1}
        let prev = (2 * k + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k == n {
            at_n = cur;
        }
        if k == 1 {
            f1 = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            at_n *= 1e-250;
            f1 *= 1e-250;
        }
        if k == 0 {
            break;
        }
    }
    let f0 = cur;
    if n == 0 {
        at_n = f0;
    }
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    // normalize against the larger of j0/j1 to stay away from their zeros
    if j0.abs() >= j1.abs() {
        at_n * (j0 / f0)
    } else {
        at_n * (j1 / f1)
    }
}

/// Spherical Bessel function of the first kind `j_n(x)`, `x >= 0`.
pub fn spherical_bessel_j(n: usize, x: f64) -> f64 {
    debug_assert!(n <= MAX_ORDER);
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n == 0 {
        return x.sin() / x;
    }
    if x < (n as f64 / 2.0).max(1.0) {
        series_j(n, x)
    } else {
        miller_j(n, x)
    }
}

/// Spherical Bessel function of the second kind `y_n(x)`, `x > 0`.
pub fn spherical_bessel_y(n: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("y_{n}(x) requires x > 0, got {x}")));
    }
    let (s, c) = x.sin_cos();
    let y0 = -c / x;
    if n == 0 {
        return Ok(y0);
    }
    let mut prev = y0;
    let mut cur = -c / (x * x) - s / x;
    for k in 1..n {
        let next = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Spherical Hankel function of the second kind, `h_n^(2)(x) = j_n(x) - i y_n(x)`.
pub fn spherical_hankel_h2(n: usize, x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("h2_{n}(x) is singular at x = {x}")));
    }
    Ok(Complex64::new(spherical_bessel_j(n, x), -spherical_bessel_y(n, x)?))
}

pub fn derivative_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 1 { 1.0 / 3.0 } else { 0.0 };
    }
    if n == 0 {
        return -spherical_bessel_j(1, x);
    }
    spherical_bessel_j(n - 1, x) - (n + 1) as f64 / x * spherical_bessel_j(n, x)
}

pub fn derivative_y(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Ok(-spherical_bessel_y(1, x)?);
    }
    Ok(spherical_bessel_y(n - 1, x)? - (n + 1) as f64 / x * spherical_bessel_y(n, x)?)
}

pub fn derivative_h2(n: usize, x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("h2'_{n}(x) is singular at x = {x}")));
    }
    Ok(Complex64::new(derivative_j(n, x), -derivative_y(n, x)?))
}

/// Orthonormal associated Legendre values `N_n^m P_n^m(cos theta)` for
/// `0 <= m <= n`, including the Condon–Shortley phase and the `1/sqrt(4 pi)`
/// normalization, so that `Y_n^m = value * exp(i m phi)`.
fn normalized_legendre(n: usize, m: usize, theta: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        pmm *= -((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * st;
    }
    if n == m {
        return pmm;
    }
    let mut p_prev = pmm;
    let mut p_cur = ct * ((2 * m + 3) as f64).sqrt() * pmm;
    let mf = m as f64;
    for l in (m + 2)..=n {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        let next = a * (ct * p_cur - p_prev / a_prev);
        p_prev = p_cur;
        p_cur = next;
    }
    p_cur
}

/// Complex orthonormal spherical harmonic `Y_n^m(theta, phi)`.
pub fn sph_harm(n: usize, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > n {
        return Err(Error::Argument(format!("|m| = {} exceeds order n = {n}", m.abs())));
    }
    Ok(sph_harm_unchecked(n, m, theta, phi))
}

pub(crate) fn sph_harm_unchecked(n: usize, m: i32, theta: f64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    let p = normalized_legendre(n, am, theta);
    let y = Complex64::from_polar(p, am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// All harmonics up to `order` in ACN order (`n^2 + n + m`).
pub fn sph_harm_all(order: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity((order + 1) * (order + 1));
    for n in 0..=order {
        for m in -(n as i32)..=(n as i32) {
            out.push(sph_harm_unchecked(n, m, theta, phi));
        }
    }
    out
}

/// Flat ACN channel index of `(n, m)`.
pub fn acn(n: usize, m: i32) -> usize {
    ((n * n + n) as i64 + m as i64) as usize
}

/// Mode strength `b_n(kr) = 4 pi i^n (...)` of an open or rigid sphere.
///
/// `k` is the wavenumber; for a rigid sphere the baffle term is evaluated at
/// `k r_a`.
pub fn mode_strength(n: usize, kr: f64, kind: SphereKind, k: f64) -> Result<Complex64> {
    let i_pow = match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let radial = match kind {
        SphereKind::Open => {
            if kr < 0.0 {
                return Err(Error::Domain(format!("kr must be >= 0, got {kr}")));
            }
            Complex64::new(spherical_bessel_j(n, kr), 0.0)
        }
        SphereKind::Rigid { radius } => {
            let kra = k * radius;
            if !(kr > 0.0) || !(kra > 0.0) {
                return Err(Error::Domain(format!(
                    "rigid-sphere mode strength needs kr > 0 and k r_a > 0 (kr = {kr}, k r_a = {kra})"
                )));
            }
            let jn = spherical_bessel_j(n, kr);
            let ratio = derivative_j(n, kra) / derivative_h2(n, kra)?;
            jn - ratio * spherical_hankel_h2(n, kr)?
        }
    };
    Ok(4.0 * PI * i_pow * radial)
}
