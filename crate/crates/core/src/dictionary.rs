//! Plane-wave dictionaries: frequency-independent HOA manifold vectors,
//! per-frequency LMA steering vectors and their row-stacked concatenation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{inclination_azimuth, ArrayGeometry, DirectionGrid, GridId, Vec3};
use crate::specfun::sph_harm_all;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Sh { order: usize },
    Signal { freq_hz: f64 },
    Joint { order: usize, freq_hz: f64 },
}

/// Dictionary matrix: rows are observation channels, columns grid directions.
#[derive(Debug, Clone)]
pub struct Dictionary {
    pub domain: Domain,
    pub matrix: DMatrix<Complex64>,
    pub grid: GridId,
}

impl Dictionary {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// CSV dump, one row per channel with `re,im` pairs per direction.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.rows() {
            let line: Vec<String> = (0..self.cols())
                .map(|c| {
                    let v = self.matrix[(r, c)];
                    format!("{:.12e},{:.12e}", v.re, v.im)
                })
                .collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

/// SH components of a unit-amplitude plane wave arriving from `dir`, in ACN
/// order: `(-1)^n conj(Y_n^m(dir))`.
///
/// The `(-1)^n` factor comes from equalizing a plane wave with phase
/// `exp(-j k <r, u>)` by mode strengths carrying `i^n`; this is exactly what
/// [`crate::sigproc::hoa_encode`] produces for such a wave.
pub fn plane_wave_sh(order: usize, dir: &Vec3) -> Vec<Complex64> {
    let (theta, phi) = inclination_azimuth(dir);
    let ys = sph_harm_all(order, theta, phi);
    let mut out = Vec::with_capacity(ys.len());
    let mut idx = 0;
    for n in 0..=order {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for _ in 0..(2 * n + 1) {
            out.push(ys[idx].conj() * sign);
            idx += 1;
        }
    }
    out
}

pub fn hoa_dictionary(grid: &DirectionGrid, order: usize) -> Dictionary {
    assert!(order <= 10, "HOA order {order} > 10");
    let k = (order + 1) * (order + 1);
    let mut m = DMatrix::zeros(k, grid.len());
    for (j, d) in grid.directions().iter().enumerate() {
        for (i, v) in plane_wave_sh(order, d).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Dictionary {
        domain: Domain::Sh { order },
        matrix: m,
        grid: grid.id(),
    }
}

/// Steering phase `exp(-j (2 pi f / c) <r, u>)`.
pub fn steering(r: &Vec3, u: &Vec3, freq_hz: f64, c: f64) -> Complex64 {
    let k = 2.0 * PI * freq_hz / c;
    Complex64::from_polar(1.0, -k * r.dot(u))
}

/// Steering dictionary of the stacked arrays, positions referenced to
/// `origin` (the SMA center). Rows follow the declaration order of `arrays`.
pub fn lma_steering_dictionary(
    arrays: &[ArrayGeometry],
    origin: &Vec3,
    grid: &DirectionGrid,
    freq_hz: f64,
    c: f64,
) -> Dictionary {
    let positions: Vec<Vec3> = arrays.iter().flat_map(|a| a.relative_to(origin)).collect();
    let mut m = DMatrix::zeros(positions.len(), grid.len());
    for (j, u) in grid.directions().iter().enumerate() {
        for (q, r) in positions.iter().enumerate() {
            m[(q, j)] = steering(r, u, freq_hz, c);
        }
    }
    Dictionary {
        domain: Domain::Signal { freq_hz },
        matrix: m,
        grid: grid.id(),
    }
}

/// Scalar weights applied to the HOA and LMA blocks of a joint dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockWeights {
    pub hoa: f64,
    pub lma: f64,
}

impl Default for BlockWeights {
    fn default() -> Self {
        Self { hoa: 1.0, lma: 1.0 }
    }
}

pub fn concat_dictionary(d_hoa: &Dictionary, d_lma: &Dictionary, weights: BlockWeights) -> Result<Dictionary> {
    if d_hoa.grid != d_lma.grid || d_hoa.cols() != d_lma.cols() {
        return Err(Error::GridMismatch);
    }
    let (order, freq_hz) = match (d_hoa.domain, d_lma.domain) {
        (Domain::Sh { order }, Domain::Signal { freq_hz }) => (order, freq_hz),
        _ => {
            return Err(Error::Argument(
                "concatenation expects an SH dictionary followed by a signal-domain dictionary".into(),
            ))
        }
    };
    let kh = d_hoa.rows();
    let mut m = DMatrix::zeros(kh + d_lma.rows(), d_hoa.cols());
    m.rows_mut(0, kh).copy_from(&(&d_hoa.matrix * Complex64::from(weights.hoa)));
    m.rows_mut(kh, d_lma.rows())
        .copy_from(&(&d_lma.matrix * Complex64::from(weights.lma)));
    Ok(Dictionary {
        domain: Domain::Joint { order, freq_hz },
        matrix: m,
        grid: d_hoa.grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{icosphere, linear_array, default_lma_geometries, DirectionGrid};

    #[test]
    fn hoa_shape_and_constant_row() {
        let g = icosphere(3);
        let d = hoa_dictionary(&g, 4);
        assert_eq!((d.rows(), d.cols()), (25, 642));
        let c = 1.0 / (4.0 * PI).sqrt();
        for j in 0..d.cols() {
            assert!((d.matrix[(0, j)] - Complex64::from(c)).norm() < 1e-14);
        }
    }

    #[test]
    fn hoa_zenith_column_is_axisymmetric() {
        let g = icosphere(3);
        assert!((g.direction(0) - Vec3::z()).norm() < 1e-15);
        let d = hoa_dictionary(&g, 4);
        for n in 0..=4usize {
            for m in -(n as i32)..=(n as i32) {
                if m != 0 {
                    let v = d.matrix[(crate::specfun::acn(n, m), 0)];
                    assert!(v.norm() < 1e-14, "({n},{m}) = {v}");
                }
            }
        }
    }

    #[test]
    fn hoa_column_norms_follow_addition_theorem() {
        let g = icosphere(2);
        let d = hoa_dictionary(&g, 4);
        let want = 25.0 / (4.0 * PI);
        for j in 0..d.cols() {
            let n2: f64 = d.matrix.column(j).iter().map(|v| v.norm_sqr()).sum();
            assert!((n2 - want).abs() < 1e-10);
        }
    }

    #[test]
    fn steering_zero_frequency_is_all_ones() {
        let g = icosphere(1);
        let arrays = default_lma_geometries(Vec3::zeros());
        let d = lma_steering_dictionary(&arrays, &Vec3::zeros(), &g, 0.0, 343.0);
        assert_eq!(d.rows(), 32);
        assert!(d.matrix.iter().all(|v| (v - Complex64::from(1.0)).norm() < 1e-15));
    }

    #[test]
    fn steering_broadside_column_is_all_ones() {
        let line = linear_array(Vec3::zeros(), Vec3::x(), 0.04, 8, "l");
        let g = DirectionGrid::from_directions(vec![Vec3::y(), Vec3::x()]);
        let d = lma_steering_dictionary(&[line], &Vec3::zeros(), &g, 3000.0, 343.0);
        for q in 0..8 {
            assert!((d.matrix[(q, 0)] - Complex64::from(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_single_mic_phase() {
        let r = Vec3::new(0.1, 0.0, 0.0);
        let v = steering(&r, &Vec3::x(), 1000.0, 343.0);
        let want = -2.0 * PI * 1000.0 * 0.1 / 343.0;
        assert!((v.arg() - want).abs() < 1e-12);
        assert!((want + 1.8318).abs() < 1e-4);
    }

    #[test]
    fn steering_entries_unit_modulus_and_reflection_conjugate() {
        let g = icosphere(2);
        let arrays = default_lma_geometries(Vec3::zeros());
        let d = lma_steering_dictionary(&arrays, &Vec3::zeros(), &g, 2345.0, 343.0);
        assert!(d.matrix.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        let mirrored: Vec<ArrayGeometry> = arrays
            .iter()
            .map(|a| ArrayGeometry {
                positions: a.positions.iter().map(|p| -p).collect(),
                ..a.clone()
            })
            .collect();
        let dm = lma_steering_dictionary(&mirrored, &Vec3::zeros(), &g, 2345.0, 343.0);
        for (a, b) in d.matrix.iter().zip(dm.matrix.iter()) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn concat_stacks_blocks() {
        let g = icosphere(3);
        let h = hoa_dictionary(&g, 4);
        let l = lma_steering_dictionary(&default_lma_geometries(Vec3::zeros()), &Vec3::zeros(), &g, 1000.0, 343.0);
        let j = concat_dictionary(&h, &l, BlockWeights::default()).unwrap();
        assert_eq!((j.rows(), j.cols()), (57, 642));
        assert_eq!(j.matrix[(0, 0)], h.matrix[(0, 0)]);
        assert_eq!(j.matrix[(25, 7)], l.matrix[(0, 7)]);
    }

    #[test]
    fn concat_rejects_grid_mismatch() {
        let h = hoa_dictionary(&icosphere(2), 2);
        let l = lma_steering_dictionary(&default_lma_geometries(Vec3::zeros()), &Vec3::zeros(), &icosphere(1), 1000.0, 343.0);
        assert!(matches!(concat_dictionary(&h, &l, BlockWeights::default()), Err(Error::GridMismatch)));
    }
}
