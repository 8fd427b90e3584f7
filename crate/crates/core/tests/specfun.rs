use std::f64::consts::PI;

use hybridsr::specfun::{
    derivative_h2, derivative_j, derivative_y, mode_strength, sph_harm, sph_harm_all, spherical_bessel_j,
    spherical_bessel_y, spherical_hankel_h2, SphereKind,
};
use hybridsr::Complex64;
use proptest::prelude::*;

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

#[test]
fn sh_orthonormal_under_quadrature() {
    let order = 6;
    let nodes = gauss_legendre(12);
    let nphi = 24;
    let k = (order + 1) * (order + 1);
    let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
    for &(x, w) in &nodes {
        for j in 0..nphi {
            let phi = 2.0 * PI * j as f64 / nphi as f64;
            let y = sph_harm_all(order, x.acos(), phi);
            let wt = w * 2.0 * PI / nphi as f64;
            for a in 0..k {
                for b in 0..k {
                    gram[a * k + b] += y[a] * y[b].conj() * wt;
                }
            }
        }
    }
    for a in 0..k {
        for b in 0..k {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((gram[a * k + b] - want).norm() < 1e-8, "({a},{b}) {}", gram[a * k + b]);
        }
    }
}

#[test]
fn quadrature_oracle_integrates_polynomials() {
    let nodes = gauss_legendre(8);
    for p in 0..16 {
        let s: f64 = nodes.iter().map(|(x, w)| w * x.powi(p)).sum();
        let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
        assert!((s - want).abs() < 1e-14, "x^{p}: {s}");
    }
}

#[test]
fn sph_harm_all_matches_single_evaluations() {
    let (theta, phi) = (1.1, -0.4);
    let all = sph_harm_all(5, theta, phi);
    for n in 0..=5usize {
        for m in -(n as i32)..=n as i32 {
            let i = (n * n) as i32 + n as i32 + m;
            assert!((all[i as usize] - sph_harm(n, m, theta, phi).unwrap()).norm() < 1e-14);
        }
    }
}

#[test]
fn sh_low_order_closed_forms() {
    let (theta, phi): (f64, f64) = (0.8, 2.1);
    let y00 = sph_harm(0, 0, theta, phi).unwrap();
    assert!((y00.re - 0.5 / PI.sqrt()).abs() < 1e-15 && y00.im.abs() < 1e-15);
    let y10 = sph_harm(1, 0, theta, phi).unwrap();
    assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * theta.cos()).abs() < 1e-15);
    // Condon-Shortley phase on Y_1^1
    let y11 = sph_harm(1, 1, theta, phi).unwrap();
    let want = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * theta.sin(), phi);
    assert!((y11 - want).norm() < 1e-15);
}

#[test]
fn hankel_derivative_combines_parts() {
    for n in 0..6 {
        for &x in &[0.3, 2.0, 11.0] {
            let h = spherical_hankel_h2(n, x).unwrap();
            let dh = derivative_h2(n, x).unwrap();
            assert!((h - Complex64::new(spherical_bessel_j(n, x), -spherical_bessel_y(n, x).unwrap())).norm() < 1e-12);
            assert!((dh - Complex64::new(derivative_j(n, x), -derivative_y(n, x).unwrap())).norm() < 1e-12);
        }
    }
}

#[test]
fn rigid_sphere_exceeds_open_sphere_at_nulls() {
    // j_1 has its first zero near kr = 4.4934; the rigid response stays finite
    let kr = 4.493_409_457_909_064;
    let open = mode_strength(1, kr, SphereKind::Open, 1.0).unwrap();
    assert!(open.norm() < 1e-12);
    let rigid = mode_strength(1, kr, SphereKind::rigid(kr).unwrap(), 1.0).unwrap();
    assert!(rigid.norm() > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wronskian_holds(n in 0usize..=10, x in 0.1f64..100.0) {
        let w = spherical_bessel_j(n, x) * derivative_y(n, x).unwrap()
            - derivative_j(n, x) * spherical_bessel_y(n, x).unwrap();
        prop_assert!((w * x * x - 1.0).abs() <= 1e-8, "n={} x={} w*x^2={}", n, x, w * x * x);
    }

    #[test]
    fn addition_theorem_holds(theta in 0.0f64..PI, phi in -PI..PI, n in 0usize..=8) {
        let s: f64 = (-(n as i32)..=n as i32).map(|m| sph_harm(n, m, theta, phi).unwrap().norm_sqr()).sum();
        prop_assert!((s - (2 * n + 1) as f64 / (4.0 * PI)).abs() <= 1e-10);
    }

    #[test]
    fn open_mode_strength_is_bounded(n in 0usize..=12, kr in 0.0f64..80.0) {
        let b = mode_strength(n, kr, SphereKind::Open, 1.0).unwrap();
        prop_assert!(b.norm() <= 4.0 * PI * (1.0 + 1e-12));
    }

    #[test]
    fn conjugate_symmetry(theta in 0.0f64..PI, phi in -PI..PI, n in 0usize..=8, m in 0i32..=8) {
        prop_assume!(m as usize <= n);
        let pos = sph_harm(n, m, theta, phi).unwrap();
        let neg = sph_harm(n, -m, theta, phi).unwrap();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((neg - pos.conj() * sign).norm() < 1e-12);
    }

    #[test]
    fn derivatives_match_central_differences(n in 0usize..=8, x in 0.5f64..40.0) {
        let h = 1e-5 * x.max(1.0);
        let fd_j = (spherical_bessel_j(n, x + h) - spherical_bessel_j(n, x - h)) / (2.0 * h);
        let fd_y = (spherical_bessel_y(n, x + h).unwrap() - spherical_bessel_y(n, x - h).unwrap()) / (2.0 * h);
        let y_scale = spherical_bessel_y(n, x).unwrap().abs().max(1.0);
        prop_assert!((derivative_j(n, x) - fd_j).abs() <= 1e-6);
        prop_assert!((derivative_y(n, x).unwrap() - fd_y).abs() <= 1e-6 * y_scale.max(derivative_y(n, x).unwrap().abs()));
    }

    #[test]
    fn bessel_recurrence(n in 1usize..=9, x in 0.2f64..60.0) {
        let lhs = spherical_bessel_j(n - 1, x) + spherical_bessel_j(n + 1, x);
        let rhs = (2 * n + 1) as f64 / x * spherical_bessel_j(n, x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }
}
