use hybridsr::dictionary::hoa_dictionary;
use hybridsr::geometry::{angular_distance, icosphere};
use hybridsr::irls::{
    diffuseness, irls_solve, lambda_from_diffuseness, row_energies, trace_csv, IrlsConfig, LambdaRange,
};
use hybridsr::sigproc::TfTensor;
use hybridsr::{Complex64, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// `B = D[:, support] S` with Gaussian `S`.
fn observe(d: &DMatrix<Complex64>, support: &[usize], frames: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let s = DMatrix::from_fn(support.len(), frames, |_, _| cgauss(rng));
    let cols = DMatrix::from_fn(d.nrows(), support.len(), |i, k| d[(i, support[k])]);
    cols * s
}

fn separated_support(k: usize, min_deg: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let g = icosphere(3);
    let mut out: Vec<usize> = Vec::new();
    while out.len() < k {
        let j = rng.random_range(0..g.len());
        if out
            .iter()
            .all(|&s| angular_distance(&g.direction(s), &g.direction(j)).to_degrees() >= min_deg)
        {
            out.push(j);
        }
    }
    out
}

fn top_k(e: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| e[b].total_cmp(&e[a]));
    let mut top = order[..k].to_vec();
    top.sort_unstable();
    top
}

fn rel_residual(d: &DMatrix<Complex64>, x: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (d * x - b).norm() / b.norm()
}

#[test]
fn single_direction_is_recovered_exactly() {
    let d = hoa_dictionary(&icosphere(3), 4).matrix;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let b = observe(&d, &[321], 6, &mut rng);
    let sol = irls_solve(&b, &d, &IrlsConfig::default(), 1e-10).unwrap();
    let e = sol.row_energies();
    let total: f64 = e.iter().sum();
    assert!(e[321] / total >= 0.999, "share {}", e[321] / total);
    assert!(rel_residual(&d, &sol.x, &b) <= 1e-6);
}

#[test]
fn feasible_with_vanishing_lambda() {
    let d = hoa_dictionary(&icosphere(3), 4).matrix;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 1..=4 {
        let support = separated_support(k, 30.0, &mut rng);
        let b = observe(&d, &support, 10, &mut rng);
        let sol = irls_solve(&b, &d, &IrlsConfig::default(), 1e-12).unwrap();
        assert!(rel_residual(&d, &sol.x, &b) <= 1e-6, "k={k}");
    }
}

#[test]
fn objective_is_non_increasing_for_fixed_p() {
    let d = hoa_dictionary(&icosphere(2), 4).matrix;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut b = observe(&d, &[5, 80, 140], 12, &mut rng);
    for v in b.iter_mut() {
        *v += cgauss(&mut rng) * 0.05;
    }
    let cfg = IrlsConfig {
        trace: true,
        convergence_tol: 0.0,
        ..IrlsConfig::default()
    };
    let sol = irls_solve(&b, &d, &cfg, 1e-2).unwrap();
    assert_eq!(sol.trace.len(), cfg.max_iters);
    for w in sol.trace.windows(2) {
        if w[0].p == w[1].p {
            assert!(
                w[1].objective <= w[0].objective + 1e-9 * w[0].objective.abs(),
                "iteration {}: {} -> {}",
                w[1].iteration,
                w[0].objective,
                w[1].objective
            );
        }
    }
    assert!(sol.trace.iter().take(10).all(|r| r.p == 1.0));
    assert!(sol.trace.iter().skip(10).all(|r| r.p == 0.7));
    let csv = trace_csv(&sol.trace);
    assert!(csv.starts_with("iteration,p,epsilon,objective,residual,active\n"));
    assert_eq!(csv.lines().count(), cfg.max_iters + 1);
}

#[test]
fn three_sources_in_noise_monte_carlo() {
    // 3 on-grid sources >= 30 deg apart, 20 frames, 30 dB SNR
    let d = hoa_dictionary(&icosphere(3), 4).matrix;
    let lambda = lambda_from_diffuseness(0.5, 1.0, LambdaRange::default());
    let mut hits = 0;
    for trial in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
        let support = separated_support(3, 30.0, &mut rng);
        let clean = observe(&d, &support, 20, &mut rng);
        let sigma = (clean.norm_squared() / (clean.len() as f64) / 1e3 / 2.0).sqrt();
        let b = clean.map(|v| v + cgauss(&mut rng) * sigma);
        let x = irls_solve(&b, &d, &IrlsConfig::default(), lambda).unwrap().x;
        let mut want = support.clone();
        want.sort_unstable();
        if top_k(&row_energies(&x), 3) == want {
            hits += 1;
        }
    }
    assert!(hits >= 48, "{hits}/50");
}

#[test]
fn singular_system_retries_with_larger_lambda() {
    let row = DMatrix::from_fn(1, 6, |_, j| Complex64::new(1.0 + j as f64, 0.0));
    let d = DMatrix::from_fn(2, 6, |_, j| row[(0, j)]);
    let b = DMatrix::from_element(2, 1, Complex64::new(1.0, 0.0));
    let sol = irls_solve(&b, &d, &IrlsConfig::default(), 0.0).unwrap();
    assert!(sol.status.retried);
    assert!(sol.x.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
}

#[test]
fn invalid_inputs_are_errors() {
    let d = DMatrix::from_element(2, 4, Complex64::new(1.0, 0.0));
    let mut b = DMatrix::from_element(2, 1, Complex64::new(1.0, 0.0));
    assert!(matches!(irls_solve(&b, &d, &IrlsConfig::default(), -1.0), Err(Error::Argument(_))));
    b[(0, 0)] = Complex64::new(f64::INFINITY, 0.0);
    assert!(matches!(irls_solve(&b, &d, &IrlsConfig::default(), 0.1), Err(Error::NonFinite(_))));
    let bad = IrlsConfig {
        p: 1.5,
        ..IrlsConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = IrlsConfig {
        max_iters: 5,
        ..IrlsConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = IrlsConfig {
        epsilon_init: 0.0,
        ..IrlsConfig::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn lambda_override_wins() {
    let d = hoa_dictionary(&icosphere(1), 2).matrix;
    let b = DMatrix::from_fn(9, 2, |i, t| d[(i, 3)] * (t as f64 + 1.0));
    let cfg = IrlsConfig {
        lambda_override: Some(0.25),
        ..IrlsConfig::default()
    };
    assert_eq!(irls_solve(&b, &d, &cfg, 1e-6).unwrap().status.lambda, 0.25);
}

fn hoa_tensor(columns: &[(usize, Vec<Complex64>)], d: &DMatrix<Complex64>) -> TfTensor {
    let frames = columns[0].1.len();
    let mut t = TfTensor::zeros(d.nrows(), frames, 16000.0, 1024, 512);
    for (j, s) in columns {
        for (k, v) in s.iter().enumerate() {
            for ch in 0..d.nrows() {
                let cur = t.get(ch, k, 100);
                t.set(ch, k, 100, cur + d[(ch, *j)] * v);
            }
        }
    }
    t
}

#[test]
fn diffuseness_of_single_plane_wave_is_small() {
    let g = icosphere(3);
    let d = hoa_dictionary(&g, 1).matrix;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for j in [0, 77, 400, 641] {
        let s: Vec<Complex64> = (0..10).map(|_| cgauss(&mut rng)).collect();
        let t = hoa_tensor(&[(j, s)], &d);
        let psi = diffuseness(&t, 0..10, &[100]).unwrap();
        assert!(!psi.silent);
        assert!(psi.psi <= 0.05, "direction {j}: {}", psi.psi);
    }
}

#[test]
fn diffuseness_of_isotropic_field_is_large() {
    let g = icosphere(3);
    let d = hoa_dictionary(&g, 1).matrix;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let frames = 64;
    let cols: Vec<(usize, Vec<Complex64>)> = (0..g.len())
        .map(|j| (j, (0..frames).map(|_| cgauss(&mut rng)).collect()))
        .collect();
    let t = hoa_tensor(&cols, &d);
    let psi = diffuseness(&t, 0..frames, &[100]).unwrap();
    assert!(psi.psi >= 0.9, "{}", psi.psi);
}

#[test]
fn diffuseness_needs_first_order() {
    let t = TfTensor::zeros(1, 2, 16000.0, 1024, 512);
    assert!(diffuseness(&t, 0..2, &[3]).is_err());
    let t = TfTensor::zeros(4, 2, 16000.0, 1024, 512);
    let psi = diffuseness(&t, 0..2, &[3]).unwrap();
    assert!(psi.silent && psi.psi == 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scale_equivariance(alpha in 1e-3f64..1e3, seed in 0u64..1000) {
        let d = hoa_dictionary(&icosphere(2), 4).matrix;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = observe(&d, &[7, 90], 8, &mut rng);
        for v in b.iter_mut() {
            *v += cgauss(&mut rng) * 0.1;
        }
        let lambda = lambda_from_diffuseness(0.3, 1.0, LambdaRange::default());
        let x = irls_solve(&b, &d, &IrlsConfig::default(), lambda).unwrap().x;
        let xa = irls_solve(&(&b * Complex64::from(alpha)), &d, &IrlsConfig::default(), lambda).unwrap().x;
        let diff = (&xa - &x * Complex64::from(alpha)).norm() / (alpha * x.norm());
        prop_assert!(diff < 1e-8, "relative difference {}", diff);
    }

    #[test]
    fn permutation_equivariance(seed in 0u64..1000) {
        let d = hoa_dictionary(&icosphere(2), 4).matrix;
        let n = d.ncols();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = observe(&d, &[12, 100, 150], 6, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let dp = DMatrix::from_fn(d.nrows(), n, |i, j| d[(i, perm[j])]);
        let lambda = 1e-3;
        let x = irls_solve(&b, &d, &IrlsConfig::default(), lambda).unwrap().x;
        let xp = irls_solve(&b, &dp, &IrlsConfig::default(), lambda).unwrap().x;
        let mut worst = 0.0f64;
        for j in 0..n {
            for t in 0..b.ncols() {
                worst = worst.max((xp[(j, t)] - x[(perm[j], t)]).norm());
            }
        }
        prop_assert!(worst / x.norm() < 1e-8, "{}", worst / x.norm());
    }
}
