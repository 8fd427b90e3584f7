use hybridsr::dictionary::{hoa_dictionary, BlockWeights, Dictionary};
use hybridsr::geometry::{default_lma_geometries, icosphere, DirectionGrid, Vec3};
use hybridsr::pipeline::{
    energy_map, fuse, project_to_lma, reconstruct, refine_with_residue, residue, sr_joint_onestep, sr_sma,
    LmaDictionaries, Method, PipelineConfig, ReconstructionSetup, SparseCoeffs,
};
use hybridsr::sigproc::TfTensor;
use hybridsr::{Complex64, Error};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const FRAMES: usize = 6;

struct Fixture {
    grid: DirectionGrid,
    d_hoa: Dictionary,
    d_lma: LmaDictionaries,
    bins: Vec<usize>,
    layout: TfTensor,
    cfg: PipelineConfig,
}

fn fixture() -> Fixture {
    let grid = icosphere(2);
    let d_hoa = hoa_dictionary(&grid, 4);
    let layout = TfTensor::zeros(1, FRAMES, 16000.0, 1024, 512);
    let cfg = PipelineConfig {
        bin_stride: 40,
        ..PipelineConfig::default()
    };
    let bins = cfg.processed_bins(&layout);
    let d_lma = LmaDictionaries::build(&default_lma_geometries(Vec3::zeros()), &Vec3::zeros(), &grid, &layout, &bins, 343.0);
    Fixture {
        grid,
        d_hoa,
        d_lma,
        bins,
        layout,
        cfg,
    }
}

/// Coefficients with Gaussian rows on `support` in every processed bin.
fn sparse_truth(fx: &Fixture, support: &[usize], seed: u64) -> SparseCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = SparseCoeffs::zeros(fx.grid.id(), fx.grid.len(), FRAMES, fx.bins.clone());
    for m in &mut x.data {
        for &j in support {
            for t in 0..FRAMES {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                m[(j, t)] = Complex64::new(re, im);
            }
        }
    }
    x
}

fn hoa_observations(fx: &Fixture, x: &SparseCoeffs) -> TfTensor {
    let mut b = fx.layout.zeros_like(fx.d_hoa.rows());
    for (f, m) in x.bins.iter().zip(&x.data) {
        b.set_bin_matrix(*f, &(&fx.d_hoa.matrix * m));
    }
    b
}

fn top(e: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| e[b].total_cmp(&e[a]));
    let mut t = order[..k].to_vec();
    t.sort_unstable();
    t
}

#[test]
fn consistent_lma_data_leaves_no_residue() {
    let fx = fixture();
    let x = sparse_truth(&fx, &[10, 90], 1);
    let b_lma = project_to_lma(&x, &fx.d_lma, &fx.layout).unwrap();
    let rr = refine_with_residue(x.clone(), &b_lma, &fx.d_lma, &fx.cfg).unwrap();
    assert_eq!(rr.b_proj, b_lma);
    assert!(rr.b_res.norm_sqr() == 0.0);
    assert!(rr.x_res.norm_sqr() == 0.0);
    assert_eq!(rr.fused, x);
}

#[test]
fn all_methods_recover_dictionary_consistent_scenes() {
    let fx = fixture();
    let support = [25, 140];
    let x = sparse_truth(&fx, &support, 2);
    let b_hoa = hoa_observations(&fx, &x);
    let b_lma = project_to_lma(&x, &fx.d_lma, &fx.layout).unwrap();
    let setup = ReconstructionSetup {
        grid: &fx.grid,
        d_hoa: &fx.d_hoa,
        d_lma: &fx.d_lma,
        cfg: &fx.cfg,
    };
    let maps = reconstruct(&Method::ALL, &b_hoa, &b_lma, &setup).unwrap();
    assert_eq!(maps.iter().map(|m| m.0).collect::<Vec<_>>(), Method::ALL.to_vec());
    for (m, map) in &maps {
        assert_eq!(top(&map.energy, 2), support.to_vec(), "{}", m.name());
        let share: f64 = support.iter().map(|&j| map.energy[j]).sum::<f64>() / map.total();
        assert!(share > 0.99, "{} share {share}", m.name());
    }
}

#[test]
fn zero_lma_weight_reduces_joint_to_sma_only() {
    let fx = fixture();
    let x = sparse_truth(&fx, &[3, 77, 150], 3);
    let mut b_hoa = hoa_observations(&fx, &x);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for v in b_hoa.data_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        *v += Complex64::new(0.05 * re, 0.0);
    }
    let b_lma = project_to_lma(&sparse_truth(&fx, &[5, 9], 5), &fx.d_lma, &fx.layout).unwrap();
    let cfg = PipelineConfig {
        block_weights: BlockWeights { hoa: 1.0, lma: 0.0 },
        ..fx.cfg
    };
    let joint = sr_joint_onestep(&b_hoa, &b_lma, &fx.d_hoa, &fx.d_lma, &cfg).unwrap();
    let sma = sr_sma(&b_hoa, &fx.d_hoa, &fx.bins, &cfg).unwrap();
    let diff: f64 = joint
        .data
        .iter()
        .zip(&sma.data)
        .map(|(a, b)| (a - b).norm_squared())
        .sum::<f64>()
        .sqrt();
    assert!(diff <= 1e-9 * sma.norm_sqr().sqrt(), "{diff}");
}

#[test]
fn out_of_band_bins_do_not_contribute() {
    let fx = fixture();
    let x = sparse_truth(&fx, &[40], 6);
    let mut b_hoa = hoa_observations(&fx, &x);
    // energy outside the processing band
    let stray = DMatrix::from_fn(fx.d_hoa.rows(), FRAMES, |i, _| fx.d_hoa.matrix[(i, 120)] * 100.0);
    b_hoa.set_bin_matrix(5, &stray);
    b_hoa.set_bin_matrix(400, &stray);
    let est = sr_sma(&b_hoa, &fx.d_hoa, &fx.bins, &fx.cfg).unwrap();
    assert!(est.bins.iter().all(|&f| (300.0..=4000.0).contains(&fx.layout.bin_freq(f))));
    let map = energy_map(&est);
    assert!(map.energy[120] < 1e-9 * map.total());
    assert_eq!(top(&map.energy, 1), vec![40]);
}

#[test]
fn energy_map_sums_over_frames_and_bins() {
    let fx = fixture();
    let x = sparse_truth(&fx, &[1, 2], 7);
    let map = energy_map(&x);
    let want: f64 = x.data.iter().map(|m| (0..FRAMES).map(|t| m[(1, t)].norm_sqr()).sum::<f64>()).sum();
    assert!((map.energy[1] - want).abs() < 1e-12 * want);
    assert!((map.total() - x.norm_sqr()).abs() < 1e-9 * x.norm_sqr());
}

#[test]
fn shape_and_grid_mismatches_are_errors() {
    let fx = fixture();
    let x = sparse_truth(&fx, &[1], 8);
    let other = icosphere(1);
    let y = SparseCoeffs::zeros(other.id(), other.len(), FRAMES, fx.bins.clone());
    assert!(matches!(fuse(&x, &y), Err(Error::GridMismatch)));
    assert!(matches!(project_to_lma(&y, &fx.d_lma, &fx.layout), Err(Error::GridMismatch)));
    let a = fx.layout.zeros_like(32);
    let b = fx.layout.zeros_like(31);
    assert!(residue(&a, &b).is_err());
    let wrong = fx.layout.zeros_like(16);
    assert!(sr_sma(&wrong, &fx.d_hoa, &fx.bins, &fx.cfg).is_err());
    let z = SparseCoeffs::zeros(fx.grid.id(), fx.grid.len(), FRAMES, vec![fx.bins[0]]);
    assert!(fuse(&x, &z).is_err());
}
