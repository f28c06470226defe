mod common;

use common::max_abs;
use deeplrr::matrix::numerical_rank;
use deeplrr::synth::{add_gaussian_noise, corrupt_pixels, random_orthonormal_basis, random_rotation, subspace_bases};
use deeplrr::{generate_subspaces, DataMatrix, Matrix, SynthSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn clean(seed: u64) -> SynthSpec {
    SynthSpec {
        noise_variance: 0.0,
        seed,
        ..SynthSpec::default()
    }
}

#[test]
fn rotation_is_proper_and_isometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = random_rotation(200, &mut rng).unwrap();
    assert!(max_abs(&(r.transpose() * &r - Matrix::identity(200, 200))) <= 1e-12);
    assert!((r.clone().determinant() - 1.0).abs() <= 1e-9);
    let x = common::gaussian(200, 5, &mut rng);
    for c in 0..5 {
        let v = x.column(c);
        assert!(((&r * v).norm() - v.norm()).abs() <= 1e-10 * v.norm());
    }
}

#[test]
fn tall_basis_is_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let b = random_orthonormal_basis(200, 10, &mut rng).unwrap();
    assert_eq!(b.shape(), (200, 10));
    assert!(max_abs(&(b.transpose() * &b - Matrix::identity(10, 10))) <= 1e-12);
    assert!(random_orthonormal_basis(3, 4, &mut rng).is_err());
}

#[test]
fn rotated_bases_stay_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bases = subspace_bases(&SynthSpec::default(), &mut rng).unwrap();
    assert_eq!(bases.len(), 10);
    for b in &bases {
        assert!(max_abs(&(b.transpose() * b - Matrix::identity(10, 10))) <= 1e-10);
    }
}

#[test]
fn clean_blocks_have_full_sample_rank_and_are_independent() {
    let (x, truth) = generate_subspaces(&clean(4)).unwrap();
    assert_eq!((x.rows(), x.cols()), (200, 90));
    let block = |i: usize| x.columns(9 * i, 9).into_owned();
    for i in 0..10 {
        assert!(truth.as_slice()[9 * i..9 * i + 9].iter().all(|&l| l == i));
        assert_eq!(numerical_rank(&block(i)), 9);
        for j in i + 1..10 {
            let mut pair = Matrix::zeros(200, 18);
            pair.columns_mut(0, 9).copy_from(&block(i));
            pair.columns_mut(9, 9).copy_from(&block(j));
            assert_eq!(numerical_rank(&pair), 18, "blocks {i}, {j}");
        }
    }
}

#[test]
fn same_seed_same_bits() {
    let spec = SynthSpec {
        seed: 42,
        ..SynthSpec::default()
    };
    let (a, la) = generate_subspaces(&spec).unwrap();
    let (b, lb) = generate_subspaces(&spec).unwrap();
    assert_eq!(a.row_major(), b.row_major());
    assert_eq!(la, lb);
    let (c, _) = generate_subspaces(&SynthSpec { seed: 43, ..spec }).unwrap();
    assert_ne!(a.row_major(), c.row_major());
}

#[test]
fn additive_noise_has_the_requested_variance() {
    let noisy = SynthSpec {
        noise_variance: 0.1,
        ..clean(5)
    };
    let (x0, _) = generate_subspaces(&clean(5)).unwrap();
    let (x1, _) = generate_subspaces(&noisy).unwrap();
    let diff = x1.as_matrix() - x0.as_matrix();
    let n = diff.len() as f64;
    let mean = diff.sum() / n;
    let var = diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((var - 0.1).abs() <= 0.005, "variance {var}");
}

#[test]
fn gray_scale_noise_std() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let zero = DataMatrix::new(Matrix::zeros(100, 1000)).unwrap();
    let y = add_gaussian_noise(&zero, 255.0 * 255.0, false, &mut rng).unwrap();
    let n = 1e5;
    let mean = y.sum() / n;
    let std = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((std - 1.0).abs() <= 0.05, "std {std}");

    let half = DataMatrix::new(Matrix::from_element(50, 50, 0.5)).unwrap();
    let clamped = add_gaussian_noise(&half, 300.0, true, &mut rng).unwrap();
    assert!(clamped.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(add_gaussian_noise(&half, -1.0, false, &mut rng).is_err());
}

#[test]
fn pixel_corruption_replaces_the_forced_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let img = DataMatrix::new(Matrix::from_fn(32, 28, |i, j| 2.0 + (i * 28 + j) as f64)).unwrap();
    let out = corrupt_pixels(&img, 0.2, &mut rng).unwrap();
    let changed: Vec<f64> = img
        .iter()
        .zip(out.iter())
        .filter(|(a, b)| a != b)
        .map(|(_, b)| *b)
        .collect();
    assert_eq!(changed.len(), 179);
    assert!(changed.iter().all(|v| (0.0..1.0).contains(v)));

    let all = corrupt_pixels(&img, 1.0, &mut rng).unwrap();
    assert!(all.iter().all(|v| (0.0..1.0).contains(v)));
    assert_eq!(corrupt_pixels(&img, 0.0, &mut rng).unwrap(), img);
    assert!(corrupt_pixels(&img, 1.5, &mut rng).is_err());
}
