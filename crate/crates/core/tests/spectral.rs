mod common;

use deeplrr::linalg::sorted_symmetric_eigen;
use deeplrr::spectral::normalized_laplacian;
use deeplrr::{accuracy, build_affinity, kmeans, ncut_cluster, spectral_embed, Affinity, Matrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random graph made of `k` dense components in shuffled vertex order.
fn component_graph(rng: &mut ChaCha8Rng) -> (Matrix, Vec<usize>) {
    let k = rng.random_range(2..=6);
    let mut labels = Vec::new();
    for c in 0..k {
        let size = rng.random_range(2..=8);
        labels.extend(std::iter::repeat_n(c, size));
    }
    labels.shuffle(rng);
    let n = labels.len();
    let mut z = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] && i != j {
                z[(i, j)] = rng.random_range(0.1..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            }
        }
    }
    (z, labels)
}

#[test]
fn components_are_recovered_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let (z, truth) = component_graph(&mut rng);
        let k = truth.iter().max().unwrap() + 1;
        let res = ncut_cluster(&z, k, case, 10).unwrap();
        assert_eq!(accuracy(&truth, res.labels.as_slice()).unwrap(), 1.0, "case {case}");
    }
}

#[test]
fn block_embedding_is_piecewise_constant() {
    let sizes = [4usize, 3, 5];
    let n: usize = sizes.iter().sum();
    let mut w = Matrix::zeros(n, n);
    let mut block = Vec::new();
    let mut start = 0;
    for (b, &s) in sizes.iter().enumerate() {
        for i in start..start + s {
            for j in start..start + s {
                w[(i, j)] = 1.0;
            }
            block.push(b);
        }
        start += s;
    }
    let w = Affinity::new(w).unwrap();
    let (values, _) = sorted_symmetric_eigen(&normalized_laplacian(&w)).unwrap();
    for &v in values.iter().take(3) {
        assert!(v.abs() <= 1e-8, "{v}");
    }
    let emb = spectral_embed(&w, 3).unwrap();
    for i in 0..n {
        assert!((emb.row(i).norm() - 1.0).abs() <= 1e-12);
        for j in 0..n {
            let dot = emb.row(i).dot(&emb.row(j));
            if block[i] == block[j] {
                assert!((dot - 1.0).abs() <= 1e-8);
            } else {
                assert!(dot.abs() <= 1e-8);
            }
        }
    }
}

/// `I - D^-1/2 W D^-1/2`, entry by entry.
fn laplacian_oracle(w: &Matrix) -> Matrix {
    let n = w.nrows();
    let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    let inv = |x: f64| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 };
    Matrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - inv(d[i]) * w[(i, j)] * inv(d[j])
    })
}

#[test]
fn laplacian_spectrum_lies_in_zero_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let n = rng.random_range(1..25);
        let density = rng.random_range(0.05..1.0);
        let z = Matrix::from_fn(n, n, |_, _| {
            if rng.random_bool(density) {
                rng.random_range(-2.0..2.0)
            } else {
                0.0
            }
        });
        let w = build_affinity(&z).unwrap();
        let l = normalized_laplacian(&w);
        let oracle = laplacian_oracle(w.matrix());
        assert!((&l - &oracle).abs().max() <= 1e-14, "case {case}");
        let values = nalgebra::SymmetricEigen::new(oracle).eigenvalues;
        for v in values.iter() {
            assert!(*v >= -1e-9 && *v <= 2.0 + 1e-9, "case {case}: {v}");
        }
    }
}

fn wcss(points: &Matrix, labels: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut mean = points.row(members[0]).clone_owned() * 0.0;
        for &i in &members {
            mean += points.row(i);
        }
        mean /= members.len() as f64;
        total += members
            .iter()
            .map(|&i| (points.row(i) - &mean).norm_squared())
            .sum::<f64>();
    }
    total
}

/// Smallest within-cluster scatter over every split into two non-empty parts.
fn best_two_partition(points: &Matrix) -> f64 {
    let n = points.nrows();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
        best = best.min(wcss(points, &labels, 2));
    }
    best
}

#[test]
fn kmeans_matches_brute_force_on_two_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..50 {
        let n = rng.random_range(4..=12);
        let split = rng.random_range(1..n);
        let points = Matrix::from_fn(n, 2, |i, _| {
            let centre = if i < split { -5.0 } else { 5.0 };
            centre + rng.random_range(-1.0..1.0)
        });
        let res = kmeans(&points, 2, case, 5).unwrap();
        let best = best_two_partition(&points);
        assert!((res.objective - best).abs() <= 1e-9 * best.max(1.0), "case {case}");
        let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= split)).collect();
        assert_eq!(accuracy(&truth, res.labels.as_slice()).unwrap(), 1.0);
    }
}

#[test]
fn kmeans_never_beats_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..50 {
        let n = rng.random_range(3..=10);
        let points = Matrix::from_fn(n, 3, |_, _| rng.random_range(-1.0..1.0));
        let res = kmeans(&points, 2, case, 20).unwrap();
        let best = best_two_partition(&points);
        assert!(res.objective >= best - 1e-12);
        assert!((res.objective - wcss(&points, res.labels.as_slice(), 2)).abs() <= 1e-12);
        for w in res.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn affinity_is_symmetric_and_non_negative(n in 1usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = common::gaussian(n, n, &mut rng);
        let w = build_affinity(&z).unwrap();
        let m = w.matrix();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m[(i, j)], m[(j, i)]);
                prop_assert!(m[(i, j)] >= 0.0);
                prop_assert_eq!(m[(i, j)], (z[(i, j)].abs() + z[(j, i)].abs()) / 2.0);
            }
        }
    }
}
