//! Normalized-cut spectral clustering on learned coefficients.
//!
//! Affinity `W = (|Z| + |Z^T|) / 2`, symmetric normalized Laplacian
//! `I - D^-1/2 W D^-1/2`, the `k` eigenvectors of its smallest eigenvalues
//! with rows scaled to unit length, then k-means on those rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::labels::LabelVector;
use crate::linalg::{all_finite, sorted_symmetric_eigen};
use crate::matrix::Matrix;

const MAX_LLOYD_ITERS: usize = 300;

/// Symmetric, entry-wise non-negative `N x N` sample affinity.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinity(Matrix);

impl Affinity {
    /// Wraps an existing affinity after checking symmetry and non-negativity.
    pub fn new(w: Matrix) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::Shape(format!(
                "affinity must be square, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        let n = w.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = w[(i, j)];
                if v.is_nan() || v < 0.0 || v != w[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "affinity entry ({i}, {j}) = {v} breaks symmetry or sign"
                    )));
                }
            }
        }
        Ok(Affinity(w))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: LabelVector,
    /// `N x k` row-normalized spectral embedding.
    pub embedding: Matrix,
    pub kmeans_objective: f64,
    pub affinity: Affinity,
}

/// `W_ij = (|Z_ij| + |Z_ji|) / 2`.
pub fn build_affinity(z: &Matrix) -> Result<Affinity> {
    if !z.is_square() {
        return Err(Error::Shape(format!(
            "coefficients must be square, got {}x{}",
            z.nrows(),
            z.ncols()
        )));
    }
    let n = z.nrows();
    // Computing (|a| + |b|) / 2 with the same operand order for (i, j) and
    // (j, i) makes the result exactly symmetric.
    let w = Matrix::from_fn(n, n, |i, j| {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        (z[(lo, hi)].abs() + z[(hi, lo)].abs()) / 2.0
    });
    Ok(Affinity(w))
}

/// Symmetric normalized Laplacian; zero-degree rows get a zero `D^-1/2`.
pub fn normalized_laplacian(w: &Affinity) -> Matrix {
    let m = w.matrix();
    let n = m.nrows();
    let inv_sqrt: Vec<f64> = m
        .row_iter()
        .map(|row| {
            let d: f64 = row.iter().sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Matrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - inv_sqrt[i] * m[(i, j)] * inv_sqrt[j]
    })
}

/// Embedding from the eigenvectors of the `k` smallest Laplacian eigenvalues,
/// rows normalized to unit length. Isolated samples get a zero row.
pub fn spectral_embed(w: &Affinity, k: usize) -> Result<Matrix> {
    let n = w.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    if !all_finite(w.matrix()) {
        return Err(Error::Eigen("non-finite affinity"));
    }
    let lap = normalized_laplacian(w);
    let (_, vectors) = sorted_symmetric_eigen(&lap)?;
    let mut emb = vectors.columns(0, k).into_owned();
    for i in 0..n {
        let degree: f64 = w.matrix().row(i).sum();
        let norm = emb.row(i).norm();
        if degree > 0.0 && norm > 0.0 {
            emb.row_mut(i).unscale_mut(norm);
        } else {
            emb.row_mut(i).fill(0.0);
        }
    }
    Ok(emb)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: LabelVector,
    /// Within-cluster sum of squared distances to the cluster means.
    pub objective: f64,
    /// Objective after each assignment step of the winning restart.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LloydRun {
    pub labels: Vec<usize>,
    pub objective: f64,
    /// Objective after every assignment step.
    pub trace: Vec<f64>,
}

fn sq_dist(points: &Matrix, i: usize, centers: &Matrix, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centers.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Closest center; an exact tie keeps the current assignment, else the lowest index wins.
fn nearest(points: &Matrix, i: usize, centers: &Matrix, current: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.nrows() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 || (d == best.1 && c == current) {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = points.nrows();
    let mut centers = Matrix::zeros(k, points.ncols());
    centers.set_row(0, &points.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the final sum
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            rng.random_range(0..n)
        };
        centers.set_row(c, &points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

fn cluster_means(points: &Matrix, labels: &[usize], k: usize) -> (Matrix, Vec<usize>) {
    let mut centers = Matrix::zeros(k, points.ncols());
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let mut row = centers.row_mut(l);
        row += points.row(i);
    }
    for (c, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            centers.row_mut(c).unscale_mut(cnt as f64);
        }
    }
    (centers, counts)
}

fn wcss(points: &Matrix, labels: &[usize], k: usize) -> f64 {
    let (centers, _) = cluster_means(points, labels, k);
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(points, i, &centers, l))
        .sum()
}

pub(crate) fn lloyd(points: &Matrix, k: usize, seed: u64, stream: u64) -> LloydRun {
    let n = points.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut centers = plus_plus_seeds(points, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut trace: Vec<f64> = Vec::new();

    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(points, i, &centers, labels[i]);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            dists[i] = d;
        }
        let objective: f64 = dists.iter().sum();
        if let Some(&prev) = trace.last() {
            debug_assert!(
                objective <= prev + 1e-12 * prev.abs().max(1.0),
                "k-means objective increased"
            );
        }
        trace.push(objective);
        if !changed {
            break;
        }

        let (means, mut counts) = cluster_means(points, &labels, k);
        centers = means;
        // Refill empty clusters with the point farthest from its own centroid,
        // drawn from clusters that can spare one.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far = None;
            let mut far_d = f64::NEG_INFINITY;
            for i in 0..n {
                if counts[labels[i]] > 1 {
                    let d = sq_dist(points, i, &centers, labels[i]);
                    if d > far_d {
                        far_d = d;
                        far = Some(i);
                    }
                }
            }
            let i = far.expect("k <= N leaves a cluster with two or more points");
            counts[labels[i]] -= 1;
            labels[i] = c;
            counts[c] = 1;
            centers.set_row(c, &points.row(i));
        }
    }
    let objective = wcss(points, &labels, k);
    LloydRun {
        labels,
        objective,
        trace,
    }
}

/// k-means++ seeded Lloyd iterations, best of `restarts` runs. Restart `r`
/// draws from stream `r` of the generator seeded with `seed`, so nearby seeds
/// share no restarts. Ties go to the earliest restart.
pub fn kmeans(points: &Matrix, k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be positive".into()));
    }
    if !all_finite(points) {
        return Err(Error::InvalidArgument(
            "k-means input contains non-finite values".into(),
        ));
    }
    let runs: Vec<LloydRun> = (0..restarts as u64)
        .into_par_iter()
        .map(|r| lloyd(points, k, seed, r))
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.objective < best.objective {
            best = run;
        }
    }
    Ok(KMeansResult {
        labels: LabelVector::new(best.labels.clone(), k)?,
        objective: best.objective,
        trace: best.trace.clone(),
    })
}

/// Affinity, embedding and k-means in one step.
pub fn ncut_cluster(z: &Matrix, k: usize, seed: u64, restarts: usize) -> Result<ClusterResult> {
    let affinity = build_affinity(z)?;
    ncut_from_affinity(affinity, k, seed, restarts)
}

pub fn ncut_from_affinity(affinity: Affinity, k: usize, seed: u64, restarts: usize) -> Result<ClusterResult> {
    let embedding = spectral_embed(&affinity, k)?;
    let km = kmeans(&embedding, k, seed, restarts)?;
    Ok(ClusterResult {
        labels: km.labels,
        embedding,
        kmeans_objective: km.objective,
        affinity,
    })
}
