//! Synthetic union-of-subspaces benchmark and corruption models.
//!
//! Subspace bases are chained by one random rotation, `B_{i+1} = R B_i`, and
//! each block of samples is `X_i = B_i C_i` with standard normal `C_i`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::labels::LabelVector;
use crate::linalg::determinant;
use crate::matrix::{DataMatrix, Matrix};
use crate::spectral::Affinity;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub n_subspaces: usize,
    pub samples_per_subspace: usize,
    /// Variance of the additive entry-wise Gaussian noise.
    pub noise_variance: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            ambient_dim: 200,
            subspace_dim: 10,
            n_subspaces: 10,
            samples_per_subspace: 9,
            noise_variance: 0.1,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0 || self.subspace_dim == 0 || self.n_subspaces == 0 || self.samples_per_subspace == 0 {
            return Err(Error::InvalidArgument(
                "synthetic dimensions and counts must be positive".into(),
            ));
        }
        if self.subspace_dim > self.ambient_dim {
            return Err(Error::InvalidArgument(format!(
                "subspace dimension {} exceeds ambient dimension {}",
                self.subspace_dim, self.ambient_dim
            )));
        }
        if !self.noise_variance.is_finite() || self.noise_variance < 0.0 {
            return Err(Error::InvalidArgument(
                "noise variance must be a finite non-negative number".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorruptionKind {
    /// Additive noise; variance is on the 0-255 gray scale.
    Gaussian { variance_255: f64, clamp: bool },
    /// Replace this fraction of entries by uniform `[0, 1)` values.
    Pixel { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn apply(&self, x: &DataMatrix) -> Result<DataMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.kind {
            CorruptionKind::Gaussian { variance_255, clamp } => add_gaussian_noise(x, variance_255, clamp, &mut rng),
            CorruptionKind::Pixel { fraction } => corrupt_pixels(x, fraction, &mut rng),
        }
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    // filled row-major so the draw order matches the file layout
    let values: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_row_slice(rows, cols, &values)
}

/// `ambient x dim` matrix with orthonormal columns, from the QR factor of a
/// Gaussian matrix with the triangular diagonal made positive.
pub fn random_orthonormal_basis<R: Rng + ?Sized>(ambient: usize, dim: usize, rng: &mut R) -> Result<Matrix> {
    if dim == 0 || dim > ambient {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {dim} orthonormal columns in dimension {ambient}"
        )));
    }
    let g = gaussian_matrix(ambient, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// Uniformly random rotation (orthogonal with determinant +1).
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Matrix> {
    let mut q = random_orthonormal_basis(dim, dim, rng)?;
    if determinant(&q) < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok(q)
}

/// Subspace bases `B_1 .. B_k`.
pub fn subspace_bases<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<Vec<Matrix>> {
    spec.validate()?;
    let first = random_orthonormal_basis(spec.ambient_dim, spec.subspace_dim, rng)?;
    let rotation = random_rotation(spec.ambient_dim, rng)?;
    let mut bases = vec![first];
    for i in 1..spec.n_subspaces {
        let next = &rotation * &bases[i - 1];
        bases.push(next);
    }
    Ok(bases)
}

/// Data matrix `[X_1 .. X_k]` plus noise, and its subspace labels.
pub fn generate_subspaces(spec: &SynthSpec) -> Result<(DataMatrix, LabelVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bases = subspace_bases(spec, &mut rng)?;
    let m = spec.samples_per_subspace;
    let total = spec.n_subspaces * m;
    let mut x = Matrix::zeros(spec.ambient_dim, total);
    let mut labels = Vec::with_capacity(total);
    for (i, basis) in bases.iter().enumerate() {
        let coeffs = gaussian_matrix(spec.subspace_dim, m, &mut rng);
        x.columns_mut(i * m, m).copy_from(&(basis * coeffs));
        labels.extend(std::iter::repeat_n(i, m));
    }
    if spec.noise_variance > 0.0 {
        let sd = spec.noise_variance.sqrt();
        let noise = gaussian_matrix(spec.ambient_dim, total, &mut rng);
        x += noise * sd;
    }
    Ok((DataMatrix::new(x)?, LabelVector::from_truth(labels)?))
}

/// Adds i.i.d. normal noise with standard deviation `sqrt(variance_255) / 255`,
/// clamping the result to `[0, 1]` when `clamp` is set.
pub fn add_gaussian_noise<R: Rng + ?Sized>(
    x: &DataMatrix,
    variance_255: f64,
    clamp: bool,
    rng: &mut R,
) -> Result<DataMatrix> {
    if !variance_255.is_finite() || variance_255 < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance {variance_255} must be non-negative"
        )));
    }
    let sd = variance_255.sqrt() / 255.0;
    let noise = gaussian_matrix(x.rows(), x.cols(), rng);
    let mut out = x.as_matrix().clone();
    if sd > 0.0 {
        out += noise * sd;
    }
    if clamp {
        out.apply(|v| *v = v.clamp(0.0, 1.0));
    }
    DataMatrix::new(out)
}

/// Replaces exactly `floor(fraction * n * N)` distinct entries by uniform `[0, 1)` values.
pub fn corrupt_pixels<R: Rng + ?Sized>(x: &DataMatrix, fraction: f64, rng: &mut R) -> Result<DataMatrix> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "corruption fraction {fraction} outside [0, 1]"
        )));
    }
    let (rows, cols) = (x.rows(), x.cols());
    let total = rows * cols;
    // absorb representation error such as 0.7 * 10 = 7.000000000000001 or 0.29 * 100 = 28.999999999999996
    let count = ((fraction * total as f64 + 1e-9).floor() as usize).min(total);
    let mut out = x.as_matrix().clone();
    for idx in sample(rng, total, count).into_iter() {
        out[(idx / cols, idx % cols)] = rng.random::<f64>();
    }
    DataMatrix::new(out)
}

/// Share of affinity mass between samples of the same class.
pub fn block_diagonal_score(w: &Affinity, truth: &LabelVector) -> Result<f64> {
    let m = w.matrix();
    if m.nrows() != truth.len() {
        return Err(Error::LengthMismatch(m.nrows(), truth.len()));
    }
    let t = truth.as_slice();
    let mut inside = 0.0;
    let mut total = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            total += v;
            if t[i] == t[j] {
                inside += v;
            }
        }
    }
    Ok(if total > 0.0 { inside / total } else { 0.0 })
}
