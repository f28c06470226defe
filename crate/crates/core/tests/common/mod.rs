#![allow(dead_code)]

use deeplrr::Matrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `|a - b|_F / max(|a|_F, |b|_F, tiny)`.
pub fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}
