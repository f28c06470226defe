//! Small dense kernels shared by the solver, the spectral step and the tests.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest absolute entry (the element-wise infinity norm).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Solves `system * X = rhs` for a symmetric positive-definite `system`.
pub fn spd_solve(system: DMatrix<f64>, rhs: &DMatrix<f64>, stage: &'static str) -> Result<DMatrix<f64>> {
    if !all_finite(&system) || !all_finite(rhs) {
        return Err(Error::LinearSolve(stage));
    }
    let chol = Cholesky::new(system).ok_or(Error::LinearSolve(stage))?;
    let x = chol.solve(rhs);
    if !all_finite(&x) {
        return Err(Error::LinearSolve(stage));
    }
    Ok(x)
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
///
/// Equal eigenvalues keep the solver's original order, so the output is
/// deterministic for a given input.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition of {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if !all_finite(m) {
        return Err(Error::Eigen("non-finite input"));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::Eigen("no convergence"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Determinant sign via LU; used to orient random rotations.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}
