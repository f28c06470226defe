//! The dense data matrix and spectral norm utilities.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// A finite, non-empty `n x N` matrix with one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(Matrix);

impl DataMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some(idx) = m.iter().position(|v| !v.is_finite()) {
            // column-major storage
            return Err(Error::NonFinite {
                row: idx % m.nrows(),
                col: idx / m.nrows(),
            });
        }
        Ok(DataMatrix(m))
    }

    /// Builds from row-major values.
    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension);
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {rows}x{cols}, found {}",
                rows * cols,
                values.len()
            )));
        }
        Self::new(Matrix::from_row_slice(rows, cols, values))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Values in row-major order.
    pub fn row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }
}

impl Deref for DataMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl TryFrom<Matrix> for DataMatrix {
    type Error = Error;

    fn try_from(m: Matrix) -> Result<Self> {
        DataMatrix::new(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixNorms {
    /// Largest singular value.
    pub operator: f64,
    pub frobenius: f64,
    /// Sum of singular values.
    pub nuclear: f64,
    pub numerical_rank: usize,
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Operator, Frobenius and nuclear norms plus the numerical rank.
///
/// Rank counts singular values above `max(rows, cols) * eps * sigma_max`.
/// Singular values come from a bidiagonal SVD: squaring the matrix into its
/// Gram form would put a floor of roughly `sqrt(eps) * sigma_max` under the
/// small singular values, far above that tolerance.
pub fn matrix_norms(m: &Matrix) -> MatrixNorms {
    let sv = singular_values(m);
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * sigma_max;
    MatrixNorms {
        operator: sigma_max,
        frobenius: m.norm(),
        nuclear: sv.iter().sum(),
        numerical_rank: sv.iter().filter(|&&s| s > tol).count(),
    }
}

pub fn numerical_rank(m: &Matrix) -> usize {
    matrix_norms(m).numerical_rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_norms() {
        let n = matrix_norms(&Matrix::identity(3, 3));
        assert!((n.operator - 1.0).abs() < 1e-14);
        assert!((n.frobenius - 3f64.sqrt()).abs() < 1e-14);
        assert!((n.nuclear - 3.0).abs() < 1e-13);
        assert_eq!(n.numerical_rank, 3);
    }

    #[test]
    fn zero_norms() {
        let n = matrix_norms(&Matrix::zeros(4, 2));
        assert_eq!(
            (n.operator, n.frobenius, n.nuclear, n.numerical_rank),
            (0.0, 0.0, 0.0, 0)
        );
    }

    #[test]
    fn data_matrix_rejects_nan_and_empty() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, f64::NAN, 4.0]);
        assert!(matches!(DataMatrix::new(m), Err(Error::NonFinite { row: 1, col: 0 })));
        assert!(matches!(
            DataMatrix::new(Matrix::zeros(0, 3)),
            Err(Error::EmptyDimension)
        ));
        assert!(matches!(
            DataMatrix::from_row_major(2, 2, &[1.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn row_major_roundtrip() {
        let d = DataMatrix::from_row_major(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(d[(0, 2)], 3.0);
        assert_eq!(d.row_major(), vec![1., 2., 3., 4., 5., 6.]);
    }
}
