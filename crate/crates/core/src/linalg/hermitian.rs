use super::eigen::{self, EigenDecomposition, HERMITIAN_TOL};
use super::tensor::{self, TensorSpace};
use super::CMatrix;
use crate::error::{Error, Result};

/// Dense Hermitian operator on a labeled tensor space.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    space: TensorSpace,
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates shape and Hermiticity (`1e-12 · max|entry|`); the stored
    /// matrix is the exact Hermitian part of the input.
    pub fn new(space: TensorSpace, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        if matrix.rows() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                got: matrix.rows(),
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL * matrix.max_abs() {
            return Err(Error::NotHermitian(defect));
        }
        Ok(HermitianOperator {
            space,
            matrix: matrix.hermitian_part(),
        })
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigh(&self) -> Result<EigenDecomposition<num_complex::Complex64>> {
        eigen::eigh(&self.matrix)
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<HermitianOperator> {
        let (m, s) = tensor::partial_trace(&self.matrix, &self.space, keep)?;
        Ok(HermitianOperator { space: s, matrix: m })
    }

    pub fn permute(&self, order: &[&str]) -> Result<HermitianOperator> {
        let (m, s) = tensor::permute(&self.matrix, &self.space, order)?;
        Ok(HermitianOperator { space: s, matrix: m })
    }

    /// `self ⊗ other`
    pub fn kron(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator {
            space: self.space.concat(&other.space)?,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    pub fn inv_sqrt_on_support(&self, rank_tol: f64) -> Result<HermitianOperator> {
        Ok(HermitianOperator {
            space: self.space.clone(),
            matrix: eigen::inv_sqrt_on_support(&self.matrix, rank_tol)?.hermitian_part(),
        })
    }

    pub fn psd_check(&self, tol: f64) -> Result<(bool, f64)> {
        eigen::psd_check(&self.matrix, tol)
    }
}
