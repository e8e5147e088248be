//! Dense complex linear algebra on labeled tensor-product spaces.

mod eigen;
mod hermitian;
mod json;
mod matrix;
mod random;
mod scalar;
mod tensor;

pub use eigen::{
    eigh, inv_sqrt_on_support, psd_check, sqrt_psd, support_projector, EigenDecomposition,
    DEFAULT_RANK_TOL, HERMITIAN_TOL,
};
pub use hermitian::HermitianOperator;
pub use json::MatrixJson;
pub use matrix::{basis_vector, inner, kron_vec, norm, CMatrix, Matrix, RMatrix};
pub use random::{random_density, random_ginibre, random_hermitian, random_pure_state, random_unitary};
pub use scalar::Scalar;
pub use tensor::{
    apply_left, apply_to_vector, conjugate_local, embed, partial_trace, permute, permute_vector,
    Factor, TensorSpace,
};

pub use num_complex::Complex64;
