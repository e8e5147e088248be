//! Spin-½ coupling: exact Clebsch–Gordan coefficients and the irreducible
//! basis of n qubits built by sequential coupling.

mod basis;
mod cg;

pub use basis::{
    allowed_two_j, coupling_paths, multiplicity, rebase_unitary, total_spin_operators,
    CoupledBasis, Rebase, SpinLabel, MAX_SPINS,
};
pub use cg::{cg_general, cg_half, cg_symmetry_check, CgValue, HalfSpin};
