//! Port-based teleportation with qubit or qudit pair resources: the signal
//! states, the exact spectrum of their sum, the square-root measurement and
//! three independent ways to evaluate the entanglement fidelity.

mod blocks;
mod fidelity;
mod signals;
mod spectrum;
mod srm;

pub use blocks::{block_spins, c_coefficient, matrix_element_check, MatrixElementOracle, XiBasis};
pub use fidelity::{
    asymptotic_gap, average_fidelity, fidelity_blocks, fidelity_closed_form, fidelity_dense,
    FidelityMethod, FidelityReport, MAX_ANALYTIC_PORTS, MAX_DENSE_DIM,
};
pub(crate) use fidelity::check_resource_operator;
pub use signals::{
    ab_space, pair_projector, pair_state, port_labels, rho_recursive, sigma_y_on_b,
    signal_states, Convention, SignalStateSet, MAX_SIGNAL_DIM,
};
pub(crate) use signals::{check_ports, checked_dim};
pub use spectrum::{
    psi_eigenvector, rho_eigenvalue, rho_spectrum, Branch, PsiLabel, RhoEigenbasis, RhoSpectrum,
    SpectrumEntry,
};
pub use srm::{srm_parts, srm_povm, Povm, SrmParts, COMPLETENESS_TOL, PSD_TOL};
