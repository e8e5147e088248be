//! Exact Clebsch–Gordan coefficients for adding a spin-½, and the coupled
//! basis of n qubits labelled by coupling paths.

use pbt::su2::{cg_half, coupling_paths, multiplicity, CoupledBasis, HalfSpin};

fn main() -> pbt::Result<()> {
    println!("⟨j1 m1; ½ ±½ | j m⟩ for j1 = 1:");
    for two_m1 in [-2, 0, 2] {
        for spin in HalfSpin::BOTH {
            for two_j in [1, 3] {
                let c = cg_half(2, two_m1, spin, two_j)?;
                if !c.is_zero() {
                    println!("  m1 = {two_m1}/2, m2 = {}/2, j = {two_j}/2: {c}", spin.two_m());
                }
            }
        }
    }

    let n = 4;
    println!("multiplicities for {n} qubits:");
    for two_j in [0, 2, 4] {
        println!("  j = {two_j}/2: {} paths {:?}", multiplicity(n, two_j)?, coupling_paths(n, two_j));
    }

    let basis = CoupledBasis::build(n)?;
    let u = basis.to_matrix();
    let defect = u.transpose().matmul(&u).max_abs_diff(&pbt::linalg::RMatrix::identity(u.cols()));
    println!("{} basis vectors, orthonormality defect {defect:.2e}", basis.len());
    Ok(())
}
