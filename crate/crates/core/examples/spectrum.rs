//! The spectrum of ρ = Σ σ(i) from the two-branch formula, checked against
//! a dense diagonalization, plus the residual of every analytic eigenvector.
//!
//!     cargo run --example spectrum -- 6

use pbt::linalg::{eigh, norm};
use pbt::protocol::{rho_spectrum, signal_states, Convention, RhoEigenbasis};

fn main() -> pbt::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("port count"))
        .unwrap_or(5);

    let spectrum = rho_spectrum(n)?;
    println!("N = {n}: tr ρ = {}, total degeneracy {}", spectrum.trace(), spectrum.total_degeneracy());
    for e in &spectrum.entries {
        println!(
            "  λ{}  j = {:>4}  value {:.10}  degeneracy {}",
            e.branch,
            format!("{}/2", e.two_j),
            e.eigenvalue,
            e.degeneracy
        );
    }

    let states = signal_states(n, 2, Convention::Singlet)?;
    let rho = states.rho().matrix().real_part();
    let dense = eigh(&rho)?.eigenvalues;
    let worst = dense
        .iter()
        .zip(spectrum.sorted_eigenvalues())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("dense vs analytic eigenvalues: max |Δ| = {worst:.2e}");

    let basis = RhoEigenbasis::new(n)?;
    let mut residual = 0.0_f64;
    for label in basis.labels() {
        let v = basis.vector(&label)?;
        let lambda = basis.eigenvalue(&label);
        let r: Vec<f64> = rho.matvec(&v).iter().zip(&v).map(|(x, y)| x - lambda * y).collect();
        residual = residual.max(norm(&r));
    }
    println!("{} eigenvectors, max ‖ρΨ − λΨ‖ = {residual:.2e}", basis.labels().len());
    Ok(())
}
