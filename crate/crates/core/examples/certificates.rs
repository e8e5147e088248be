//! Dual certificates: optimality of the square-root measurement for the
//! plain pair resource, the bound F <= N/d² for any resource, and a protocol
//! that meets it when N <= d.

use pbt::certificates::{
    certify_orthogonal, certify_srm_optimal, certify_universal_upper, random_povm_check,
};
use pbt::protocol::PSD_TOL;

fn main() -> pbt::Result<()> {
    println!("square-root measurement, qubits:");
    for n in 1..=6 {
        let r = certify_srm_optimal(n, PSD_TOL)?;
        println!(
            "  N = {n}: passed {}, worst margin {:+.2e}, bound {:.10}",
            r.passed,
            r.worst_margin,
            r.bound.unwrap_or(f64::NAN)
        );
    }

    println!("random rotations of the measurement never do better:");
    let check = random_povm_check(3, 20, 7)?;
    println!("  SRM {:.10}, best of 20 rotated {:.10}", check.srm_fidelity, check.max_sampled);

    println!("F <= N/d²:");
    for (n, d) in [(2, 2), (3, 2), (2, 3), (3, 3)] {
        let r = certify_universal_upper(n, d, PSD_TOL)?;
        println!("  N = {n}, d = {d}: passed {}, bound {:.6}", r.passed, r.bound.unwrap_or(f64::NAN));
    }

    println!("separable resource reaching the bound:");
    for (n, d) in [(1, 2), (2, 2), (2, 3), (3, 3)] {
        let r = certify_orthogonal(n, d, PSD_TOL)?;
        println!("  N = {n}, d = {d}: passed {}, F = {:.6}", r.passed, r.bound.unwrap_or(f64::NAN));
    }
    Ok(())
}
