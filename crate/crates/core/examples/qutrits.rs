//! Qutrit port-based teleportation: square-root measurement fidelity
//! against the bounds 1 − d(d−1)/N <= f and F <= N/d².

use pbt::protocol::{fidelity_dense, signal_states, srm_povm, Convention};

fn main() -> pbt::Result<()> {
    let d = 3;
    for n in 1..=4 {
        let states = signal_states(n, d, Convention::PhiPlus)?;
        let povm = srm_povm(&states)?;
        let r = fidelity_dense(&states, &povm, None)?;
        let lower = 1.0 - (d * (d - 1)) as f64 / n as f64;
        println!(
            "N = {n}: F = {:.8} (<= {:.6}), f = {:.8}, lower bound {}",
            r.entanglement_fidelity,
            n as f64 / 9.0,
            r.average_fidelity,
            if lower > 0.0 { format!("{lower:.4}") } else { "vacuous".into() }
        );
    }
    Ok(())
}
