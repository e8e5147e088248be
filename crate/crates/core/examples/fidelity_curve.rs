//! Fidelity of qubit port-based teleportation against the number of ports,
//! evaluated three independent ways.
//!
//!     cargo run --example fidelity_curve -- 12

use pbt::protocol::{
    asymptotic_gap, fidelity_blocks, fidelity_closed_form, fidelity_dense, signal_states,
    srm_povm, Convention,
};

fn main() -> pbt::Result<()> {
    let n_max: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("port count"))
        .unwrap_or(12);

    println!("{:>3} {:>14} {:>14} {:>14} {:>10} {:>9}", "N", "F closed", "F blocks", "F dense", "f", "2N(1-f)");
    for n in 1..=n_max {
        let closed = fidelity_closed_form(n)?;
        let blocks = fidelity_blocks(n)?;
        // the dense route builds 2^(N+1)-dimensional operators
        let dense = if n <= 6 {
            let states = signal_states(n, 2, Convention::Singlet)?;
            let povm = srm_povm(&states)?;
            format!("{:14.10}", fidelity_dense(&states, &povm, None)?.entanglement_fidelity)
        } else {
            format!("{:>14}", "-")
        };
        let marker = if closed.average_fidelity > 2.0 / 3.0 { "" } else { "  (below 2/3)" };
        println!(
            "{n:>3} {:14.10} {:14.10} {dense} {:10.6} {:9.5}{marker}",
            closed.entanglement_fidelity,
            blocks.entanglement_fidelity,
            closed.average_fidelity,
            asymptotic_gap(n)?,
        );
    }
    Ok(())
}
