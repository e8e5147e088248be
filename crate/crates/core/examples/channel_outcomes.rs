//! Teleports one state and lists what each port receives.

use pbt::channel::{Resource, Teleporter};
use pbt::linalg::{basis_vector, CMatrix, Complex64};
use pbt::protocol::{signal_states, srm_povm, Convention};

fn main() -> pbt::Result<()> {
    let n = 4;
    let states = signal_states(n, 2, Convention::Singlet)?;
    let povm = srm_povm(&states)?;
    let teleporter = Teleporter::new(&Resource::pairs(n, 2, Convention::Singlet), &povm)?;

    let input = CMatrix::projector(&basis_vector::<Complex64>(2, 0));
    let run = teleporter.teleport(&input, None)?;
    for o in &run.outcomes {
        println!(
            "port {}: p = {:.6}, ⟨0|ρ|0⟩ = {:.6}",
            o.index,
            o.probability,
            o.conditional_output[(0, 0)].re
        );
    }
    println!("average output ⟨0|Λ|0⟩ = {:.6}", run.average_output[(0, 0)].re);

    let report = teleporter.choi_fidelity(Convention::Singlet)?;
    println!("Choi-state fidelity F = {:.10}, f = {:.10}", report.entanglement_fidelity, report.average_fidelity);
    println!("{}", serde_json::to_string(&run.to_json())?);
    Ok(())
}
