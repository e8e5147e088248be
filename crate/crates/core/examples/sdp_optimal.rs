//! Optimizes resource and measurement together, then rebuilds the optimal
//! protocol from the solution and runs it through the channel simulator.

use pbt::channel::{Resource, Teleporter};
use pbt::protocol::{fidelity_closed_form, Convention};
use pbt::sdp::optimal_fidelity;

fn main() -> pbt::Result<()> {
    println!("{:>2} {:>12} {:>12} {:>10} {:>5} {:>12}", "N", "F_SDP", "F_SRM", "gap", "iter", "simulated");
    for n in 1..=4 {
        let start = std::time::Instant::now();
        let sol = optimal_fidelity(n, 2, false)?;
        let srm = fidelity_closed_form(n)?.entanglement_fidelity;
        let ex = sol.extract_resource()?;
        let resource = Resource::Operator {
            operator: ex.resource_operator,
            convention: Convention::Singlet,
        };
        let simulated = Teleporter::new(&resource, &ex.povm)?
            .choi_fidelity(Convention::Singlet)?
            .entanglement_fidelity;
        println!(
            "{n:>2} {:12.9} {srm:12.9} {:10.2e} {:>5} {simulated:12.9}   ({:.2}s)",
            sol.primal_value,
            sol.gap,
            sol.iterations,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
