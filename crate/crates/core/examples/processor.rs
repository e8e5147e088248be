//! A programmable processor: apply ε to every port of the resource, then
//! teleport. For trace-preserving ε the output is ε applied to the
//! teleported state.

use pbt::channel::{monotonicity_check, ProgramOperation, Processor, Resource};
use pbt::linalg::{basis_vector, random_pure_state, random_unitary, CMatrix, Complex64};
use pbt::protocol::{signal_states, srm_povm, Convention};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pbt::Result<()> {
    let n = 3;
    let states = signal_states(n, 2, Convention::Singlet)?;
    let povm = srm_povm(&states)?;
    let processor = Processor::new(&Resource::pairs(n, 2, Convention::Singlet), &povm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let u = random_unitary(2, &mut rng);
    let program = ProgramOperation::unitary(u.clone())?;
    let input = CMatrix::projector(&random_pure_state(2, &mut rng));
    let run = processor.execute(&program, &input)?;
    let direct = processor.teleporter().channel(&input)?.conjugate_by(&u);
    println!("unitary program: |output − UΛ(χ)U†| = {:.2e}", run.output.max_abs_diff(&direct));

    let filter = ProgramOperation::projector(&basis_vector::<Complex64>(2, 0))?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CMatrix::projector(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]);
    let run = processor.execute(&filter, &plus)?;
    println!(
        "filtering onto |0⟩ from |+⟩: success probability {:.6}, output ⟨0|ρ|0⟩ = {:.6}",
        run.success_probability,
        run.output[(0, 0)].re
    );

    let inputs: Vec<_> = (0..5).map(|_| random_pure_state(2, &mut rng)).collect();
    let report = monotonicity_check(processor.teleporter(), &ProgramOperation::depolarizing(2), &inputs)?;
    for e in &report.entries {
        println!("depolarized: f = {:.6} >= {:.6}", e.processed, e.plain);
    }
    Ok(())
}
