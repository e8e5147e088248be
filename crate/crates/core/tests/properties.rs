//! Randomized invariants across the workbench.

use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pbt::channel::{ProgramOperation, Processor, Resource, Teleporter};
use pbt::linalg::{
    eigh, inv_sqrt_on_support, partial_trace, random_density, random_ginibre, random_hermitian,
    random_unitary, support_projector, CMatrix, TensorSpace,
};
use pbt::protocol::{
    fidelity_closed_form, fidelity_dense, sigma_y_on_b, signal_states, srm_povm, Convention, Povm,
};
use pbt::su2::{cg_half, coupling_paths, multiplicity, HalfSpin};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), dim in 1usize..12) {
        let h = random_hermitian(dim, &mut rng(seed));
        let dec = eigh(&h).unwrap();
        prop_assert!(dec.reconstruct().max_abs_diff(&h) <= 1e-10 * h.frobenius_norm().max(1.0));
    }

    #[test]
    fn partial_trace_keeps_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..3) {
        let space = TensorSpace::new([("A", da), ("B", db), ("C", dc)]).unwrap();
        let m = random_ginibre(da * db * dc, da * db * dc, &mut rng(seed));
        for keep in [&["A"][..], &["B", "C"], &["C", "A"], &[]] {
            let (p, _) = partial_trace(&m, &space, keep).unwrap();
            prop_assert!((p.trace() - m.trace()).norm() < 1e-12 * (1.0 + m.frobenius_norm()));
        }
    }

    #[test]
    fn inverse_root_restores_support(seed in any::<u64>(), dim in 2usize..8, rank in 1usize..8) {
        let rank = rank.min(dim);
        let h = random_density(dim, rank, &mut rng(seed));
        let s = inv_sqrt_on_support(&h, 1e-10).unwrap();
        let p = support_projector(&h, 1e-10).unwrap();
        prop_assert!(s.matmul(&h).matmul(&s).max_abs_diff(&p) < 1e-10);
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        let mut r = rng(seed);
        let a = random_ginibre(m, m, &mut r);
        let b = random_ginibre(n, n, &mut r);
        let c = random_ginibre(m, m, &mut r);
        let d = random_ginibre(n, n, &mut r);
        let lhs = a.kron(&b).matmul(&c.kron(&d));
        let rhs = a.matmul(&c).kron(&b.matmul(&d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        let e = random_ginibre(2, 2, &mut r);
        prop_assert!(a.kron(&b).kron(&e).max_abs_diff(&a.kron(&b.kron(&e))) < 1e-14);
    }

    #[test]
    fn clebsch_gordan_rows_normalize(two_j1 in 0u32..30, k in 0u32..30, up in any::<bool>()) {
        let two_m1 = -(two_j1 as i32) + 2 * (k % (two_j1 + 1)) as i32;
        let spin = if up { HalfSpin::Up } else { HalfSpin::Down };
        let mut total = Ratio::from_integer(0u64);
        for two_j in [two_j1 + 1, two_j1.wrapping_sub(1)] {
            if two_j > two_j1 + 1 {
                continue;
            }
            total += cg_half(two_j1, two_m1, spin, two_j).unwrap().squared();
        }
        prop_assert_eq!(total, Ratio::from_integer(1));
    }

    #[test]
    fn multiplicity_counts_paths(n in 1usize..16, k in 0u32..16) {
        let two_s = k.min(n as u32);
        let expected = if (n as u32 - two_s) % 2 == 0 {
            coupling_paths(n, two_s).len() as u64
        } else {
            0
        };
        prop_assert_eq!(multiplicity(n, two_s).unwrap_or(0), expected);
    }

    #[test]
    fn srm_fidelity_increases(n in 1usize..30) {
        let f = fidelity_closed_form(n).unwrap().average_fidelity;
        let g = fidelity_closed_form(n + 1).unwrap().average_fidelity;
        prop_assert!(g > f);
    }

    #[test]
    fn no_rotated_measurement_beats_srm(seed in any::<u64>(), n in 1usize..5) {
        let states = signal_states(n, 2, Convention::Singlet).unwrap();
        let povm = srm_povm(&states).unwrap();
        let srm = fidelity_dense(&states, &povm, None).unwrap().entanglement_fidelity;
        let u = random_unitary(states.dim(), &mut rng(seed));
        let rotated = povm.conjugated(&u).unwrap();
        let f = fidelity_dense(&states, &rotated, None).unwrap().entanglement_fidelity;
        prop_assert!(f <= srm + 1e-9);
    }
}

fn srm_processor(n: usize) -> Processor {
    let states = signal_states(n, 2, Convention::Singlet).unwrap();
    let povm = srm_povm(&states).unwrap();
    Processor::new(&Resource::pairs(n, 2, Convention::Singlet), &povm).unwrap()
}

/// A random channel with `k` Kraus operators, from an isometry.
fn random_channel(d: usize, k: usize, r: &mut ChaCha8Rng) -> ProgramOperation {
    let u = random_unitary(d * k, r);
    let ops = (0..k)
        .map(|j| CMatrix::from_fn(d, d, |a, b| u[(j * d + a, b)]))
        .collect();
    ProgramOperation::new(ops).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn programs_commute_with_teleportation(seed in any::<u64>(), n in 1usize..4, k in 1usize..4) {
        let proc = srm_processor(n);
        let mut r = rng(seed);
        let program = random_channel(2, k, &mut r);
        prop_assert!(program.trace_preserving());
        let input = random_density(2, 2, &mut r);
        let run = proc.execute(&program, &input).unwrap();
        let expected = program.apply(&proc.teleporter().channel(&input).unwrap());
        prop_assert!(run.output.max_abs_diff(&expected) < 1e-10);
        prop_assert!((run.outcomes.iter().map(|o| o.probability).sum::<f64>() - 1.0).abs() < 1e-10);
        for o in &run.outcomes {
            prop_assert!(o.probability >= -1e-12);
        }
    }

    #[test]
    fn bob_cannot_see_the_input(seed in any::<u64>(), n in 1usize..4) {
        let tel = srm_processor(n).teleporter().clone();
        let mut r = rng(seed);
        let a = tel.bob_marginal(&random_density(2, 1, &mut r)).unwrap();
        let b = tel.bob_marginal(&random_density(2, 2, &mut r)).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn choi_route_matches_algebraic_route(seed in any::<u64>(), n in 1usize..4) {
        // Arbitrary complex measurements, not just the symmetric one.
        let states = signal_states(n, 2, Convention::Singlet).unwrap();
        let povm = srm_povm(&states).unwrap();
        let rotated = povm.conjugated(&random_unitary(states.dim(), &mut rng(seed))).unwrap();
        let rotated = Povm::new(rotated.space().clone(), rotated.into_elements()).unwrap();
        let tel = Teleporter::new(&Resource::pairs(n, 2, Convention::Singlet), &rotated).unwrap();
        let choi = tel.choi_fidelity(Convention::Singlet).unwrap().entanglement_fidelity;
        let dense = fidelity_dense(&states, &rotated, None).unwrap().entanglement_fidelity;
        prop_assert!((choi - dense).abs() < 1e-9);
    }
}

#[test]
fn conventions_agree_after_sigma_y() {
    for n in 1..=4 {
        let singlet = signal_states(n, 2, Convention::Singlet).unwrap();
        let phi = signal_states(n, 2, Convention::PhiPlus).unwrap();
        let povm = srm_povm(&singlet).unwrap();
        let moved = povm.conjugated(&sigma_y_on_b(n).unwrap()).unwrap();
        let a = fidelity_dense(&singlet, &povm, None).unwrap().entanglement_fidelity;
        let b = fidelity_dense(&phi, &moved, None).unwrap().entanglement_fidelity;
        assert!((a - b).abs() < 1e-12, "N={n}: {a} vs {b}");
    }
}

#[test]
fn outcomes_are_uniform_on_mixed_input() {
    for n in 1..=4 {
        let tel = srm_processor(n).teleporter().clone();
        let run = tel.teleport(&CMatrix::identity(2).scale(0.5), None).unwrap();
        for o in &run.outcomes {
            assert!((o.probability - 1.0 / n as f64).abs() < 1e-10);
        }
        let half = CMatrix::identity(2).scale(0.5);
        assert!(run.average_output.max_abs_diff(&half) < 1e-12);
    }
}
