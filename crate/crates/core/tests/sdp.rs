use std::f64::consts::PI;

use pbt::channel::{Resource, Teleporter};
use pbt::protocol::{fidelity_closed_form, fidelity_dense, signal_states, Convention};
use pbt::sdp::optimal_fidelity;

#[test]
fn optimum_grows_with_ports() {
    let values: Vec<f64> = (1..=4)
        .map(|n| optimal_fidelity(n, 2, false).unwrap().primal_value)
        .collect();
    for w in values.windows(2) {
        assert!(w[1] >= w[0] - 1e-7, "{values:?}");
    }
    for (k, v) in values.iter().enumerate() {
        let srm = fidelity_closed_form(k + 1).unwrap().entanglement_fidelity;
        assert!(*v >= srm - 1e-7);
    }
}

#[test]
fn upper_bound_is_tight_for_few_ports() {
    for (n, d) in [(1, 2), (2, 2), (1, 3), (2, 3)] {
        let s = optimal_fidelity(n, d, false).unwrap();
        let bound = n as f64 / (d * d) as f64;
        assert!((s.primal_value - bound).abs() < 1e-6, "N={n}, d={d}: {}", s.primal_value);
        assert!(s.gap <= 1e-7);
    }
}

#[test]
fn qubit_optimum_regression() {
    // The solved values follow cos²(π/(N+2)) for N <= 4.
    for n in 1..=4 {
        let s = optimal_fidelity(n, 2, false).unwrap();
        let pinned = (PI / (n as f64 + 2.0)).cos().powi(2);
        assert!((s.primal_value - pinned).abs() < 1e-6, "N={n}: {}", s.primal_value);
        assert!(s.primal_value <= s.dual_value + 1e-9);
    }
}

#[test]
fn solver_is_deterministic() {
    let a = optimal_fidelity(3, 2, false).unwrap();
    let b = optimal_fidelity(3, 2, false).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.primal_value.to_bits(), b.primal_value.to_bits());
    assert_eq!(a.dual_value.to_bits(), b.dual_value.to_bits());
}

#[test]
fn extracted_protocol_teleports_at_the_optimum() {
    let n = 3;
    let sol = optimal_fidelity(n, 2, false).unwrap();
    let ex = sol.extract_resource().unwrap();
    let states = signal_states(n, 2, Convention::Singlet).unwrap();
    let algebraic = fidelity_dense(&states, &ex.povm, Some(&ex.resource_operator))
        .unwrap()
        .entanglement_fidelity;
    assert!((algebraic - sol.primal_value).abs() < 1e-6, "{algebraic}");
    let resource = Resource::Operator {
        operator: ex.resource_operator.clone(),
        convention: Convention::Singlet,
    };
    let simulated = Teleporter::new(&resource, &ex.povm)
        .unwrap()
        .choi_fidelity(Convention::Singlet)
        .unwrap()
        .entanglement_fidelity;
    assert!((simulated - algebraic).abs() < 1e-9);
    assert!(simulated > fidelity_closed_form(n).unwrap().entanglement_fidelity);
}
