use std::fmt;

use serde::{Deserialize, Serialize};

use super::blocks::{block_spins, c_coefficient};
use super::signals::{check_ports, Convention, SignalStateSet};
use super::srm::Povm;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::su2::multiplicity;

/// Largest port count for the closed-form and block evaluations.
pub const MAX_ANALYTIC_PORTS: usize = 50;

/// Largest `d^(N+1)` for dense fidelity evaluation.
pub const MAX_DENSE_DIM: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMethod {
    ClosedForm,
    Block,
    Dense,
    Sdp,
    /// Through the Choi state of a simulated teleportation channel.
    Choi,
}

impl FidelityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FidelityMethod::ClosedForm => "closed_form",
            FidelityMethod::Block => "block",
            FidelityMethod::Dense => "dense",
            FidelityMethod::Sdp => "sdp",
            FidelityMethod::Choi => "choi",
        }
    }
}

impl fmt::Display for FidelityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FidelityMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" | "closed" => Ok(FidelityMethod::ClosedForm),
            "block" | "blocks" => Ok(FidelityMethod::Block),
            "dense" => Ok(FidelityMethod::Dense),
            "sdp" => Ok(FidelityMethod::Sdp),
            "choi" => Ok(FidelityMethod::Choi),
            other => Err(Error::validation(format!("unknown method `{other}`"))),
        }
    }
}

/// `f = (F d + 1)/(d + 1)`.
pub fn average_fidelity(entanglement_fidelity: f64, qudit_dim: usize) -> f64 {
    let d = qudit_dim as f64;
    (entanglement_fidelity * d + 1.0) / (d + 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    #[serde(rename = "n")]
    pub n_ports: usize,
    #[serde(rename = "d")]
    pub qudit_dim: usize,
    #[serde(rename = "F")]
    pub entanglement_fidelity: f64,
    #[serde(rename = "f")]
    pub average_fidelity: f64,
    pub method: FidelityMethod,
    pub convention: Convention,
}

impl FidelityReport {
    pub fn new(
        n_ports: usize,
        qudit_dim: usize,
        entanglement_fidelity: f64,
        method: FidelityMethod,
        convention: Convention,
    ) -> Self {
        FidelityReport {
            n_ports,
            qudit_dim,
            entanglement_fidelity,
            average_fidelity: average_fidelity(entanglement_fidelity, qudit_dim),
            method,
            convention,
        }
    }
}

fn check_analytic(n_ports: usize) -> Result<()> {
    check_ports(n_ports, 2)?;
    if n_ports > MAX_ANALYTIC_PORTS {
        return Err(Error::resource(format!(
            "analytic fidelities limited to N <= {MAX_ANALYTIC_PORTS}"
        )));
    }
    Ok(())
}

/// `F = 2^{-(N+3)} Σ_k ((N-2k-1)/√(k+1) + (N-2k+1)/√(N-k+1))² C(N,k)`.
pub fn fidelity_closed_form(n_ports: usize) -> Result<FidelityReport> {
    check_analytic(n_ports)?;
    let n = n_ports as f64;
    let mut sum = 0.0;
    for k in 0..=n_ports {
        let kf = k as f64;
        let t = (n - 2.0 * kf - 1.0) / (kf + 1.0).sqrt()
            + (n - 2.0 * kf + 1.0) / (n - kf + 1.0).sqrt();
        sum += t * t * num_integer::binomial(n_ports as u128, k as u128) as f64;
    }
    let f = sum * 0.5_f64.powi(n_ports as i32 + 3);
    Ok(FidelityReport::new(
        n_ports,
        2,
        f,
        FidelityMethod::ClosedForm,
        Convention::Singlet,
    ))
}

/// `F = (N/2^{2N}) Σ_s (2s+1) m(N-1, 2s) c(s)²`.
pub fn fidelity_blocks(n_ports: usize) -> Result<FidelityReport> {
    check_analytic(n_ports)?;
    let mut sum = 0.0;
    for two_s in block_spins(n_ports) {
        let c = c_coefficient(n_ports, two_s)?;
        let mult = multiplicity(n_ports - 1, two_s)? as f64;
        sum += f64::from(two_s + 1) * mult * c * c;
    }
    let f = n_ports as f64 * 0.25_f64.powi(n_ports as i32) * sum;
    Ok(FidelityReport::new(
        n_ports,
        2,
        f,
        FidelityMethod::Block,
        Convention::Singlet,
    ))
}

/// Checks `O` acts on `d^N` dimensions with `tr(O O†) = d^N`.
pub(crate) fn check_resource_operator(o: &CMatrix, a_dim: usize) -> Result<()> {
    if o.rows() != a_dim || o.cols() != a_dim {
        return Err(Error::validation(format!(
            "resource operator is {}x{}, expected {a_dim}x{a_dim}",
            o.rows(),
            o.cols()
        )));
    }
    let norm = o.frobenius_norm().powi(2);
    if (norm - a_dim as f64).abs() > 1e-9 * a_dim as f64 {
        return Err(Error::validation(format!(
            "tr(O O†) = {norm}, expected {a_dim}"
        )));
    }
    Ok(())
}

/// `F = (1/d²) Σ_i tr Π_i (O⊗1) σ(i) (O†⊗1)`; `O` defaults to the identity.
pub fn fidelity_dense(
    states: &SignalStateSet,
    povm: &Povm,
    resource_operator: Option<&CMatrix>,
) -> Result<FidelityReport> {
    let n = states.n_ports;
    let d = states.qudit_dim;
    if states.dim() > MAX_DENSE_DIM {
        return Err(Error::resource(format!(
            "dense fidelity limited to d^(N+1) <= {MAX_DENSE_DIM}"
        )));
    }
    if povm.len() != n {
        return Err(Error::validation(format!(
            "{} POVM elements for {n} ports",
            povm.len()
        )));
    }
    if povm.space().total_dim() != states.dim() {
        return Err(Error::DimensionMismatch {
            expected: states.dim(),
            got: povm.space().total_dim(),
        });
    }
    let lifted = match resource_operator {
        Some(o) => {
            check_resource_operator(o, states.dim() / d)?;
            Some(o.kron(&CMatrix::identity(d)))
        }
        None => None,
    };
    let mut total = 0.0;
    for i in 1..=n {
        let term = match &lifted {
            Some(o) => povm
                .element(i)
                .trace_product(&o.matmul(states.sigma(i)).matmul(&o.adjoint())),
            None => povm.element(i).trace_product(states.sigma(i)),
        };
        total += term.re;
    }
    let f = total / (d * d) as f64;
    Ok(FidelityReport::new(
        n,
        d,
        f,
        FidelityMethod::Dense,
        states.convention,
    ))
}

/// `2N (1 - f(N))`, which tends to 1.
pub fn asymptotic_gap(n_ports: usize) -> Result<f64> {
    let report = fidelity_closed_form(n_ports)?;
    Ok(2.0 * n_ports as f64 * (1.0 - report.average_fidelity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::signals::signal_states;
    use crate::protocol::srm::srm_povm;

    #[test]
    fn exact_small_values() {
        let f1 = fidelity_closed_form(1).unwrap();
        assert!((f1.entanglement_fidelity - 0.25).abs() < 1e-12);
        assert!((f1.average_fidelity - 0.5).abs() < 1e-12);
        let f3 = fidelity_closed_form(3).unwrap();
        assert!((f3.entanglement_fidelity - 0.625).abs() < 1e-12);
        assert!((f3.average_fidelity - 0.75).abs() < 1e-12);
        let f2 = fidelity_closed_form(2).unwrap();
        assert!((f2.entanglement_fidelity - 0.4665064).abs() < 1e-7);
        assert!((f2.average_fidelity - 0.6443376).abs() < 1e-7);
    }

    #[test]
    fn blocks_agree_with_closed_form() {
        for n in 1..=20 {
            let a = fidelity_closed_form(n).unwrap().entanglement_fidelity;
            let b = fidelity_blocks(n).unwrap().entanglement_fidelity;
            assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn dense_agrees_for_small_n() {
        for n in 1..=4 {
            let s = signal_states(n, 2, Convention::Singlet).unwrap();
            let p = srm_povm(&s).unwrap();
            let dense = fidelity_dense(&s, &p, None).unwrap().entanglement_fidelity;
            let closed = fidelity_closed_form(n).unwrap().entanglement_fidelity;
            assert!((dense - closed).abs() < 1e-10);
        }
    }

    #[test]
    fn qutrit_two_ports_respects_bound() {
        let s = signal_states(2, 3, Convention::PhiPlus).unwrap();
        let p = srm_povm(&s).unwrap();
        let f = fidelity_dense(&s, &p, None).unwrap().entanglement_fidelity;
        assert!(f > 0.0 && f <= 2.0 / 9.0 + 1e-12);
    }

    #[test]
    fn resource_operator_normalization() {
        let s = signal_states(2, 2, Convention::Singlet).unwrap();
        let p = srm_povm(&s).unwrap();
        let bad = CMatrix::identity(4).scale(2.0);
        assert!(matches!(
            fidelity_dense(&s, &p, Some(&bad)),
            Err(Error::Validation(_))
        ));
        let same = fidelity_dense(&s, &p, Some(&CMatrix::identity(4))).unwrap();
        let default = fidelity_dense(&s, &p, None).unwrap();
        assert!((same.entanglement_fidelity - default.entanglement_fidelity).abs() < 1e-14);
    }

    #[test]
    fn gap_tends_to_one() {
        assert!((asymptotic_gap(3).unwrap() - 1.5).abs() < 1e-12);
        let g20 = asymptotic_gap(20).unwrap();
        let g50 = asymptotic_gap(50).unwrap();
        assert!((g20 - 0.9675863552403863).abs() < 1e-10);
        assert!((g50 - 1.0).abs() < (g20 - 1.0).abs());
    }

    #[test]
    fn report_json_keys() {
        let r = fidelity_closed_form(3).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["d"], 2);
        assert_eq!(v["F"], 0.625);
        assert_eq!(v["method"], "closed_form");
        assert_eq!(v["convention"], "singlet");
    }

    #[test]
    fn analytic_cap() {
        assert!(matches!(fidelity_closed_form(51), Err(Error::Resource(_))));
        assert!(matches!(fidelity_blocks(0), Err(Error::Domain(_))));
    }
}
