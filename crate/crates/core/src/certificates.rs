//! Optimality and bound certificates: dual feasibility of the square-root
//! measurement, the universal `F <= N/d²` bound, and the separable protocol
//! that attains it when `N <= d`.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_trace, random_unitary, CMatrix, Complex64, DEFAULT_RANK_TOL};
use crate::protocol::{
    check_ports, fidelity_closed_form, fidelity_dense, port_labels, signal_states, srm_parts,
    Convention, FidelityReport, Povm, RhoEigenbasis, SignalStateSet, MAX_DENSE_DIM,
};

/// Largest deviation tolerated between two constructions of the same operator.
pub const CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    SrmOptimal,
    UniversalUpper,
    OrthogonalAchieving,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::SrmOptimal => "srm_optimal",
            CertificateKind::UniversalUpper => "universal_upper",
            CertificateKind::OrthogonalAchieving => "orthogonal_achieving",
        }
    }
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CertificateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "srm_optimal" | "srm" => Ok(CertificateKind::SrmOptimal),
            "universal_upper" | "upper" => Ok(CertificateKind::UniversalUpper),
            "orthogonal_achieving" | "orthogonal" => Ok(CertificateKind::OrthogonalAchieving),
            other => Err(Error::validation(format!("unknown certificate kind `{other}`"))),
        }
    }
}

/// Outcome of a certificate check.
///
/// `margins` are minimum eigenvalues of the operators that must be PSD (or
/// slacks of scalar inequalities). `diagnostics` holds deviations between
/// independent constructions; a certificate also fails when one of them
/// exceeds [`CONSISTENCY_TOL`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub passed: bool,
    pub worst_margin: f64,
    pub margins: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

impl CertificateReport {
    fn assemble(
        kind: CertificateKind,
        margins: Vec<f64>,
        bound: Option<f64>,
        diagnostics: BTreeMap<String, f64>,
        psd_tol: f64,
    ) -> Self {
        let worst_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
        let consistent = diagnostics.values().all(|&d| d <= CONSISTENCY_TOL);
        CertificateReport {
            kind,
            passed: worst_margin >= -psd_tol && consistent,
            worst_margin,
            margins,
            bound,
            diagnostics,
        }
    }
}

fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    if m.is_real() {
        Ok(eigh(&m.real_part())?.min_eigenvalue())
    } else {
        Ok(eigh(m)?.min_eigenvalue())
    }
}

fn dense_states(n_ports: usize, qudit_dim: usize, convention: Convention) -> Result<SignalStateSet> {
    check_ports(n_ports, qudit_dim)?;
    let states = signal_states(n_ports, qudit_dim, convention)?;
    if states.dim() > MAX_DENSE_DIM {
        return Err(Error::resource(format!(
            "certificates limited to d^(N+1) <= {MAX_DENSE_DIM}"
        )));
    }
    Ok(states)
}

/// `Y^SQ = Σ_i Π^SQ_i σ(i)` and the checks that make it a dual solution
/// certifying the square-root measurement optimal for qubit singlets:
/// `Y^SQ - σ(i) ⪰ 0` for every port, agreement with the block form
/// `(c(s)/2^{N-1}) ρ(s)^{½}`, and `tr Y^SQ / 4 = F`.
pub fn certify_srm_optimal(n_ports: usize, psd_tol: f64) -> Result<CertificateReport> {
    let states = dense_states(n_ports, 2, Convention::Singlet)?;
    let parts = srm_parts(&states)?;
    let mut y = CMatrix::zeros(states.dim(), states.dim());
    for (i, p) in parts.pretty_good.iter().enumerate() {
        y += &p.matmul(states.sigma(i + 1));
    }
    let hermiticity = y.hermiticity_defect();
    let y = y.hermitian_part();

    let block = block_dual(n_ports)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("hermiticity".to_string(), hermiticity);
    diagnostics.insert("block_form".to_string(), y.max_abs_diff(&block));
    let fidelity = fidelity_closed_form(n_ports)?.entanglement_fidelity;
    let trace_fidelity = y.trace().re / 4.0;
    diagnostics.insert("trace_fidelity".to_string(), (trace_fidelity - fidelity).abs());

    let margins = (1..=n_ports)
        .map(|i| min_eigenvalue(&(&y - states.sigma(i))))
        .collect::<Result<Vec<_>>>()?;
    Ok(CertificateReport::assemble(
        CertificateKind::SrmOptimal,
        margins,
        Some(trace_fidelity),
        diagnostics,
        psd_tol,
    ))
}

/// `Σ_s (c(s)/2^{N-1}) ρ(s)^{½}`, with `ρ(s)` the restriction of `ρ` to total
/// spin `s` of the ports and `B` together.
pub fn block_dual(n_ports: usize) -> Result<CMatrix> {
    let basis = RhoEigenbasis::new(n_ports)?;
    let scale = 0.5_f64.powi(n_ports as i32 - 1);
    let dim = 2usize << n_ports;
    let mut y = crate::linalg::RMatrix::zeros(dim, dim);
    for label in basis.labels() {
        let lambda = basis.eigenvalue(&label);
        if lambda <= DEFAULT_RANK_TOL {
            continue;
        }
        let two_s = label
            .two_total()
            .expect("labels only carry valid total spins");
        let c = crate::protocol::c_coefficient(n_ports, two_s)?;
        let v = basis.vector(&label)?;
        let w = c * scale * lambda.sqrt();
        for r in 0..dim {
            if v[r] == 0.0 {
                continue;
            }
            for col in 0..dim {
                y[(r, col)] += w * v[r] * v[col];
            }
        }
    }
    Ok(y.to_complex())
}

/// The dual point `Ω = Σ σ(i)`, `a = N/d^N`: `Ω - σ(i) ⪰ 0` for every port
/// and `a 1 - tr_B Ω ⪰ 0`, which gives `F <= d^{N-2} a = N/d²`.
pub fn certify_universal_upper(
    n_ports: usize,
    qudit_dim: usize,
    psd_tol: f64,
) -> Result<CertificateReport> {
    let states = dense_states(n_ports, qudit_dim, Convention::default_for(qudit_dim))?;
    let omega = states.rho().matrix();
    let mut margins = (1..=n_ports)
        .map(|i| min_eigenvalue(&(omega - states.sigma(i))))
        .collect::<Result<Vec<_>>>()?;
    let a = n_ports as f64 / (qudit_dim as f64).powi(n_ports as i32);
    let a_labels = port_labels("A", n_ports);
    let keep: Vec<&str> = a_labels.iter().map(String::as_str).collect();
    let (marginal, _) = partial_trace(omega, states.space(), &keep)?;
    let slack = &CMatrix::identity(marginal.rows()).scale(a) - &marginal;
    margins.push(min_eigenvalue(&slack)?);
    let bound = a * (qudit_dim as f64).powi(n_ports as i32 - 2);
    Ok(CertificateReport::assemble(
        CertificateKind::UniversalUpper,
        margins,
        Some(bound),
        BTreeMap::new(),
        psd_tol,
    ))
}

/// The separable resource `⊗_k |0⟩_{A_k} |e_k⟩_{B_k}` and a measurement that
/// reads the port off Bob's side, for `N <= d`.
#[derive(Clone, Debug)]
pub struct OrthogonalProtocol {
    /// `O = d^{N/2} |0…0⟩⟨e_1…e_N|` on the ports, so the resource is
    /// `(O ⊗ 1)|φ+⟩^{⊗N}`.
    pub resource_operator: CMatrix,
    pub povm: Povm,
    pub report: FidelityReport,
}

impl OrthogonalProtocol {
    /// The pure resource on `[A1, …, AN, B1, …, BN]`.
    pub fn resource_state(&self) -> Vec<Complex64> {
        let n = self.report.n_ports;
        let d = self.report.qudit_dim;
        let a_dim = d.pow(n as u32);
        let mut b_index = 0;
        for k in 0..n {
            b_index = b_index * d + k;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); a_dim * a_dim];
        v[b_index] = Complex64::new(1.0, 0.0);
        v
    }
}

/// Builds the `N <= d` protocol. The measurement is one valid completion:
/// `Π_i = 1_A ⊗ |e_i⟩⟨e_i|_B` for `i < N` and `Π_N = 1 - Σ_{i<N} Π_i`.
pub fn orthogonal_protocol(n_ports: usize, qudit_dim: usize) -> Result<OrthogonalProtocol> {
    check_ports(n_ports, qudit_dim)?;
    if n_ports > qudit_dim {
        return Err(Error::domain(format!(
            "N = {n_ports} orthogonal states do not fit in d = {qudit_dim}"
        )));
    }
    let d = qudit_dim;
    let states = dense_states(n_ports, d, Convention::PhiPlus)?;
    let a_dim = states.dim() / d;
    let mut e_index = 0;
    for k in 0..n_ports {
        e_index = e_index * d + k;
    }
    let mut o = CMatrix::zeros(a_dim, a_dim);
    o[(0, e_index)] = Complex64::new((a_dim as f64).sqrt(), 0.0);

    let id_a = CMatrix::identity(a_dim);
    let mut elements = Vec::with_capacity(n_ports);
    let mut rest = CMatrix::identity(states.dim());
    for i in 0..n_ports - 1 {
        let mut e = CMatrix::zeros(d, d);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        let pi = id_a.kron(&e);
        rest -= &pi;
        elements.push(pi);
    }
    elements.push(rest);
    let povm = Povm::new(states.space().clone(), elements)?;
    let report = fidelity_dense(&states, &povm, Some(&o))?;
    Ok(OrthogonalProtocol {
        resource_operator: o,
        povm,
        report,
    })
}

/// The orthogonal protocol against the universal bound: the single margin is
/// `-|F - N/d²|`.
pub fn certify_orthogonal(
    n_ports: usize,
    qudit_dim: usize,
    psd_tol: f64,
) -> Result<CertificateReport> {
    let protocol = orthogonal_protocol(n_ports, qudit_dim)?;
    let bound = n_ports as f64 / (qudit_dim * qudit_dim) as f64;
    let gap = (protocol.report.entanglement_fidelity - bound).abs();
    Ok(CertificateReport::assemble(
        CertificateKind::OrthogonalAchieving,
        vec![-gap],
        Some(bound),
        BTreeMap::new(),
        psd_tol,
    ))
}

/// Fidelities of seeded random measurements `U Π^SRM_i U†` against the
/// square-root measurement itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomPovmCheck {
    pub srm_fidelity: f64,
    pub sampled: Vec<f64>,
    pub max_sampled: f64,
}

pub fn random_povm_check(n_ports: usize, samples: usize, seed: u64) -> Result<RandomPovmCheck> {
    let states = dense_states(n_ports, 2, Convention::Singlet)?;
    let srm = srm_parts(&states)?.povm;
    let srm_fidelity = fidelity_dense(&states, &srm, None)?.entanglement_fidelity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = random_unitary(states.dim(), &mut rng);
        let povm = srm.conjugated(&u)?;
        sampled.push(fidelity_dense(&states, &povm, None)?.entanglement_fidelity);
    }
    let max_sampled = sampled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RandomPovmCheck {
        srm_fidelity,
        sampled,
        max_sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::PSD_TOL;

    #[test]
    fn srm_certificate_small_n() {
        let r1 = certify_srm_optimal(1, PSD_TOL).unwrap();
        assert!(r1.passed);
        assert!(r1.worst_margin >= -1e-12);
        assert!((r1.bound.unwrap() - 0.25).abs() < 1e-12);
        let r3 = certify_srm_optimal(3, PSD_TOL).unwrap();
        assert!(r3.passed, "{r3:?}");
        assert!((r3.bound.unwrap() - 0.625).abs() < 1e-10);
    }

    #[test]
    fn universal_bound_examples() {
        for (n, d, bound) in [(2, 2, 0.5), (3, 2, 0.75), (2, 3, 2.0 / 9.0)] {
            let r = certify_universal_upper(n, d, PSD_TOL).unwrap();
            assert!(r.passed);
            assert!((r.bound.unwrap() - bound).abs() < 1e-14);
            // the marginal slack vanishes identically
            assert!(r.margins.last().unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_protocol_attains_the_bound() {
        for (n, d, f) in [(1, 2, 0.5), (2, 2, 2.0 / 3.0), (2, 3, 5.0 / 12.0), (3, 3, 0.5)] {
            let p = orthogonal_protocol(n, d).unwrap();
            let bound = n as f64 / (d * d) as f64;
            assert!((p.report.entanglement_fidelity - bound).abs() < 1e-12);
            assert!((p.report.average_fidelity - f).abs() < 1e-12);
            assert!(certify_orthogonal(n, d, PSD_TOL).unwrap().passed);
        }
        assert!(matches!(orthogonal_protocol(3, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn orthogonal_resource_is_normalized_product() {
        let p = orthogonal_protocol(2, 3).unwrap();
        let v = p.resource_state();
        assert_eq!(v.len(), 81);
        // |00⟩_A |e1 e2⟩_B = |0 0 0 1⟩
        assert_eq!(v[1], Complex64::new(1.0, 0.0));
        assert!((crate::linalg::norm(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_measurements_do_not_beat_srm() {
        let check = random_povm_check(3, 5, 7).unwrap();
        assert!(check.max_sampled <= check.srm_fidelity + 1e-9);
        assert_eq!(check.sampled.len(), 5);
    }

    #[test]
    fn report_json_keys() {
        let r = certify_universal_upper(2, 2, PSD_TOL).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "universal_upper");
        assert_eq!(v["passed"], true);
        assert!(v["margins"].is_array());
    }
}
