use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{embed, permute, CMatrix, Complex64, HermitianOperator, TensorSpace};

/// Largest `d^(N+1)` for which signal states are materialized.
pub const MAX_SIGNAL_DIM: usize = 4096;

/// Which maximally entangled pair the resource is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `|ψ-⟩ = (|01⟩ - |10⟩)/√2` pairs; qubits only.
    Singlet,
    /// `|φ+⟩ = Σ_k |kk⟩/√d` pairs.
    PhiPlus,
}

impl Convention {
    /// Singlet for qubits, `φ+` otherwise.
    pub fn default_for(qudit_dim: usize) -> Self {
        if qudit_dim == 2 {
            Convention::Singlet
        } else {
            Convention::PhiPlus
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Singlet => "singlet",
            Convention::PhiPlus => "phi_plus",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singlet" => Ok(Convention::Singlet),
            "phi_plus" | "phi-plus" => Ok(Convention::PhiPlus),
            other => Err(Error::validation(format!("unknown convention `{other}`"))),
        }
    }
}

/// The maximally entangled pair vector on two qudits.
pub fn pair_state(qudit_dim: usize, convention: Convention) -> Result<Vec<Complex64>> {
    let d = qudit_dim;
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    match convention {
        Convention::PhiPlus => {
            let a = 1.0 / (d as f64).sqrt();
            for k in 0..d {
                v[k * d + k] = Complex64::new(a, 0.0);
            }
        }
        Convention::Singlet => {
            if d != 2 {
                return Err(Error::domain("the singlet convention requires d = 2"));
            }
            let a = 0.5_f64.sqrt();
            v[1] = Complex64::new(a, 0.0);
            v[2] = Complex64::new(-a, 0.0);
        }
    }
    Ok(v)
}

pub fn pair_projector(qudit_dim: usize, convention: Convention) -> Result<CMatrix> {
    Ok(CMatrix::projector(&pair_state(qudit_dim, convention)?))
}

/// Labels `A1 … AN`.
pub fn port_labels(prefix: &str, n_ports: usize) -> Vec<String> {
    (1..=n_ports).map(|k| format!("{prefix}{k}")).collect()
}

/// `H_A ⊗ H_B` with factor order `[A1, …, AN, B]`.
pub fn ab_space(n_ports: usize, qudit_dim: usize) -> TensorSpace {
    let mut factors: Vec<(String, usize)> = port_labels("A", n_ports)
        .into_iter()
        .map(|l| (l, qudit_dim))
        .collect();
    factors.push(("B".to_string(), qudit_dim));
    TensorSpace::new(factors).expect("port labels are unique")
}

pub(crate) fn check_ports(n_ports: usize, qudit_dim: usize) -> Result<()> {
    if n_ports == 0 {
        return Err(Error::domain("at least one port is required"));
    }
    if qudit_dim < 2 {
        return Err(Error::domain("qudit dimension must be at least 2"));
    }
    Ok(())
}

/// `d^(N+1)`, or a resource error when it exceeds `cap`.
pub(crate) fn checked_dim(n_ports: usize, qudit_dim: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..=n_ports {
        dim = dim.saturating_mul(qudit_dim);
        if dim > cap {
            return Err(Error::resource(format!(
                "N = {n_ports}, d = {qudit_dim}: d^(N+1) exceeds the cap of {cap}"
            )));
        }
    }
    Ok(dim)
}

/// The states `σ(i) = P_{A_i B} ⊗ 1_{Ā_i} / d^(N-1)` Alice has to tell
/// apart, and their sum `ρ`.
#[derive(Clone, Debug)]
pub struct SignalStateSet {
    pub n_ports: usize,
    pub qudit_dim: usize,
    pub convention: Convention,
    sigmas: Vec<HermitianOperator>,
    rho: HermitianOperator,
}

impl SignalStateSet {
    pub fn space(&self) -> &TensorSpace {
        self.rho.space()
    }

    pub fn sigmas(&self) -> &[HermitianOperator] {
        &self.sigmas
    }

    /// `σ(i)` for `i` in `1..=N`.
    pub fn sigma(&self, i: usize) -> &CMatrix {
        self.sigmas[i - 1].matrix()
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

pub fn signal_states(
    n_ports: usize,
    qudit_dim: usize,
    convention: Convention,
) -> Result<SignalStateSet> {
    check_ports(n_ports, qudit_dim)?;
    checked_dim(n_ports, qudit_dim, MAX_SIGNAL_DIM)?;
    let pair = pair_projector(qudit_dim, convention)?;
    let space = ab_space(n_ports, qudit_dim);
    let norm = (qudit_dim as f64).powi(n_ports as i32 - 1);
    let labels = port_labels("A", n_ports);
    let mut sigmas = Vec::with_capacity(n_ports);
    let mut rho = CMatrix::zeros(space.total_dim(), space.total_dim());
    for a in &labels {
        let s = embed(&pair, &[a.as_str(), "B"], &space)?.scale(1.0 / norm);
        rho += &s;
        sigmas.push(HermitianOperator::new(space.clone(), s)?);
    }
    Ok(SignalStateSet {
        n_ports,
        qudit_dim,
        convention,
        sigmas,
        rho: HermitianOperator::new(space, rho)?,
    })
}

/// `ρ` for qubit singlets from the recursion
/// `ρ[N] = ρ[N-1] ⊗ 1_{A_N}/2 + (1/2)^{⊗(N-1)} ⊗ P-_{B A_N}`,
/// returned in the canonical `[A1, …, AN, B]` factor order.
pub fn rho_recursive(n_ports: usize) -> Result<HermitianOperator> {
    check_ports(n_ports, 2)?;
    checked_dim(n_ports, 2, MAX_SIGNAL_DIM)?;
    let singlet = pair_projector(2, Convention::Singlet)?;
    let half_identity = CMatrix::identity(2).scale(0.5);
    // working order [B, A1, …, Ak]
    let mut rho = singlet.clone();
    for k in 2..=n_ports {
        let mut factors = vec![("B".to_string(), 2)];
        factors.extend(port_labels("A", k).into_iter().map(|l| (l, 2)));
        let space = TensorSpace::new(factors)?;
        let mut next = rho.kron(&half_identity);
        let pair_term = embed(&singlet, &["B", &format!("A{k}")], &space)?
            .scale(0.5_f64.powi(k as i32 - 1));
        next += &pair_term;
        rho = next;
    }
    let mut factors = vec![("B".to_string(), 2)];
    factors.extend(port_labels("A", n_ports).into_iter().map(|l| (l, 2)));
    let working = TensorSpace::new(factors)?;
    let canonical = ab_space(n_ports, 2);
    let (m, space) = permute(&rho, &working, &canonical.labels())?;
    HermitianOperator::new(space, m)
}

/// `1_A ⊗ σ_y` on `[A1, …, AN, B]`; maps singlet-convention operators to
/// the `φ+` convention by conjugation (qubits only).
pub fn sigma_y_on_b(n_ports: usize) -> Result<CMatrix> {
    let sy = CMatrix::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
        vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
    ])?;
    embed(&sy, &["B"], &ab_space(n_ports, 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::partial_trace;

    #[test]
    fn single_port_singlet_is_the_pair_projector() {
        let s = signal_states(1, 2, Convention::Singlet).unwrap();
        let p = pair_projector(2, Convention::Singlet).unwrap();
        assert!(s.sigma(1).max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn two_port_overlaps() {
        let s = signal_states(2, 2, Convention::Singlet).unwrap();
        assert!((s.sigma(1).trace().re - 1.0).abs() < 1e-14);
        assert!((s.sigma(2).trace().re - 1.0).abs() < 1e-14);
        // P-_{A1B} ⊗ 1_{A2}/2 against P-_{A2B} ⊗ 1_{A1}/2:
        // (1/4) tr(P-_{A1B} P-_{A2B}) = (1/4)(1/2) = 1/8
        let overlap = s.sigma(1).trace_product(s.sigma(2)).re;
        assert!((overlap - 0.125).abs() < 1e-14);
    }

    #[test]
    fn marginals_are_pair_projectors() {
        for (n, d, conv) in [
            (3, 2, Convention::Singlet),
            (3, 2, Convention::PhiPlus),
            (2, 3, Convention::PhiPlus),
        ] {
            let s = signal_states(n, d, conv).unwrap();
            let p = pair_projector(d, conv).unwrap();
            for i in 1..=n {
                let a = format!("A{i}");
                let (m, _) = partial_trace(s.sigma(i), s.space(), &[&a, "B"]).unwrap();
                assert!(m.max_abs_diff(&p) < 1e-14);
            }
            assert!((s.rho().trace() - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_requires_qubits() {
        assert!(matches!(
            signal_states(2, 3, Convention::Singlet),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(
            signal_states(12, 2, Convention::Singlet),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            signal_states(7, 3, Convention::PhiPlus),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn recursion_matches_direct_sum() {
        for n in 1..=5 {
            let direct = signal_states(n, 2, Convention::Singlet).unwrap();
            let rec = rho_recursive(n).unwrap();
            let dev = rec.matrix().max_abs_diff(direct.rho().matrix());
            assert!(dev <= 1e-14, "n={n} dev={dev}");
        }
    }

    #[test]
    fn conventions_related_by_sigma_y() {
        let a = signal_states(3, 2, Convention::Singlet).unwrap();
        let b = signal_states(3, 2, Convention::PhiPlus).unwrap();
        let y = sigma_y_on_b(3).unwrap();
        for i in 1..=3 {
            let conv = a.sigma(i).conjugate_by(&y);
            assert!(conv.max_abs_diff(b.sigma(i)) < 1e-14);
        }
    }
}
