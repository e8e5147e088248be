use std::fmt;

use serde::{Deserialize, Serialize};

use super::signals::check_ports;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::su2::{allowed_two_j, cg_half, multiplicity, CoupledBasis, HalfSpin, MAX_SPINS};

/// Sign in `J = j ± ½` for the total spin of `A` coupled with `B`.
///
/// `Minus` eigenvectors couple up to `J = j + ½` and carry `λ-_j`; `Plus`
/// eigenvectors couple down to `J = j - ½` and carry `λ+_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minus,
    Plus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Minus => "-",
            Branch::Plus => "+",
        })
    }
}

/// `λ±_j` of the qubit signal sum `ρ` with `n_ports` ports.
pub fn rho_eigenvalue(n_ports: usize, branch: Branch, two_j: u32) -> f64 {
    let n = n_ports as f64;
    let j = f64::from(two_j) / 2.0;
    let scale = 0.5_f64.powi(n_ports as i32);
    match branch {
        Branch::Minus => (n / 2.0 - j) * scale,
        Branch::Plus => (n / 2.0 + j + 1.0) * scale,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub branch: Branch,
    pub two_j: u32,
    pub eigenvalue: f64,
    pub degeneracy: u64,
}

/// Eigenvalues of `ρ` indexed by `(±, j)`; entries with zero degeneracy
/// (the `+` branch at `j = 0`) are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSpectrum {
    pub n_ports: usize,
    pub entries: Vec<SpectrumEntry>,
}

impl RhoSpectrum {
    pub fn total_degeneracy(&self) -> u64 {
        self.entries.iter().map(|e| e.degeneracy).sum()
    }

    /// All eigenvalues with multiplicity, ascending.
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.eigenvalue).take(e.degeneracy as usize))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn trace(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.eigenvalue * e.degeneracy as f64)
            .sum()
    }
}

/// Largest port count for the analytic spectrum; the degeneracies still fit
/// comfortably in `u64`.
pub const MAX_SPECTRUM_PORTS: usize = 60;

pub fn rho_spectrum(n_ports: usize) -> Result<RhoSpectrum> {
    check_ports(n_ports, 2)?;
    if n_ports > MAX_SPECTRUM_PORTS {
        return Err(Error::resource(format!(
            "spectrum limited to N <= {MAX_SPECTRUM_PORTS}"
        )));
    }
    let mut entries = Vec::new();
    for two_j in allowed_two_j(n_ports) {
        let mult = multiplicity(n_ports, two_j)?;
        entries.push(SpectrumEntry {
            branch: Branch::Minus,
            two_j,
            eigenvalue: rho_eigenvalue(n_ports, Branch::Minus, two_j),
            degeneracy: (u64::from(two_j) + 2) * mult,
        });
        entries.push(SpectrumEntry {
            branch: Branch::Plus,
            two_j,
            eigenvalue: rho_eigenvalue(n_ports, Branch::Plus, two_j),
            degeneracy: u64::from(two_j) * mult,
        });
    }
    Ok(RhoSpectrum { n_ports, entries })
}

/// Label of an eigenvector `Ψ±(λ_j; m, α)`: `path` is the coupling path α of
/// the N ports (ending at `2j`) and `two_m` the projection of the total spin
/// of `A` and `B` together.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PsiLabel {
    pub branch: Branch,
    pub path: Vec<u32>,
    pub two_m: i32,
}

impl PsiLabel {
    pub fn two_j(&self) -> u32 {
        *self.path.last().unwrap_or(&0)
    }

    /// Doubled total spin of the port system together with `B`.
    pub fn two_total(&self) -> Option<u32> {
        match self.branch {
            Branch::Minus => Some(self.two_j() + 1),
            Branch::Plus => self.two_j().checked_sub(1),
        }
    }
}

/// The coupled eigenbasis of `ρ` on `[A1, …, AN, B]` for qubit singlets.
#[derive(Clone, Debug)]
pub struct RhoEigenbasis {
    n_ports: usize,
    basis: CoupledBasis,
}

impl RhoEigenbasis {
    pub fn new(n_ports: usize) -> Result<Self> {
        check_ports(n_ports, 2)?;
        if n_ports >= MAX_SPINS {
            return Err(Error::resource(format!(
                "eigenvectors limited to N < {MAX_SPINS}"
            )));
        }
        Ok(RhoEigenbasis {
            n_ports,
            basis: CoupledBasis::build(n_ports)?,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn eigenvalue(&self, label: &PsiLabel) -> f64 {
        rho_eigenvalue(self.n_ports, label.branch, label.two_j())
    }

    /// `Σ_{m_B} ⟨j, m - m_B; ½, m_B | J, m⟩ |Φ(j, m - m_B, α)⟩ ⊗ |m_B⟩`.
    pub fn vector(&self, label: &PsiLabel) -> Result<Vec<f64>> {
        let two_j = label.two_j();
        let two_total = label.two_total().ok_or_else(|| {
            Error::domain("the + branch needs j >= 1/2".to_string())
        })?;
        if label.two_m.unsigned_abs() > two_total || (two_total as i32 - label.two_m) % 2 != 0 {
            return Err(Error::domain(format!(
                "2m = {} is not a projection of 2J = {two_total}",
                label.two_m
            )));
        }
        let mut out = vec![0.0; 2 << self.n_ports];
        for spin in HalfSpin::BOTH {
            let two_m_a = label.two_m - spin.two_m();
            if two_m_a.unsigned_abs() > two_j {
                continue;
            }
            let c = cg_half(two_j, two_m_a, spin, two_total)?.to_f64();
            if c == 0.0 {
                continue;
            }
            let phi = self.basis.vector(&label.path, two_m_a)?;
            for (x, &p) in phi.iter().enumerate() {
                out[2 * x + spin.qubit()] += c * p;
            }
        }
        Ok(out)
    }

    /// Every eigenvector label, grouped by `(j, α)`.
    pub fn labels(&self) -> Vec<PsiLabel> {
        let mut out = Vec::with_capacity(2 << self.n_ports);
        for label in self.basis.labels() {
            // one (j, α) block per path; emit once, at m = j
            if label.two_m != label.two_j as i32 {
                continue;
            }
            for branch in [Branch::Minus, Branch::Plus] {
                let proto = PsiLabel {
                    branch,
                    path: label.path.clone(),
                    two_m: 0,
                };
                let Some(two_total) = proto.two_total() else {
                    continue;
                };
                for two_m in (-(two_total as i32)..=two_total as i32).step_by(2) {
                    out.push(PsiLabel {
                        two_m,
                        ..proto.clone()
                    });
                }
            }
        }
        out
    }

    /// `Σ f(λ) |Ψ⟩⟨Ψ|` over all eigenvectors.
    pub fn spectral_function(&self, f: impl Fn(f64) -> f64) -> Result<RMatrix> {
        let labels = self.labels();
        let dim = 2 << self.n_ports;
        // columns scaled by sqrt|f|, then V_+ V_+^T - V_- V_-^T
        let mut pos = RMatrix::zeros(dim, labels.len());
        let mut neg = RMatrix::zeros(dim, labels.len());
        for (k, label) in labels.iter().enumerate() {
            let w = f(self.eigenvalue(label));
            if w == 0.0 {
                continue;
            }
            let v = self.vector(label)?;
            let target = if w > 0.0 { &mut pos } else { &mut neg };
            let a = w.abs().sqrt();
            for (r, x) in v.iter().enumerate() {
                target[(r, k)] = a * x;
            }
        }
        let mut out = pos.matmul(&pos.transpose());
        if neg.max_abs() > 0.0 {
            out -= &neg.matmul(&neg.transpose());
        }
        Ok(out)
    }

    /// `ρ^{-½}` on the support of `ρ`, from the analytic eigenpairs.
    pub fn inv_sqrt_rho(&self, rank_tol: f64) -> Result<CMatrix> {
        Ok(self
            .spectral_function(|l| if l > rank_tol { l.powf(-0.5) } else { 0.0 })?
            .to_complex())
    }
}

pub fn psi_eigenvector(n_ports: usize, label: &PsiLabel) -> Result<Vec<f64>> {
    RhoEigenbasis::new(n_ports)?.vector(label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, inner};
    use crate::protocol::signals::{signal_states, Convention};

    #[test]
    fn two_port_spectrum() {
        let s = rho_spectrum(2).unwrap();
        let find = |b, j| {
            s.entries
                .iter()
                .find(|e| e.branch == b && e.two_j == j)
                .unwrap()
                .clone()
        };
        let e = find(Branch::Minus, 0);
        assert_eq!((e.eigenvalue, e.degeneracy), (0.25, 2));
        let e = find(Branch::Minus, 2);
        assert_eq!((e.eigenvalue, e.degeneracy), (0.0, 4));
        let e = find(Branch::Plus, 2);
        assert_eq!((e.eigenvalue, e.degeneracy), (0.75, 2));
        assert_eq!(find(Branch::Plus, 0).degeneracy, 0);
    }

    #[test]
    fn degeneracies_and_trace() {
        for n in 1..=40 {
            let s = rho_spectrum(n).unwrap();
            assert_eq!(s.total_degeneracy(), 2u64 << n);
            assert!((s.trace() - n as f64).abs() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn matches_dense_diagonalization() {
        for n in 1..=6 {
            let states = signal_states(n, 2, Convention::Singlet).unwrap();
            let dense = eigh(&states.rho().matrix().real_part()).unwrap();
            let analytic = rho_spectrum(n).unwrap().sorted_eigenvalues();
            for (a, b) in dense.eigenvalues.iter().zip(&analytic) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_eigenvectors() {
        for n in 1..=5 {
            let basis = RhoEigenbasis::new(n).unwrap();
            let rho = signal_states(n, 2, Convention::Singlet)
                .unwrap()
                .rho()
                .matrix()
                .real_part();
            let labels = basis.labels();
            assert_eq!(labels.len(), 2 << n);
            let vecs: Vec<Vec<f64>> = labels.iter().map(|l| basis.vector(l).unwrap()).collect();
            for (l, v) in labels.iter().zip(&vecs) {
                let rv = rho.matvec(v);
                let lambda = basis.eigenvalue(l);
                let dev = rv
                    .iter()
                    .zip(v)
                    .map(|(a, b)| (a - lambda * b).abs())
                    .fold(0.0, f64::max);
                assert!(dev < 1e-13, "n={n} {l:?}");
            }
            for a in 0..vecs.len() {
                for b in 0..vecs.len() {
                    let g = inner(&vecs[a], &vecs[b]);
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn analytic_inverse_square_root() {
        for n in 1..=5 {
            let states = signal_states(n, 2, Convention::Singlet).unwrap();
            let analytic = RhoEigenbasis::new(n).unwrap().inv_sqrt_rho(1e-12).unwrap();
            let dense = states.rho().inv_sqrt_on_support(1e-12).unwrap();
            assert!(analytic.max_abs_diff(dense.matrix()) < 1e-12);
        }
    }

    #[test]
    fn invalid_labels() {
        let basis = RhoEigenbasis::new(2).unwrap();
        let plus_at_zero = PsiLabel {
            branch: Branch::Plus,
            path: vec![1, 0],
            two_m: 0,
        };
        assert!(basis.vector(&plus_at_zero).is_err());
        let too_high = PsiLabel {
            branch: Branch::Minus,
            path: vec![1, 2],
            two_m: 5,
        };
        assert!(basis.vector(&too_high).is_err());
    }
}
