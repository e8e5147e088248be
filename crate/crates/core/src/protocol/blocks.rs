use super::signals::{check_ports, signal_states, Convention, SignalStateSet};
use super::spectrum::{rho_eigenvalue, Branch};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex64, DEFAULT_RANK_TOL};
use crate::su2::{allowed_two_j, CoupledBasis, SpinLabel, MAX_SPINS};

fn check_sector(n_ports: usize, two_s: u32) -> Result<()> {
    let rest = n_ports - 1;
    if two_s as usize > rest || (rest - two_s as usize) % 2 != 0 {
        return Err(Error::domain(format!(
            "2s = {two_s} is not a total spin of {rest} spins"
        )));
    }
    Ok(())
}

/// `c(s) = (λ-_{s-½})^{-½} s/(2s+1) + (λ+_{s+½})^{-½} (s+1)/(2s+1)`, the
/// diagonal value of `ρ^{-½}` between `ξ` vectors with `Ā_i` in spin `s`.
/// At `s = 0` the first term carries weight zero and is dropped.
pub fn c_coefficient(n_ports: usize, two_s: u32) -> Result<f64> {
    check_ports(n_ports, 2)?;
    check_sector(n_ports, two_s)?;
    let s = f64::from(two_s) / 2.0;
    let w = 2.0 * s + 1.0;
    let lower = if two_s == 0 {
        0.0
    } else {
        rho_eigenvalue(n_ports, Branch::Minus, two_s - 1).powf(-0.5) * s / w
    };
    let upper = rho_eigenvalue(n_ports, Branch::Plus, two_s + 1).powf(-0.5) * (s + 1.0) / w;
    Ok(lower + upper)
}

/// The vectors `|ξ(i)(s, s_z, α)⟩ = |ψ-⟩_{B A_i} |Φ(s, s_z, α)⟩_{Ā_i}` on
/// `[A1, …, AN, B]`, with the `N - 1` spins of `Ā_i` coupled in ascending
/// port order.
#[derive(Clone, Debug)]
pub struct XiBasis {
    n_ports: usize,
    rest: Option<CoupledBasis>,
}

impl XiBasis {
    pub fn new(n_ports: usize) -> Result<Self> {
        check_ports(n_ports, 2)?;
        if n_ports > MAX_SPINS {
            return Err(Error::resource(format!("limited to N <= {MAX_SPINS}")));
        }
        let rest = if n_ports > 1 {
            Some(CoupledBasis::build(n_ports - 1)?)
        } else {
            None
        };
        Ok(XiBasis { n_ports, rest })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    /// Labels of `Ā_i`; a single empty-path label when `N = 1`.
    pub fn labels(&self) -> Vec<SpinLabel> {
        match &self.rest {
            Some(b) => b.labels().to_vec(),
            None => vec![SpinLabel {
                two_j: 0,
                two_m: 0,
                path: Vec::new(),
            }],
        }
    }

    pub fn vector(&self, port: usize, label: &SpinLabel) -> Result<Vec<Complex64>> {
        let n = self.n_ports;
        if port == 0 || port > n {
            return Err(Error::domain(format!("port {port} outside 1..={n}")));
        }
        let phi: Vec<f64> = match &self.rest {
            Some(b) => b.get(label)?.to_vec(),
            None => {
                if !label.path.is_empty() || label.two_m != 0 || label.two_j != 0 {
                    return Err(Error::domain("a single port leaves no spins behind"));
                }
                vec![1.0]
            }
        };
        let amp = 0.5_f64.sqrt();
        let mut out = vec![Complex64::new(0.0, 0.0); 2 << n];
        // bit of A_k within the [A1 … AN, B] index: A1 is most significant
        let a_shift = |k: usize| n + 1 - k;
        for (y, &p) in phi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            // scatter the N - 1 bits of y onto the ports other than `port`
            let mut base = 0usize;
            let mut pos = n - 1;
            for k in (1..=n).filter(|&k| k != port) {
                pos -= 1;
                if (y >> pos) & 1 == 1 {
                    base |= 1 << a_shift(k);
                }
            }
            // ψ- on (B, A_i): +|0⟩_B|1⟩_{A_i} - |1⟩_B|0⟩_{A_i}
            let with_ai = base | (1 << a_shift(port));
            let with_b = base | 1;
            out[with_ai] += Complex64::new(amp * p, 0.0);
            out[with_b] -= Complex64::new(amp * p, 0.0);
        }
        Ok(out)
    }
}

/// Dense `⟨ξ(i)|ρ^{-½}|ξ(i)'⟩` with `ρ^{-½}` from a numerical
/// diagonalization of `ρ`, independent of the analytic spectrum.
#[derive(Clone, Debug)]
pub struct MatrixElementOracle {
    xi: XiBasis,
    inv_sqrt_rho: CMatrix,
}

impl MatrixElementOracle {
    pub fn new(n_ports: usize) -> Result<Self> {
        let states = signal_states(n_ports, 2, Convention::Singlet)?;
        Self::from_states(&states)
    }

    pub fn from_states(states: &SignalStateSet) -> Result<Self> {
        if states.qudit_dim != 2 || states.convention != Convention::Singlet {
            return Err(Error::domain("matrix elements need qubit singlet signals"));
        }
        Ok(MatrixElementOracle {
            xi: XiBasis::new(states.n_ports)?,
            inv_sqrt_rho: states
                .rho()
                .inv_sqrt_on_support(DEFAULT_RANK_TOL)?
                .into_matrix(),
        })
    }

    pub fn xi_basis(&self) -> &XiBasis {
        &self.xi
    }

    pub fn element(&self, port: usize, a: &SpinLabel, b: &SpinLabel) -> Result<Complex64> {
        let u = self.xi.vector(port, a)?;
        let v = self.xi.vector(port, b)?;
        Ok(crate::linalg::inner(&u, &self.inv_sqrt_rho.matvec(&v)))
    }

    /// All elements for one port, rows and columns in `labels()` order.
    pub fn table(&self, port: usize) -> Result<(Vec<SpinLabel>, CMatrix)> {
        let labels = self.xi.labels();
        let vecs: Vec<Vec<Complex64>> = labels
            .iter()
            .map(|l| self.xi.vector(port, l))
            .collect::<Result<_>>()?;
        let images: Vec<Vec<Complex64>> =
            vecs.iter().map(|v| self.inv_sqrt_rho.matvec(v)).collect();
        let k = labels.len();
        let table = CMatrix::from_fn(k, k, |a, b| crate::linalg::inner(&vecs[a], &images[b]));
        Ok((labels, table))
    }

    /// Largest deviation of a port's table from `δ_{s s'} δ_{s_z s_z'} δ_{α α'} c(s)`.
    pub fn max_deviation(&self, port: usize) -> Result<f64> {
        let (labels, table) = self.table(port)?;
        let mut worst = 0.0_f64;
        for (a, la) in labels.iter().enumerate() {
            for (b, lb) in labels.iter().enumerate() {
                let want = if la == lb {
                    c_coefficient(self.xi.n_ports, la.two_j)?
                } else {
                    0.0
                };
                worst = worst.max((table[(a, b)] - want).norm());
            }
        }
        Ok(worst)
    }
}

/// One dense matrix element `Re ⟨ξ(i)(label)|ρ^{-½}|ξ(i)(label')⟩`.
pub fn matrix_element_check(
    n_ports: usize,
    port: usize,
    label: &SpinLabel,
    label_prime: &SpinLabel,
) -> Result<f64> {
    Ok(MatrixElementOracle::new(n_ports)?
        .element(port, label, label_prime)?
        .re)
}

/// Allowed doubled spins of the `N - 1` spins left after removing a port.
pub fn block_spins(n_ports: usize) -> impl Iterator<Item = u32> {
    allowed_two_j(n_ports - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, norm};

    #[test]
    fn two_port_half_spin_value() {
        let c = c_coefficient(2, 1).unwrap();
        // 2·(1/4) + (2/√3)·(3/4)
        let want = 0.5 + 1.5 / 3f64.sqrt();
        assert!((c - want).abs() < 1e-15);
        assert!((c - 1.3660254).abs() < 1e-7);
    }

    #[test]
    fn three_port_singlet_sector() {
        // only the + term: λ+ at j = ½ is (3/2 + ½ + 1)/8 = 3/8
        let c = c_coefficient(3, 0).unwrap();
        assert!((c - (3.0f64 / 8.0).powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn invalid_sector() {
        assert!(c_coefficient(3, 1).is_err());
        assert!(c_coefficient(3, 4).is_err());
    }

    #[test]
    fn xi_are_orthonormal_signal_eigenvectors() {
        for n in 1..=5 {
            let states = signal_states(n, 2, Convention::Singlet).unwrap();
            let xi = XiBasis::new(n).unwrap();
            let want = 0.5_f64.powi(n as i32 - 1);
            for port in 1..=n {
                let vecs: Vec<_> = xi
                    .labels()
                    .iter()
                    .map(|l| xi.vector(port, l).unwrap())
                    .collect();
                for v in &vecs {
                    let sv = states.sigma(port).matvec(v);
                    let res = sv
                        .iter()
                        .zip(v)
                        .map(|(a, b)| (a - b * want).norm())
                        .fold(0.0, f64::max);
                    assert!(res < 1e-12);
                }
                for (a, u) in vecs.iter().enumerate() {
                    for (b, v) in vecs.iter().enumerate() {
                        let g = inner(u, v);
                        let want = if a == b { 1.0 } else { 0.0 };
                        assert!((g.re - want).abs() < 1e-12 && g.im.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn two_port_xi_is_a_product() {
        let xi = XiBasis::new(2).unwrap();
        let label = SpinLabel::new(1, vec![1]).unwrap();
        let v = xi.vector(1, &label).unwrap();
        assert!((norm(&v) - 1.0).abs() < 1e-15);
        // |ψ-⟩_{B A1} |1⟩_{A2} in [A1, A2, B]: +|1 1 0⟩ - |0 1 1⟩
        let a = 0.5_f64.sqrt();
        assert!((v[0b110].re - a).abs() < 1e-15);
        assert!((v[0b011].re + a).abs() < 1e-15);
    }

    #[test]
    fn small_tables_match_the_delta_form() {
        for n in 1..=4 {
            let oracle = MatrixElementOracle::new(n).unwrap();
            for port in 1..=n {
                assert!(oracle.max_deviation(port).unwrap() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn single_element_entry_point() {
        let a = SpinLabel::new(1, vec![1]).unwrap();
        let b = SpinLabel::new(-1, vec![1]).unwrap();
        let diag = matrix_element_check(2, 2, &a, &a).unwrap();
        assert!((diag - c_coefficient(2, 1).unwrap()).abs() < 1e-10);
        assert!(matrix_element_check(2, 2, &a, &b).unwrap().abs() < 1e-12);
    }
}
