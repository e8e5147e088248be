use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Complex64, RMatrix};
use crate::protocol::{check_ports, checked_dim, signal_states, Convention};

/// Largest `d^(N+1)` solved without an explicit override.
pub const REQUIRED_TIER_DIM: usize = 32;

/// Largest `d^(N+1)` accepted with the override.
pub const OVERRIDE_TIER_DIM: usize = 64;

/// One element of the orthonormal Hermitian basis of `n x n` matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisElement {
    /// `|a⟩⟨a|`
    Diagonal(usize),
    /// `(|a⟩⟨b| + |b⟩⟨a|)/√2`, `a < b`
    Symmetric(usize, usize),
    /// `(-i|a⟩⟨b| + i|b⟩⟨a|)/√2`, `a < b`
    Antisymmetric(usize, usize),
}

impl BasisElement {
    /// Nonzero entries `(row, col, value)`.
    pub fn entries(self) -> Vec<(usize, usize, Complex64)> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BasisElement::Diagonal(a) => vec![(a, a, Complex64::new(1.0, 0.0))],
            BasisElement::Symmetric(a, b) => {
                vec![(a, b, Complex64::new(r, 0.0)), (b, a, Complex64::new(r, 0.0))]
            }
            BasisElement::Antisymmetric(a, b) => {
                vec![(a, b, Complex64::new(0.0, -r)), (b, a, Complex64::new(0.0, r))]
            }
        }
    }

    pub fn to_matrix(self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }
}

/// The `n²` elements, ordered by `(a, b)` with `a <= b`.
pub fn hermitian_basis(dim: usize) -> Vec<BasisElement> {
    let mut out = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        out.push(BasisElement::Diagonal(a));
        for b in a + 1..dim {
            out.push(BasisElement::Symmetric(a, b));
            out.push(BasisElement::Antisymmetric(a, b));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: Complex64,
}

/// `Σ_blocks tr(A_b X_b) = rhs`, with every `A_b` Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualityConstraint {
    pub entries: Vec<SparseEntry>,
    pub rhs: f64,
}

/// The general-resource program for `N` ports: maximize
/// `(1/d²) Σ_i tr(Π̃_i σ(i))` over `Π̃_i ⪰ 0`, `X ⪰ 0` with
/// `Σ_i Π̃_i = X ⊗ 1_B` and `tr X = d^N`.
///
/// Blocks `0..N` hold `Π̃_i` on `[A1, …, AN, B]`; block `N` holds `X` on
/// the ports. The first `d^{2(N+1)}` constraints pair with
/// [`hermitian_basis`] of the full space; the last fixes `tr X`.
#[derive(Clone, Debug)]
pub struct SdpInstance {
    pub n_ports: usize,
    pub qudit_dim: usize,
    pub convention: Convention,
    pub block_dims: Vec<usize>,
    pub objective: Vec<CMatrix>,
    pub constraints: Vec<EqualityConstraint>,
    pub basis: Vec<BasisElement>,
}

pub fn build_primary(n_ports: usize, qudit_dim: usize, override_size_cap: bool) -> Result<SdpInstance> {
    check_ports(n_ports, qudit_dim)?;
    let cap = if override_size_cap {
        OVERRIDE_TIER_DIM
    } else {
        REQUIRED_TIER_DIM
    };
    let dim = checked_dim(n_ports, qudit_dim, cap).map_err(|_| {
        Error::resource(format!(
            "SDP for N = {n_ports}, d = {qudit_dim} exceeds d^(N+1) <= {cap}{}",
            if override_size_cap {
                ""
            } else {
                " (the size-cap override raises it to 64)"
            }
        ))
    })?;
    let d = qudit_dim;
    let a_dim = dim / d;
    let convention = Convention::default_for(d);
    let states = signal_states(n_ports, d, convention)?;
    let scale = 1.0 / (d * d) as f64;
    let mut objective: Vec<CMatrix> = (1..=n_ports).map(|i| states.sigma(i).scale(scale)).collect();
    objective.push(CMatrix::zeros(a_dim, a_dim));
    let mut block_dims = vec![dim; n_ports];
    block_dims.push(a_dim);

    let basis = hermitian_basis(dim);
    let mut constraints = Vec::with_capacity(basis.len() + 1);
    for h in &basis {
        let h_entries = h.entries();
        let mut entries = Vec::with_capacity(h_entries.len() * (n_ports + 1));
        for block in 0..n_ports {
            entries.extend(h_entries.iter().map(|&(row, col, value)| SparseEntry {
                block,
                row,
                col,
                value,
            }));
        }
        // -tr_B H on the X block; B is the last (fastest) factor
        for &(row, col, value) in &h_entries {
            if row % d == col % d {
                entries.push(SparseEntry {
                    block: n_ports,
                    row: row / d,
                    col: col / d,
                    value: -value,
                });
            }
        }
        constraints.push(EqualityConstraint { entries, rhs: 0.0 });
    }
    constraints.push(EqualityConstraint {
        entries: (0..a_dim)
            .map(|k| SparseEntry {
                block: n_ports,
                row: k,
                col: k,
                value: Complex64::new(1.0, 0.0),
            })
            .collect(),
        rhs: a_dim as f64,
    });
    let instance = SdpInstance {
        n_ports,
        qudit_dim,
        convention,
        block_dims,
        objective,
        constraints,
        basis,
    };
    instance.validate()?;
    Ok(instance)
}

impl SdpInstance {
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Checks block dimensions and that every coefficient matrix is Hermitian.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.block_dims.len() {
            return Err(Error::validation("one objective matrix per block"));
        }
        for (c, &n) in self.objective.iter().zip(&self.block_dims) {
            if c.rows() != n || c.cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.rows(),
                });
            }
            if c.hermiticity_defect() > 1e-12 {
                return Err(Error::NotHermitian(c.hermiticity_defect()));
            }
        }
        for con in &self.constraints {
            for e in &con.entries {
                let n = *self.block_dims.get(e.block).ok_or_else(|| {
                    Error::validation(format!("constraint refers to block {}", e.block))
                })?;
                if e.row >= n || e.col >= n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: e.row.max(e.col) + 1,
                    });
                }
                let mirrored = con.entries.iter().any(|f| {
                    f.block == e.block
                        && f.row == e.col
                        && f.col == e.row
                        && (f.value - e.value.conj()).norm() <= 1e-15
                });
                if !mirrored {
                    return Err(Error::NotHermitian((e.value - e.value.conj()).norm()));
                }
            }
        }
        Ok(())
    }

    /// `Σ_b tr(A_b X_b)` for constraint `k` at complex block values.
    pub fn constraint_value(&self, k: usize, blocks: &[CMatrix]) -> f64 {
        self.constraints[k]
            .entries
            .iter()
            .map(|e| (e.value * blocks[e.block][(e.col, e.row)]).re)
            .sum()
    }

    pub fn objective_value(&self, blocks: &[CMatrix]) -> f64 {
        self.objective
            .iter()
            .zip(blocks)
            .map(|(c, x)| c.trace_product(x).re)
            .sum()
    }

    /// Largest absolute equality residual.
    pub fn primal_residual(&self, blocks: &[CMatrix]) -> f64 {
        (0..self.constraints.len())
            .map(|k| (self.constraint_value(k, blocks) - self.constraints[k].rhs).abs())
            .fold(0.0, f64::max)
    }

    /// The same program over real symmetric blocks of twice the size, using
    /// `tr(H X) = ½ tr(R(H) R(X))` with `R(M) = [[Re M, -Im M], [Im M, Re M]]`.
    pub fn realify(&self) -> RealSdp {
        let block_dims: Vec<usize> = self.block_dims.iter().map(|n| 2 * n).collect();
        let objective: Vec<RMatrix> = self
            .objective
            .iter()
            .map(|c| c.realify().scale(0.5))
            .collect();
        let constraints = self
            .constraints
            .iter()
            .map(|con| {
                let mut entries = Vec::with_capacity(2 * con.entries.len());
                for e in &con.entries {
                    let n = self.block_dims[e.block];
                    let (re, im) = (0.5 * e.value.re, 0.5 * e.value.im);
                    let mut push = |row: usize, col: usize, value: f64| {
                        if value != 0.0 {
                            entries.push(RealEntry {
                                block: e.block,
                                row,
                                col,
                                value,
                            });
                        }
                    };
                    push(e.row, e.col, re);
                    push(e.row + n, e.col + n, re);
                    push(e.row, e.col + n, -im);
                    push(e.row + n, e.col, im);
                }
                entries.sort_by_key(|e| (e.block, e.row, e.col));
                entries
            })
            .collect();
        RealSdp {
            block_dims,
            objective,
            constraints,
            rhs: self.constraints.iter().map(|c| c.rhs).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// `max Σ_b ⟨C_b, X_b⟩` subject to `Σ_b ⟨A_kb, X_b⟩ = b_k`, `X_b ⪰ 0`, with
/// symmetric `A_kb` stored as full (both triangles) sparse entry lists.
#[derive(Clone, Debug)]
pub struct RealSdp {
    pub block_dims: Vec<usize>,
    pub objective: Vec<RMatrix>,
    pub constraints: Vec<Vec<RealEntry>>,
    pub rhs: Vec<f64>,
}

impl RealSdp {
    /// `A(X)`.
    pub fn apply(&self, x: &[RMatrix]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|entries| {
                entries
                    .iter()
                    .map(|e| e.value * x[e.block][(e.row, e.col)])
                    .sum()
            })
            .collect()
    }

    /// `A*(y) = Σ_k y_k A_k`.
    pub fn adjoint(&self, y: &[f64]) -> Vec<RMatrix> {
        let mut out: Vec<RMatrix> = self.block_dims.iter().map(|&n| RMatrix::zeros(n, n)).collect();
        for (entries, &yk) in self.constraints.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for e in entries {
                out[e.block][(e.row, e.col)] += yk * e.value;
            }
        }
        out
    }
}
