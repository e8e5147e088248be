//! Labeled tensor-product spaces and the index gymnastics on them:
//! partial traces, factor permutations, embeddings and local operator action.
//!
//! Basis ordering is row-major over the factor list: the first factor is the
//! most significant digit.

use serde::{Deserialize, Serialize};

use super::{Matrix, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpace {
    factors: Vec<Factor>,
}

impl TensorSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out: Vec<Factor> = Vec::new();
        for (label, dim) in factors {
            let label = label.into();
            if dim == 0 {
                return Err(Error::validation(format!("factor `{label}` has dimension 0")));
            }
            if out.iter().any(|f| f.label == label) {
                return Err(Error::DuplicateLabel(label));
            }
            out.push(Factor { label, dim });
        }
        Ok(TensorSpace { factors: out })
    }

    /// `n` factors of dimension `dim` named `{prefix}1 … {prefix}n`.
    pub fn uniform(prefix: &str, n: usize, dim: usize) -> Self {
        TensorSpace {
            factors: (1..=n)
                .map(|k| Factor {
                    label: format!("{prefix}{k}"),
                    dim,
                })
                .collect(),
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.position(label)?].dim)
    }

    /// Concatenation `self ⊗ other`; labels must stay unique.
    pub fn concat(&self, other: &TensorSpace) -> Result<TensorSpace> {
        TensorSpace::new(
            self.factors
                .iter()
                .chain(&other.factors)
                .map(|f| (f.label.clone(), f.dim)),
        )
    }

    /// The sub-space of the given labels, in this space's order.
    pub fn restrict(&self, keep: &[&str]) -> Result<TensorSpace> {
        for l in keep {
            self.position(l)?;
        }
        Ok(TensorSpace {
            factors: self
                .factors
                .iter()
                .filter(|f| keep.contains(&f.label.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// Same dims, factor `from` renamed to `to`.
    pub fn relabel(&self, from: &str, to: &str) -> Result<TensorSpace> {
        let pos = self.position(from)?;
        let mut f = self.factors.clone();
        f[pos].label = to.to_string();
        TensorSpace::new(f.into_iter().map(|x| (x.label, x.dim)))
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.factors[k + 1].dim;
        }
        s
    }

    /// For each multi-index over `positions` (row-major over those factors),
    /// the linear offset it contributes in the full space.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offs = vec![0usize];
        for &p in positions {
            let d = self.factors[p].dim;
            let mut next = Vec::with_capacity(offs.len() * d);
            for &o in &offs {
                for k in 0..d {
                    next.push(o + k * strides[p]);
                }
            }
            offs = next;
        }
        offs
    }

    /// Basis-index map for reordering factors: entry `i` is the index in
    /// `self` of basis vector `i` in the reordered space.
    fn permutation_map(&self, order: &[&str]) -> Result<(TensorSpace, Vec<usize>)> {
        if order.len() != self.factors.len() {
            return Err(Error::validation(format!(
                "permutation lists {} labels for a {}-factor space",
                order.len(),
                self.factors.len()
            )));
        }
        let positions = order
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        let new_space = TensorSpace::new(
            positions
                .iter()
                .map(|&p| (self.factors[p].label.clone(), self.factors[p].dim)),
        )?;
        Ok((new_space, self.offsets(&positions)))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                got: n,
            });
        }
        Ok(())
    }
}

/// Traces out every factor not in `keep`; the result lives on the kept
/// factors in their original relative order.
pub fn partial_trace<T: Scalar>(
    m: &Matrix<T>,
    space: &TensorSpace,
    keep: &[&str],
) -> Result<(Matrix<T>, TensorSpace)> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    space.check_dim(m.rows())?;
    let kept_space = space.restrict(keep)?;
    let kept: Vec<usize> = (0..space.len())
        .filter(|&p| keep.contains(&space.factors[p].label.as_str()))
        .collect();
    let traced: Vec<usize> = (0..space.len()).filter(|p| !kept.contains(p)).collect();
    let ko = space.offsets(&kept);
    let to = space.offsets(&traced);
    let n = m.cols();
    let data = m.data();
    let out = Matrix::from_fn(ko.len(), ko.len(), |r, c| {
        let mut acc = T::zero();
        for &t in &to {
            acc += data[(ko[r] + t) * n + ko[c] + t];
        }
        acc
    });
    Ok((out, kept_space))
}

/// Reorders the tensor factors of an operator to `order`.
pub fn permute<T: Scalar>(
    m: &Matrix<T>,
    space: &TensorSpace,
    order: &[&str],
) -> Result<(Matrix<T>, TensorSpace)> {
    space.check_dim(m.rows())?;
    let (new_space, map) = space.permutation_map(order)?;
    let out = Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(map[i], map[j])]);
    Ok((out, new_space))
}

/// Reorders the tensor factors of a state vector to `order`.
pub fn permute_vector<T: Scalar>(
    v: &[T],
    space: &TensorSpace,
    order: &[&str],
) -> Result<(Vec<T>, TensorSpace)> {
    space.check_dim(v.len())?;
    let (new_space, map) = space.permutation_map(order)?;
    Ok((map.iter().map(|&i| v[i]).collect(), new_space))
}

/// `op ⊗ 1` where `op` acts on the listed factors (in the listed order),
/// arranged in the factor order of `space`.
pub fn embed<T: Scalar>(op: &Matrix<T>, on: &[&str], space: &TensorSpace) -> Result<Matrix<T>> {
    let sub = TensorSpace::new(
        on.iter()
            .map(|l| Ok((l.to_string(), space.dim_of(l)?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    sub.check_dim(op.rows())?;
    let rest: Vec<&str> = space
        .labels()
        .into_iter()
        .filter(|l| !on.contains(l))
        .collect();
    let rest_space = space.restrict(&rest)?;
    let full = op.kron(&Matrix::identity(rest_space.total_dim()));
    let staged = sub.concat(&rest_space)?;
    let order = space.labels();
    Ok(permute(&full, &staged, &order)?.0)
}

/// `(op ⊗ 1) · m` with `op` acting on the listed factors, without forming
/// the full-space operator.
pub fn apply_left<T: Scalar>(
    op: &Matrix<T>,
    on: &[&str],
    m: &Matrix<T>,
    space: &TensorSpace,
) -> Result<Matrix<T>> {
    space.check_dim(m.rows())?;
    let on_pos = on
        .iter()
        .map(|l| space.position(l))
        .collect::<Result<Vec<_>>>()?;
    let rest: Vec<usize> = (0..space.len()).filter(|p| !on_pos.contains(p)).collect();
    let oo = space.offsets(&on_pos);
    let ro = space.offsets(&rest);
    if op.rows() != oo.len() || op.cols() != oo.len() {
        return Err(Error::DimensionMismatch {
            expected: oo.len(),
            got: op.rows(),
        });
    }
    let cols = m.cols();
    let src = m.data();
    let mut out = Matrix::zeros(m.rows(), cols);
    let dst = out.data_mut();
    for &r in &ro {
        for (a, &oa) in oo.iter().enumerate() {
            let drow = (oa + r) * cols;
            for (b, &ob) in oo.iter().enumerate() {
                let coef = op[(a, b)];
                if coef == T::zero() {
                    continue;
                }
                let srow = (ob + r) * cols;
                for c in 0..cols {
                    dst[drow + c] += coef * src[srow + c];
                }
            }
        }
    }
    Ok(out)
}

/// `(op ⊗ 1) m (op ⊗ 1)†`
pub fn conjugate_local<T: Scalar>(
    op: &Matrix<T>,
    on: &[&str],
    m: &Matrix<T>,
    space: &TensorSpace,
) -> Result<Matrix<T>> {
    let left = apply_left(op, on, m, space)?;
    let both = apply_left(op, on, &left.adjoint(), space)?;
    Ok(both.adjoint())
}

/// `(op ⊗ 1)|v⟩`
pub fn apply_to_vector<T: Scalar>(
    op: &Matrix<T>,
    on: &[&str],
    v: &[T],
    space: &TensorSpace,
) -> Result<Vec<T>> {
    let col = Matrix::from_vec(v.len(), 1, v.to_vec())?;
    Ok(apply_left(op, on, &col, space)?.into_data())
}
