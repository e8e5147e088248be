use std::collections::HashMap;

use super::cg::{cg_half, HalfSpin};
use crate::error::{Error, Result};
use crate::linalg::{permute_vector, RMatrix, TensorSpace};

/// Largest spin count for which a dense coupled basis is built.
pub const MAX_SPINS: usize = 12;

/// Irrep label `(j, m, α)` of an n-spin state, doubled.
///
/// `path` lists the total spin after coupling each spin in turn; it starts at
/// 1 and ends at `two_j`, and stands for the degeneracy label α.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinLabel {
    pub two_j: u32,
    pub two_m: i32,
    pub path: Vec<u32>,
}

impl SpinLabel {
    pub fn new(two_m: i32, path: Vec<u32>) -> Result<Self> {
        let label = SpinLabel {
            two_j: path.last().copied().unwrap_or(0),
            two_m,
            path,
        };
        label.validate()?;
        Ok(label)
    }

    pub fn n_spins(&self) -> usize {
        self.path.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::domain(format!("invalid spin label {self:?}: {why}")));
        if self.path.first() != Some(&1) {
            return bad("path must start at 2j = 1");
        }
        if self.path.windows(2).any(|w| w[0].abs_diff(w[1]) != 1) {
            return bad("consecutive path entries must differ by one");
        }
        if self.path.last() != Some(&self.two_j) {
            return bad("path must end at 2j");
        }
        if self.two_m.unsigned_abs() > self.two_j || (self.two_j as i32 - self.two_m) % 2 != 0 {
            return bad("m is not a projection of j");
        }
        Ok(())
    }
}

/// All coupling paths of `n` spins ending at `two_j`, in lexicographic order.
pub fn coupling_paths(n: usize, two_j: u32) -> Vec<Vec<u32>> {
    fn extend(n: usize, target: u32, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let len = path.len();
        let last = *path.last().unwrap();
        if len == n {
            if last == target {
                out.push(path.clone());
            }
            return;
        }
        let remaining = (n - len) as u32;
        for next in [last.wrapping_sub(1), last + 1] {
            if next > last + 1 || next.abs_diff(target) > remaining - 1 {
                continue;
            }
            path.push(next);
            extend(n, target, path, out);
            path.pop();
        }
    }
    if n == 0 || two_j as usize > n || (n - two_j as usize) % 2 != 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    extend(n, two_j, &mut vec![1], &mut out);
    out
}

/// Allowed doubled total spins of `n` spin-½ particles, ascending.
pub fn allowed_two_j(n: usize) -> impl Iterator<Item = u32> {
    ((n % 2) as u32..=n as u32).step_by(2)
}

/// Number of copies of the spin-`s` irrep in `n` spin-½ particles:
/// `(2s+1) n! / ((n/2 - s)! (n/2 + s + 1)!)`.
pub fn multiplicity(n: usize, two_s: u32) -> Result<u64> {
    let two_s_u = two_s as usize;
    if two_s_u > n || (n - two_s_u) % 2 != 0 {
        return Err(Error::domain(format!(
            "2s = {two_s} is not an allowed total spin of {n} spins"
        )));
    }
    let a = (n - two_s_u) / 2;
    // n!/(a! (n+1-a)!) = C(n+1, a) / (n+1)
    let binom = num_integer::binomial((n + 1) as u128, a as u128);
    Ok(((two_s as u128 + 1) * binom / (n as u128 + 1)) as u64)
}

/// The irreducible basis `|Φ(j, m, α)⟩` of n qubits, built by coupling the
/// qubits one at a time in `order`.
///
/// Vectors are expressed in the computational basis of qubits `1..=n` with
/// qubit 1 most significant and `|0⟩ ↔ m = -½`, `|1⟩ ↔ m = +½`.
#[derive(Clone, Debug)]
pub struct CoupledBasis {
    n: usize,
    order: Vec<usize>,
    labels: Vec<SpinLabel>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<(Vec<u32>, i32), usize>,
}

impl CoupledBasis {
    /// Canonical basis: qubits coupled in ascending order.
    pub fn build(n: usize) -> Result<Self> {
        Self::build_with_order(n, &(1..=n).collect::<Vec<_>>())
    }

    /// Basis from coupling qubits in the given order (a permutation of `1..=n`).
    pub fn build_with_order(n: usize, order: &[usize]) -> Result<Self> {
        if n == 0 || n > MAX_SPINS {
            return Err(Error::domain(format!(
                "spin count {n} outside 1..={MAX_SPINS}"
            )));
        }
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (1..=n).collect::<Vec<_>>() {
            return Err(Error::domain(format!(
                "coupling order {order:?} is not a permutation of 1..={n}"
            )));
        }

        // states in the coupling order (first coupled qubit most significant)
        let mut states: Vec<(SpinLabel, Vec<f64>)> = vec![
            (SpinLabel::new(-1, vec![1])?, vec![1.0, 0.0]),
            (SpinLabel::new(1, vec![1])?, vec![0.0, 1.0]),
        ];
        for _ in 1..n {
            let lookup: HashMap<(Vec<u32>, i32), usize> = states
                .iter()
                .enumerate()
                .map(|(k, (l, _))| ((l.path.clone(), l.two_m), k))
                .collect();
            let parents: Vec<Vec<u32>> = {
                let mut p: Vec<Vec<u32>> = states.iter().map(|(l, _)| l.path.clone()).collect();
                p.sort();
                p.dedup();
                p
            };
            let dim = states[0].1.len() * 2;
            let mut next = Vec::with_capacity(dim);
            for parent in &parents {
                let two_j1 = *parent.last().unwrap();
                for two_j in [two_j1.wrapping_sub(1), two_j1 + 1] {
                    if two_j > two_j1 + 1 {
                        continue;
                    }
                    let mut path = parent.clone();
                    path.push(two_j);
                    for two_m in (-(two_j as i32)..=two_j as i32).step_by(2) {
                        let mut v = vec![0.0; dim];
                        for spin in HalfSpin::BOTH {
                            let two_m1 = two_m - spin.two_m();
                            if two_m1.unsigned_abs() > two_j1 {
                                continue;
                            }
                            let coef = cg_half(two_j1, two_m1, spin, two_j)?.to_f64();
                            if coef == 0.0 {
                                continue;
                            }
                            let parent_vec = &states[lookup[&(parent.clone(), two_m1)]].1;
                            for (k, &a) in parent_vec.iter().enumerate() {
                                v[2 * k + spin.qubit()] += coef * a;
                            }
                        }
                        next.push((SpinLabel::new(two_m, path.clone())?, v));
                    }
                }
            }
            states = next;
        }

        // map from coupling order back to natural qubit order
        let coupling_space = TensorSpace::new(order.iter().map(|q| (format!("q{q}"), 2)))?;
        let natural: Vec<String> = (1..=n).map(|q| format!("q{q}")).collect();
        let natural_refs: Vec<&str> = natural.iter().map(String::as_str).collect();
        let identity_order = order.iter().enumerate().all(|(k, &q)| q == k + 1);

        let mut labels = Vec::with_capacity(states.len());
        let mut vectors = Vec::with_capacity(states.len());
        states.sort_by(|a, b| a.0.cmp(&b.0));
        for (label, v) in states {
            let v = if identity_order {
                v
            } else {
                permute_vector(&v, &coupling_space, &natural_refs)?.0
            };
            labels.push(label);
            vectors.push(v);
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(k, l)| ((l.path.clone(), l.two_m), k))
            .collect();
        Ok(CoupledBasis {
            n,
            order: order.to_vec(),
            labels,
            vectors,
            index,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn labels(&self) -> &[SpinLabel] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SpinLabel, &[f64])> {
        self.labels.iter().zip(self.vectors.iter().map(Vec::as_slice))
    }

    pub fn vector(&self, path: &[u32], two_m: i32) -> Result<&[f64]> {
        self.index
            .get(&(path.to_vec(), two_m))
            .map(|&k| self.vectors[k].as_slice())
            .ok_or_else(|| {
                Error::domain(format!(
                    "no basis vector with path {path:?} and 2m = {two_m} for {} spins",
                    self.n
                ))
            })
    }

    pub fn get(&self, label: &SpinLabel) -> Result<&[f64]> {
        self.vector(&label.path, label.two_m)
    }

    /// Basis vectors as matrix columns, in label order.
    pub fn to_matrix(&self) -> RMatrix {
        let dim = 1 << self.n;
        let mut m = RMatrix::zeros(dim, self.len());
        for (k, v) in self.vectors.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    }
}

/// Overlap `⟨Φ_a(s, s_z, α)|Φ_b(s, s_z, α')⟩` between two coupled bases in
/// one spin sector.
#[derive(Clone, Debug)]
pub struct Rebase {
    /// Rows indexed by the α paths of `basis_a`, columns by those of `basis_b`.
    pub unitary: RMatrix,
    pub paths: Vec<Vec<u32>>,
    /// Largest entrywise difference between the overlap matrices of
    /// different `s_z` values.
    pub max_sz_deviation: f64,
}

pub fn rebase_unitary(basis_a: &CoupledBasis, basis_b: &CoupledBasis, two_s: u32) -> Result<Rebase> {
    if basis_a.n_spins() != basis_b.n_spins() {
        return Err(Error::domain(format!(
            "bases have {} and {} spins",
            basis_a.n_spins(),
            basis_b.n_spins()
        )));
    }
    let paths = coupling_paths(basis_a.n_spins(), two_s);
    if paths.is_empty() {
        return Err(Error::domain(format!(
            "2s = {two_s} is not a sector of {} spins",
            basis_a.n_spins()
        )));
    }
    let overlap = |two_sz: i32| -> Result<RMatrix> {
        let k = paths.len();
        let mut u = RMatrix::zeros(k, k);
        for (a, pa) in paths.iter().enumerate() {
            let va = basis_a.vector(pa, two_sz)?;
            for (b, pb) in paths.iter().enumerate() {
                let vb = basis_b.vector(pb, two_sz)?;
                u[(a, b)] = va.iter().zip(vb).map(|(x, y)| x * y).sum();
            }
        }
        Ok(u)
    };
    let unitary = overlap(two_s as i32)?;
    let mut max_sz_deviation = 0.0_f64;
    for two_sz in (-(two_s as i32)..two_s as i32).step_by(2) {
        max_sz_deviation = max_sz_deviation.max(overlap(two_sz)?.max_abs_diff(&unitary));
    }
    Ok(Rebase {
        unitary,
        paths,
        max_sz_deviation,
    })
}

/// Total `S_z` and `S²` of n spin-½ particles as dense real matrices.
pub fn total_spin_operators(n: usize) -> (RMatrix, RMatrix) {
    let dim = 1usize << n;
    let mut sz = RMatrix::zeros(dim, dim);
    // S² = Σ_i 3/4 + Σ_{i≠j} S_i·S_j, with S_i·S_j = (SWAP_ij)/2 - 1/4
    let mut s2 = RMatrix::zeros(dim, dim);
    for x in 0..dim {
        let ups = x.count_ones() as f64;
        sz[(x, x)] = ups - n as f64 / 2.0;
        s2[(x, x)] += 0.75 * n as f64;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let bi = (x >> i) & 1;
                let bj = (x >> j) & 1;
                let swapped = if bi == bj {
                    x
                } else {
                    x ^ (1 << i) ^ (1 << j)
                };
                s2[(swapped, x)] += 0.5;
                s2[(x, x)] -= 0.25;
            }
        }
    }
    (sz, s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    fn brute_force_path_count(n: usize, two_j: u32) -> u64 {
        // walk all 2^(n-1) up/down choices
        let mut count = 0;
        for bits in 0..(1u32 << (n - 1)) {
            let mut cur: i64 = 1;
            let mut ok = true;
            for k in 0..n - 1 {
                cur += if bits >> k & 1 == 1 { 1 } else { -1 };
                if cur < 0 {
                    ok = false;
                    break;
                }
            }
            if ok && cur == two_j as i64 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(2, 0).unwrap(), 1);
        assert_eq!(multiplicity(2, 2).unwrap(), 1);
        assert_eq!(multiplicity(3, 1).unwrap(), 2);
        assert!(matches!(multiplicity(3, 2), Err(Error::Domain(_))));
        assert!(matches!(multiplicity(3, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn multiplicities_fill_the_space() {
        for n in 1..=12 {
            let total: u64 = allowed_two_j(n)
                .map(|tj| multiplicity(n, tj).unwrap() * (tj as u64 + 1))
                .sum();
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn multiplicity_counts_paths() {
        for n in 1..=12 {
            for tj in allowed_two_j(n) {
                let m = multiplicity(n, tj).unwrap();
                assert_eq!(m, brute_force_path_count(n, tj), "n={n} 2j={tj}");
                assert_eq!(m as usize, coupling_paths(n, tj).len());
            }
        }
    }

    #[test]
    fn single_spin_mapping() {
        let b = CoupledBasis::build(1).unwrap();
        assert_eq!(b.vector(&[1], 1).unwrap(), &[0.0, 1.0]);
        assert_eq!(b.vector(&[1], -1).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn two_spin_singlet() {
        // Condon–Shortley with |1⟩ = up gives (|10⟩ - |01⟩)/√2 = -|ψ-⟩
        let b = CoupledBasis::build(2).unwrap();
        let s = 0.5_f64.sqrt();
        let v = b.vector(&[1, 0], 0).unwrap();
        let psi_minus = [0.0, s, -s, 0.0];
        let overlap: f64 = v.iter().zip(psi_minus).map(|(a, b)| a * b).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-15);
        assert!((v[2] - s).abs() < 1e-15 && (v[1] + s).abs() < 1e-15);
    }

    #[test]
    fn label_validation() {
        assert!(SpinLabel::new(0, vec![1, 0]).is_ok());
        assert!(SpinLabel::new(0, vec![0, 1]).is_err());
        assert!(SpinLabel::new(0, vec![1, 3]).is_err());
        assert!(SpinLabel::new(1, vec![1, 2]).is_err());
        assert!(SpinLabel::new(4, vec![1, 2]).is_err());
    }

    #[test]
    fn bases_are_orthonormal_and_complete() {
        for n in 1..=7 {
            let b = CoupledBasis::build(n).unwrap();
            assert_eq!(b.len(), 1 << n);
            let m = b.to_matrix();
            let gram = m.transpose().matmul(&m);
            assert!(gram.max_abs_diff(&RMatrix::identity(1 << n)) < 1e-12, "n={n}");
        }
    }

    #[test]
    fn basis_vectors_are_spin_eigenvectors() {
        for n in 1..=6 {
            let (sz, s2) = total_spin_operators(n);
            let b = CoupledBasis::build(n).unwrap();
            for (label, v) in b.iter() {
                let j = label.two_j as f64 / 2.0;
                let m = label.two_m as f64 / 2.0;
                let s2v = s2.matvec(v);
                let szv = sz.matvec(v);
                for k in 0..v.len() {
                    assert!((s2v[k] - j * (j + 1.0) * v[k]).abs() < 1e-10);
                    assert!((szv[k] - m * v[k]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn spin_operator_oracle_spectrum() {
        // eigenvalues of S² on 3 spins: 3/4 (x4), 15/4 (x4)
        let (_, s2) = total_spin_operators(3);
        let dec = eigh(&s2).unwrap();
        let expected = [0.75, 0.75, 0.75, 0.75, 3.75, 3.75, 3.75, 3.75];
        for (l, e) in dec.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rebase_identity() {
        let b = CoupledBasis::build(4).unwrap();
        let r = rebase_unitary(&b, &b, 2).unwrap();
        assert!(r.unitary.max_abs_diff(&RMatrix::identity(3)) < 1e-12);
        assert!(r.max_sz_deviation < 1e-12);
    }

    #[test]
    fn rebase_rotated_orders() {
        let a = CoupledBasis::build(3).unwrap();
        let b = CoupledBasis::build_with_order(3, &[2, 3, 1]).unwrap();
        let r = rebase_unitary(&a, &b, 1).unwrap();
        assert_eq!(r.unitary.rows(), 2);
        let g = r.unitary.transpose().matmul(&r.unitary);
        assert!(g.max_abs_diff(&RMatrix::identity(2)) < 1e-10);
        assert!(r.max_sz_deviation < 1e-10);
        // the bases differ, so the overlap is not the identity
        assert!(r.unitary.max_abs_diff(&RMatrix::identity(2)) > 1e-3);

        let a4 = CoupledBasis::build(4).unwrap();
        let b4 = CoupledBasis::build_with_order(4, &[3, 1, 4, 2]).unwrap();
        let r4 = rebase_unitary(&a4, &b4, 2).unwrap();
        assert_eq!(r4.unitary.rows(), 3);
        let g4 = r4.unitary.transpose().matmul(&r4.unitary);
        assert!(g4.max_abs_diff(&RMatrix::identity(3)) < 1e-10);
        assert!(r4.max_sz_deviation < 1e-10);
        let det = det3(&r4.unitary);
        assert!((det.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rebase_sector_mismatch() {
        let a = CoupledBasis::build(3).unwrap();
        let b = CoupledBasis::build(4).unwrap();
        assert!(matches!(rebase_unitary(&a, &b, 1), Err(Error::Domain(_))));
        assert!(matches!(rebase_unitary(&a, &a, 2), Err(Error::Domain(_))));
    }

    fn det3(m: &RMatrix) -> f64 {
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }
}
