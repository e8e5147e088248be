//! Real dense kernels for the interior-point iteration.

use crate::error::Result;
use crate::linalg::{eigh, RMatrix};

/// Lower Cholesky factor, or `None` when `a` is not numerically positive
/// definite.
pub fn cholesky(a: &RMatrix) -> Option<RMatrix> {
    let n = a.rows();
    let mut l = RMatrix::zeros(n, n);
    let data = l.data_mut();
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= data[j * n + k] * data[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        data[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (i * n, j * n);
            for k in 0..j {
                s -= data[ri + k] * data[rj + k];
            }
            data[ri + j] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` in place.
pub fn cholesky_solve(l: &RMatrix, b: &mut [f64]) {
    let n = l.rows();
    let d = l.data();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= d[i * n + k] * b[k];
        }
        b[i] = s / d[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= d[k * n + i] * b[k];
        }
        b[i] = s / d[i * n + i];
    }
}

/// `L⁻¹` for lower-triangular `L`.
pub fn lower_inverse(l: &RMatrix) -> RMatrix {
    let n = l.rows();
    let mut inv = RMatrix::zeros(n, n);
    for col in 0..n {
        inv[(col, col)] = 1.0 / l[(col, col)];
        for i in col + 1..n {
            let mut s = 0.0;
            for k in col..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

/// Largest `α` with `x + α dx ⪰ 0` given the Cholesky factor of `x`
/// (infinite when `dx ⪰ 0`).
pub fn max_step(l: &RMatrix, dx: &RMatrix) -> Result<f64> {
    let li = lower_inverse(l);
    let m = li.matmul(dx).matmul(&li.transpose());
    let sym = (&m + &m.transpose()).scale(0.5);
    let lambda = eigh(&sym)?.min_eigenvalue();
    Ok(if lambda >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda
    })
}

/// `⟨A, B⟩ = tr(Aᵀ B)`.
pub fn frobenius_dot(a: &RMatrix, b: &RMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

pub fn symmetrize(a: &RMatrix) -> RMatrix {
    (a + &a.transpose()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> RMatrix {
        let g = RMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        &g.matmul(&g.transpose()) + &RMatrix::identity(n)
    }

    #[test]
    fn factor_and_solve() {
        let a = spd(6);
        let l = cholesky(&a).unwrap();
        assert!(l.matmul(&l.transpose()).max_abs_diff(&a) < 1e-12);
        let x: Vec<f64> = (0..6).map(|k| k as f64 - 2.5).collect();
        let mut b = a.matvec(&x);
        cholesky_solve(&l, &mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-10);
        }
        let li = lower_inverse(&l);
        assert!(li.matmul(&l).max_abs_diff(&RMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = RMatrix::diag(&[1.0, -1.0]);
        assert!(cholesky(&a).is_none());
    }

    #[test]
    fn step_to_boundary() {
        let x = RMatrix::diag(&[1.0, 2.0]);
        let dx = RMatrix::diag(&[-2.0, 1.0]);
        let l = cholesky(&x).unwrap();
        assert!((max_step(&l, &dx).unwrap() - 0.5).abs() < 1e-14);
        let l = cholesky(&x).unwrap();
        assert!(max_step(&l, &RMatrix::identity(2)).unwrap().is_infinite());
    }
}
