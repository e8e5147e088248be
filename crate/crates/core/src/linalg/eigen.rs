//! Cyclic Jacobi eigensolver for Hermitian (and real symmetric) matrices,
//! plus the spectral functions built on it.

use std::cmp::Ordering;

use super::{Matrix, Scalar};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;
/// Off-diagonal entries below this fraction of `sqrt(|a_pp a_qq|)` are dropped.
const REL_SKIP: f64 = 1e-18;
/// Absolute floor relative to the Frobenius norm of the input.
const ABS_SKIP: f64 = 1e-22;

/// Relative tolerance used when validating Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default relative rank tolerance for support-restricted spectral functions.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// `H = V diag(λ) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns.
    pub eigenvectors: Matrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<T> {
        self.eigenvectors.column(k)
    }

    /// `V f(D) V†`
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Matrix<T> {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)].scale(w);
                if vik == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.apply_fn(|l| l)
    }
}

fn validate_hermitian<T: Scalar>(h: &Matrix<T>) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare(h.rows(), h.cols()));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs() {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Input must be Hermitian to `1e-12 · max|h_ij|`; eigenvalues come back in
/// ascending order with ties broken lexicographically on the (phase-fixed)
/// eigenvector entries, so the output is deterministic. Complex input with an
/// identically zero imaginary part is diagonalized in real arithmetic.
pub fn eigh<T: Scalar>(h: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    validate_hermitian(h)?;
    if T::IS_COMPLEX && h.data().iter().all(|z| z.im() == 0.0) {
        let real = Matrix::from_fn(h.rows(), h.cols(), |i, j| h[(i, j)].re());
        let dec = jacobi(&real)?;
        let vecs = Matrix::from_fn(h.rows(), h.cols(), |i, j| {
            T::from_f64(dec.eigenvectors[(i, j)])
        });
        return Ok(EigenDecomposition {
            eigenvalues: dec.eigenvalues,
            eigenvectors: vecs,
        });
    }
    jacobi(h)
}

fn jacobi<T: Scalar>(h: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let n = h.rows();
    let mut a = h.hermitian_part();
    // rows of `vt` are the eigenvectors
    let mut vt = Matrix::<T>::identity(n);
    let floor = ABS_SKIP * a.frobenius_norm();

    let mut converged = n <= 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotations = 0usize;
        for p in 0..n {
            for q in p + 1..n {
                let g = a[(p, q)];
                let abs_g = g.abs();
                if abs_g == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re();
                let aqq = a[(q, q)].re();
                if abs_g <= floor || abs_g <= REL_SKIP * (app * aqq).abs().sqrt() {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                rotations += 1;
                rotate(&mut a, &mut vt, p, q, g, abs_g, app, aqq);
            }
        }
        if rotations == 0 {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence(MAX_SWEEPS));
    }

    let mut vectors: Vec<(f64, Vec<T>)> = (0..n)
        .map(|k| {
            let mut v = vt.row(k).to_vec();
            fix_phase(&mut v);
            (a[(k, k)].re(), v)
        })
        .collect();
    vectors.sort_by(|(la, va), (lb, vb)| {
        la.total_cmp(lb).then_with(|| lexicographic(va, vb))
    });

    let mut eigenvectors = Matrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (k, (l, v)) in vectors.into_iter().enumerate() {
        eigenvalues.push(l);
        eigenvectors.set_column(k, &v);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies the unitary `G = [[c, s], [-s ū, c ū]]` (acting on indices p, q)
/// as `A ← G† A G`, `V ← V G`, where `u` is the phase of `a_pq`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate<T: Scalar>(
    a: &mut Matrix<T>,
    vt: &mut Matrix<T>,
    p: usize,
    q: usize,
    g: T,
    abs_g: f64,
    app: f64,
    aqq: f64,
) {
    let n = a.rows();
    let tau = (aqq - app) / (2.0 * abs_g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let u = g.phase();
    let ubar = u.conj();

    // columns (every row k): a_kp' = c a_kp - s ū a_kq, a_kq' = s a_kp + c ū a_kq
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp.scale(c) - (ubar * akq).scale(s);
        a[(k, q)] = akp.scale(s) + (ubar * akq).scale(c);
    }
    // rows: a_pk' = c a_pk - s u a_qk, a_qk' = s a_pk + c u a_qk
    {
        let data = a.data_mut();
        let (lo, hi) = data.split_at_mut(q * n);
        let row_p = &mut lo[p * n..(p + 1) * n];
        let row_q = &mut hi[..n];
        for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
            let apk = *x;
            let aqk = *y;
            *x = apk.scale(c) - (u * aqk).scale(s);
            *y = apk.scale(s) + (u * aqk).scale(c);
        }
    }
    a[(p, p)] = T::from_f64(app - t * abs_g);
    a[(q, q)] = T::from_f64(aqq + t * abs_g);
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();

    // V ← V G, stored transposed: row_p' = c row_p - s ū row_q, row_q' = s row_p + c ū row_q
    let data = vt.data_mut();
    let (lo, hi) = data.split_at_mut(q * n);
    let row_p = &mut lo[p * n..(p + 1) * n];
    let row_q = &mut hi[..n];
    for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let vp = *x;
        let vq = *y;
        *x = vp.scale(c) - (ubar * vq).scale(s);
        *y = vp.scale(s) + (ubar * vq).scale(c);
    }
}

/// Rotates the global phase so that the first non-negligible entry is real
/// and positive.
fn fix_phase<T: Scalar>(v: &mut [T]) {
    let Some(&pivot) = v.iter().find(|x| x.abs() > 1e-10) else {
        return;
    };
    let ph = pivot.phase().conj();
    for x in v.iter_mut() {
        *x = *x * ph;
    }
}

fn lexicographic<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re().total_cmp(&y.re()).then(x.im().total_cmp(&y.im()));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// `h^{-1/2}` on the support of `h`; zero on its (numerical) kernel.
///
/// Eigenvalues above `rank_tol · λ_max` are inverted, the rest are dropped.
/// Fails if an eigenvalue lies below `-rank_tol · λ_max`.
pub fn inv_sqrt_on_support<T: Scalar>(h: &Matrix<T>, rank_tol: f64) -> Result<Matrix<T>> {
    let dec = eigh(h)?;
    let cutoff = rank_tol * dec.max_eigenvalue().max(0.0);
    if dec.min_eigenvalue() < -cutoff {
        return Err(Error::NotPsd(dec.min_eigenvalue()));
    }
    Ok(dec.apply_fn(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Principal square root of a PSD matrix; eigenvalues within
/// `rank_tol · λ_max` of zero are clamped.
pub fn sqrt_psd<T: Scalar>(h: &Matrix<T>, rank_tol: f64) -> Result<Matrix<T>> {
    let dec = eigh(h)?;
    let cutoff = rank_tol * dec.max_eigenvalue().max(0.0);
    if dec.min_eigenvalue() < -cutoff.max(f64::MIN_POSITIVE) {
        return Err(Error::NotPsd(dec.min_eigenvalue()));
    }
    Ok(dec.apply_fn(|l| if l > 0.0 { l.sqrt() } else { 0.0 }))
}

/// Orthogonal projector onto the eigenvectors with eigenvalue above
/// `rank_tol · λ_max`.
pub fn support_projector<T: Scalar>(h: &Matrix<T>, rank_tol: f64) -> Result<Matrix<T>> {
    let dec = eigh(h)?;
    let cutoff = rank_tol * dec.max_eigenvalue().max(0.0);
    Ok(dec.apply_fn(|l| if l > cutoff { 1.0 } else { 0.0 }))
}

/// `(min eigenvalue ≥ -tol, min eigenvalue)`.
pub fn psd_check<T: Scalar>(h: &Matrix<T>, tol: f64) -> Result<(bool, f64)> {
    let min = eigh(h)?.min_eigenvalue();
    Ok((min >= -tol, min))
}
