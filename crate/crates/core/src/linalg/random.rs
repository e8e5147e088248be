use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{norm, CMatrix};
use num_complex::Complex64;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with standard normal entries.
pub fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unitary from Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(dim, dim, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = g.column(j);
        // two passes keep the columns orthogonal to working precision
        for _ in 0..2 {
            for u in &cols {
                let p: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= p * y;
                }
            }
        }
        let n = norm(&v);
        for x in &mut v {
            *x /= n;
        }
        cols.push(v);
    }
    let mut u = CMatrix::zeros(dim, dim);
    for (j, c) in cols.iter().enumerate() {
        u.set_column(j, c);
    }
    u
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = norm(&v);
    for x in &mut v {
        *x /= n;
    }
    v
}

/// Density matrix `G G† / tr(G G†)` with `G` Ginibre of the given rank.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(dim, rank.max(1), rng);
    let m = g.matmul(&g.adjoint());
    let t = m.trace().re;
    m.scale(1.0 / t).hermitian_part()
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(dim, dim, rng);
    (&g + &g.adjoint()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::psd_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [1, 2, 5, 16] {
            let u = random_unitary(dim, &mut rng);
            let p = u.adjoint().matmul(&u);
            assert!(p.max_abs_diff(&CMatrix::identity(dim)) < 1e-13);
        }
    }

    #[test]
    fn density_is_a_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(6, 2, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(psd_check(&rho, 1e-12).unwrap().0);
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = random_unitary(4, &mut ChaCha8Rng::seed_from_u64(11));
        let b = random_unitary(4, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a.max_abs_diff(&b), 0.0);
    }
}
