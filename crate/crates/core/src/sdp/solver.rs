use serde::{Deserialize, Serialize};

use super::dense::{cholesky, cholesky_solve, frobenius_dot, max_step, symmetrize};
use super::instance::RealSdp;
use crate::error::{Error, Result};
use crate::linalg::{eigh, RMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stop once the certified duality gap is below this.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the PSD boundary taken per step.
    pub step_fraction: f64,
    /// Largest equality residual (primal and dual) accepted at termination.
    pub feasibility_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_tol: 1e-7,
            max_iter: 200,
            step_fraction: 0.98,
            feasibility_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub mu: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

#[derive(Clone, Debug)]
pub struct RealIterate {
    pub x: Vec<RMatrix>,
    pub y: Vec<f64>,
    pub z: Vec<RMatrix>,
}

#[derive(Clone, Debug)]
pub struct RealSolution {
    pub iterate: RealIterate,
    pub iterations: usize,
    pub history: Vec<IterateRecord>,
    pub certified_gap: f64,
}

/// Per-block scaling data at the current iterate.
struct Scaling {
    w: Vec<RMatrix>,
    z_inv: Vec<RMatrix>,
    lx: Vec<RMatrix>,
    lz: Vec<RMatrix>,
}

fn not_pd(what: &str, iteration: usize) -> Error {
    Error::Convergence {
        iterations: iteration,
        gap: f64::NAN,
        reason: format!("{what} lost positive definiteness"),
    }
}

/// Nesterov–Todd scaling `W` with `W Z W = X`, from `X = L Lᵀ` and
/// `K = Lᵀ Z L = V κ Vᵀ`: `W = L V κ^{-½} Vᵀ Lᵀ`, `Z⁻¹ = L V κ⁻¹ Vᵀ Lᵀ`.
/// `κ` are the eigenvalues of `XZ`, uniformly of order μ near the central
/// path, so neither factor inverts an ill-conditioned matrix.
fn scaling(x: &[RMatrix], z: &[RMatrix], iteration: usize) -> Result<Scaling> {
    let mut out = Scaling {
        w: Vec::with_capacity(x.len()),
        z_inv: Vec::with_capacity(x.len()),
        lx: Vec::with_capacity(x.len()),
        lz: Vec::with_capacity(x.len()),
    };
    for (xb, zb) in x.iter().zip(z) {
        let lx = cholesky(xb).ok_or_else(|| not_pd("primal iterate", iteration))?;
        let lz = cholesky(zb).ok_or_else(|| not_pd("dual slack", iteration))?;
        let k = symmetrize(&lx.transpose().matmul(zb).matmul(&lx));
        let eig = eigh(&k)?;
        if eig.min_eigenvalue() <= 0.0 {
            return Err(not_pd("scaled complementarity", iteration));
        }
        let g = lx.matmul(&eig.eigenvectors);
        let n = g.rows();
        let scaled = |pow: f64| {
            let mut gs = g.clone();
            for r in 0..n {
                for c in 0..n {
                    gs[(r, c)] *= eig.eigenvalues[c].powf(pow);
                }
            }
            symmetrize(&gs.matmul(&g.transpose()))
        };
        out.w.push(scaled(-0.5));
        out.z_inv.push(scaled(-1.0));
        out.lx.push(lx);
        out.lz.push(lz);
    }
    Ok(out)
}

/// Constraint entries grouped by block: `(k, [(row, col, value)])`.
type BlockIndex = Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>;

fn block_index(sdp: &RealSdp) -> BlockIndex {
    let mut out: BlockIndex = vec![Vec::new(); sdp.block_dims.len()];
    for (k, entries) in sdp.constraints.iter().enumerate() {
        let mut start = 0;
        while start < entries.len() {
            let b = entries[start].block;
            let mut end = start;
            while end < entries.len() && entries[end].block == b {
                end += 1;
            }
            out[b].push((
                k,
                entries[start..end]
                    .iter()
                    .map(|e| (e.row, e.col, e.value))
                    .collect(),
            ));
            start = end;
        }
    }
    out
}

/// Schur complement `M_kl = Σ_b ⟨A_kb, W_b A_lb W_b⟩`.
fn schur_complement(m: usize, index: &BlockIndex, w: &[RMatrix]) -> RMatrix {
    let mut out = RMatrix::zeros(m, m);
    for (b, list) in index.iter().enumerate() {
        let wb = &w[b];
        let n = wb.rows();
        let wd = wb.data();
        for (p1, (k, e1)) in list.iter().enumerate() {
            for (l, e2) in &list[p1..] {
                let mut s = 0.0;
                for &(i, j, v) in e1 {
                    let wj = &wd[j * n..(j + 1) * n];
                    for &(p, q, u) in e2 {
                        s += v * u * wj[p] * wd[q * n + i];
                    }
                }
                out[(*k, *l)] += s;
            }
        }
    }
    for k in 0..m {
        for l in 0..k {
            out[(k, l)] = out[(l, k)];
        }
    }
    out
}

fn sandwich(w: &RMatrix, a: &RMatrix) -> RMatrix {
    symmetrize(&w.matmul(a).matmul(w))
}

fn blocks_dot(a: &[RMatrix], b: &[RMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| frobenius_dot(x, y)).sum()
}

fn blocks_norm(a: &[RMatrix]) -> f64 {
    blocks_dot(a, a).sqrt()
}

struct Direction {
    dx: Vec<RMatrix>,
    dy: Vec<f64>,
    dz: Vec<RMatrix>,
}

/// Solves `A(ΔX) = r_p`, `A*(Δy) - ΔZ = -R_d`, `ΔX + W ΔZ W = R_c`.
fn newton_direction(
    sdp: &RealSdp,
    chol_m: &RMatrix,
    sc: &Scaling,
    r_p: &[f64],
    r_d: &[RMatrix],
    r_c: &[RMatrix],
) -> Direction {
    let target: Vec<RMatrix> = r_c
        .iter()
        .zip(r_d)
        .zip(&sc.w)
        .map(|((c, d), w)| c - &sandwich(w, d))
        .collect();
    let mut dy = sdp.apply(&target);
    for (v, r) in dy.iter_mut().zip(r_p) {
        *v -= r;
    }
    cholesky_solve(chol_m, &mut dy);
    let dz: Vec<RMatrix> = sdp
        .adjoint(&dy)
        .iter()
        .zip(r_d)
        .map(|(a, d)| a + d)
        .collect();
    let dx: Vec<RMatrix> = r_c
        .iter()
        .zip(&dz)
        .zip(&sc.w)
        .map(|((c, dzb), w)| c - &sandwich(w, dzb))
        .collect();
    Direction { dx, dy, dz }
}

fn step_lengths(sc: &Scaling, dir: &Direction, fraction: f64) -> Result<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for b in 0..sc.lx.len() {
        ap = ap.min(max_step(&sc.lx[b], &dir.dx[b])?);
        ad = ad.min(max_step(&sc.lz[b], &dir.dz[b])?);
    }
    Ok(((fraction * ap).min(1.0), (fraction * ad).min(1.0)))
}

fn axpy_blocks(x: &[RMatrix], a: f64, dx: &[RMatrix]) -> Vec<RMatrix> {
    x.iter().zip(dx).map(|(u, v)| u + &v.scale(a)).collect()
}

/// Infeasible-start primal-dual path following with NT scaling and a
/// Mehrotra-type centering parameter.
///
/// `certify` maps an iterate that meets the internal stopping rule to a
/// certified gap; iteration continues until that gap is below `gap_tol`.
pub fn solve_real(
    sdp: &RealSdp,
    start: RealIterate,
    opts: &SolveOptions,
    certify: &mut dyn FnMut(&RealIterate) -> Result<f64>,
) -> Result<RealSolution> {
    let m = sdp.rhs.len();
    let n_total: usize = sdp.block_dims.iter().sum();
    let index = block_index(sdp);
    let b_norm = 1.0 + sdp.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = 1.0 + blocks_norm(&sdp.objective);
    let RealIterate { mut x, mut y, mut z } = start;
    let mut history = Vec::new();
    let mut best_gap = f64::INFINITY;

    for iteration in 0..=opts.max_iter {
        let ax = sdp.apply(&x);
        let r_p: Vec<f64> = sdp.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = sdp.adjoint(&y);
        let r_d: Vec<RMatrix> = aty
            .iter()
            .zip(&z)
            .zip(&sdp.objective)
            .map(|((a, zb), c)| &(a - zb) - c)
            .collect();
        let pobj = blocks_dot(&sdp.objective, &x);
        let dobj: f64 = sdp.rhs.iter().zip(&y).map(|(b, v)| b * v).sum();
        let mu = blocks_dot(&x, &z) / n_total as f64;
        let p_inf = r_p.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        let d_inf = blocks_norm(&r_d) / c_norm;
        history.push(IterateRecord {
            iteration,
            primal_objective: pobj,
            dual_objective: dobj,
            mu,
            primal_infeasibility: p_inf,
            dual_infeasibility: d_inf,
        });
        best_gap = best_gap.min((dobj - pobj).abs());

        let near = (dobj - pobj).abs() <= 0.5 * opts.gap_tol
            && p_inf <= opts.feasibility_tol
            && d_inf <= opts.feasibility_tol;
        if near {
            let it = RealIterate {
                x: x.clone(),
                y: y.clone(),
                z: z.clone(),
            };
            let gap = certify(&it)?;
            if gap <= opts.gap_tol {
                return Ok(RealSolution {
                    iterate: it,
                    iterations: iteration,
                    history,
                    certified_gap: gap,
                });
            }
        }
        if iteration == opts.max_iter {
            break;
        }

        let sc = scaling(&x, &z, iteration)?;
        let schur = schur_complement(m, &index, &sc.w);
        let chol_m = cholesky(&schur).ok_or_else(|| Error::Convergence {
            iterations: iteration,
            gap: best_gap,
            reason: "Schur complement is not positive definite".to_string(),
        })?;

        // predictor: pure affine scaling
        let r_aff: Vec<RMatrix> = x.iter().map(|xb| xb.scale(-1.0)).collect();
        let aff = newton_direction(sdp, &chol_m, &sc, &r_p, &r_d, &r_aff);
        let (ap, ad) = step_lengths(&sc, &aff, 1.0)?;
        let mu_aff = blocks_dot(&axpy_blocks(&x, ap, &aff.dx), &axpy_blocks(&z, ad, &aff.dz))
            / n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector: centered direction
        let r_c: Vec<RMatrix> = x
            .iter()
            .zip(&sc.z_inv)
            .map(|(xb, zi)| &zi.scale(sigma * mu) - xb)
            .collect();
        let dir = newton_direction(sdp, &chol_m, &sc, &r_p, &r_d, &r_c);
        let (ap, ad) = step_lengths(&sc, &dir, opts.step_fraction)?;
        if ap.max(ad) < 1e-12 {
            return Err(Error::Convergence {
                iterations: iteration,
                gap: best_gap,
                reason: "step length collapsed".to_string(),
            });
        }
        x = axpy_blocks(&x, ap, &dir.dx).iter().map(symmetrize).collect();
        z = axpy_blocks(&z, ad, &dir.dz).iter().map(symmetrize).collect();
        for (v, d) in y.iter_mut().zip(&dir.dy) {
            *v += ad * d;
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        gap: best_gap,
        reason: "iteration limit reached".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::instance::RealEntry;

    /// max ⟨C, X⟩ with tr X = 1 over 2x2: the top eigenvalue of C.
    #[test]
    fn eigenvalue_program() {
        let c = RMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sdp = RealSdp {
            block_dims: vec![2],
            objective: vec![c],
            constraints: vec![vec![
                RealEntry {
                    block: 0,
                    row: 0,
                    col: 0,
                    value: 1.0,
                },
                RealEntry {
                    block: 0,
                    row: 1,
                    col: 1,
                    value: 1.0,
                },
            ]],
            rhs: vec![1.0],
        };
        let start = RealIterate {
            x: vec![RMatrix::identity(2).scale(0.5)],
            y: vec![5.0],
            z: vec![&RMatrix::identity(2).scale(5.0)
                - &RMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 0.0]]).unwrap()],
        };
        let mut certify = |it: &RealIterate| Ok(it.y[0] - frobenius_dot(&sdp.objective[0], &it.x[0]));
        let sol = solve_real(&sdp, start, &SolveOptions::default(), &mut certify).unwrap();
        let want = 1.0 + 2f64.sqrt();
        assert!((sol.iterate.y[0] - want).abs() < 1e-7);
        for rec in &sol.history {
            assert!(rec.primal_objective <= rec.dual_objective + 1e-9);
        }
    }
}
