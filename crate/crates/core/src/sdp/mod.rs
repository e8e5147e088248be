//! The general-resource program: optimize jointly over the shared state
//! (through `X = O†O`) and the measurement, with a repaired dual point that
//! certifies the optimum.

mod dense;
mod instance;
mod solver;

pub use instance::{
    build_primary, hermitian_basis, BasisElement, EqualityConstraint, RealEntry, RealSdp,
    SdpInstance, SparseEntry, OVERRIDE_TIER_DIM, REQUIRED_TIER_DIM,
};
pub use solver::{solve_real, IterateRecord, RealIterate, RealSolution, SolveOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_trace, CMatrix, RMatrix, TensorSpace};
use crate::protocol::{
    ab_space, port_labels, signal_states, srm_povm, Convention, Povm, SignalStateSet,
};

/// A primal point `(Π̃_1 … Π̃_N, X)` of the program.
#[derive(Clone, Debug)]
pub struct PrimalPoint {
    pub pi_tilde: Vec<CMatrix>,
    pub x: CMatrix,
}

impl PrimalPoint {
    fn blocks(&self) -> Vec<CMatrix> {
        let mut out = self.pi_tilde.clone();
        out.push(self.x.clone());
        out
    }
}

/// `Π̃_i = 0.99 Π^SRM_i + 0.01 · 1/N` with `X = 1`: the square-root
/// measurement with maximally entangled pairs, nudged into the interior.
pub fn srm_warm_start(n_ports: usize, qudit_dim: usize) -> Result<PrimalPoint> {
    let states = signal_states(n_ports, qudit_dim, Convention::default_for(qudit_dim))?;
    let povm = srm_povm(&states)?;
    let dim = states.dim();
    let mix = CMatrix::identity(dim).scale(0.01 / n_ports as f64);
    Ok(PrimalPoint {
        pi_tilde: povm
            .elements()
            .iter()
            .map(|p| &p.scale(0.99) + &mix)
            .collect(),
        x: CMatrix::identity(dim / qudit_dim),
    })
}

/// `Ω ⪰ σ(i)` for every port and `a 1 ⪰ tr_B Ω`, so `F <= d^{N-2} a`.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub omega: CMatrix,
    pub a: f64,
}

impl DualCertificate {
    pub fn bound(&self, n_ports: usize, qudit_dim: usize) -> f64 {
        self.a * (qudit_dim as f64).powi(n_ports as i32 - 2)
    }

    /// Minimum eigenvalues of `Ω - σ(i)` for each port, then of `a 1 - tr_B Ω`.
    pub fn margins(&self, states: &SignalStateSet) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(states.n_ports + 1);
        for i in 1..=states.n_ports {
            out.push(eigh(&(&self.omega - states.sigma(i)))?.min_eigenvalue());
        }
        let marginal = trace_out_b(&self.omega, states.space(), states.n_ports)?;
        let slack = &CMatrix::identity(marginal.rows()).scale(self.a) - &marginal;
        out.push(eigh(&slack)?.min_eigenvalue());
        Ok(out)
    }
}

/// `tr_B` of an operator on `[A1, …, AN, B]`.
fn trace_out_b(m: &CMatrix, space: &TensorSpace, n_ports: usize) -> Result<CMatrix> {
    let labels = port_labels("A", n_ports);
    let keep: Vec<&str> = labels.iter().map(String::as_str).collect();
    Ok(partial_trace(m, space, &keep)?.0)
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub n_ports: usize,
    pub qudit_dim: usize,
    pub convention: Convention,
    pub primal: PrimalPoint,
    pub dual: DualCertificate,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    /// Largest equality residual of the primal point.
    pub primal_residual: f64,
    pub history: Vec<IterateRecord>,
}

/// The solution summary written by front ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    #[serde(rename = "n")]
    pub n_ports: usize,
    #[serde(rename = "d")]
    pub qudit_dim: usize,
    #[serde(rename = "F_primal")]
    pub primal_value: f64,
    #[serde(rename = "F_dual")]
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            n_ports: self.n_ports,
            qudit_dim: self.qudit_dim,
            primal_value: self.primal_value,
            dual_value: self.dual_value,
            gap: self.gap,
            iterations: self.iterations,
        }
    }

    pub fn average_fidelity(&self) -> f64 {
        crate::protocol::average_fidelity(self.primal_value, self.qudit_dim)
    }
}

/// Maps a realified iterate back to Hermitian blocks, the raw dual
/// `Ω = Σ_k y_k H_k`, `a = y_last`, and repairs the dual: `Ω` is shifted by
/// the identity until `Ω ⪰ σ(i)/d²` holds, then `a` is the largest eigenvalue
/// of `tr_B Ω`.
struct Certifier<'a> {
    instance: &'a SdpInstance,
    states: SignalStateSet,
    space: TensorSpace,
}

struct Certified {
    primal: PrimalPoint,
    omega: CMatrix,
    a: f64,
    primal_value: f64,
    dual_value: f64,
}

impl Certifier<'_> {
    fn certify(&self, it: &RealIterate) -> Result<Certified> {
        let inst = self.instance;
        let n = inst.n_ports;
        let d = inst.qudit_dim as f64;
        let blocks: Vec<CMatrix> = it.x.iter().map(CMatrix::derealify).collect();
        let primal = PrimalPoint {
            pi_tilde: blocks[..n].to_vec(),
            x: blocks[n].clone(),
        };
        let dim = inst.block_dims[0];
        let mut omega = CMatrix::zeros(dim, dim);
        for (h, &yk) in inst.basis.iter().zip(&it.y) {
            for (r, c, v) in h.entries() {
                omega[(r, c)] += v * yk;
            }
        }
        let omega = omega.hermitian_part();
        let scale = 1.0 / (d * d);
        let mut shift = 0.0_f64;
        for i in 1..=n {
            let slack = &omega - &self.states.sigma(i).scale(scale);
            shift = shift.max(-eigh(&slack)?.min_eigenvalue());
        }
        let omega = &omega + &CMatrix::identity(dim).scale(shift);
        let marginal = trace_out_b(&omega, &self.space, n)?;
        let a = eigh(&marginal)?.max_eigenvalue();
        let primal_value = inst.objective_value(&primal.blocks());
        let dual_value = a * d.powi(n as i32);
        Ok(Certified {
            primal,
            omega,
            a,
            primal_value,
            dual_value,
        })
    }
}

fn realify_point(p: &PrimalPoint) -> Vec<RMatrix> {
    p.blocks().iter().map(CMatrix::realify).collect()
}

/// Strictly feasible dual start: `Ω = c 1` above every `σ(i)/d²`, `a = 2 c d`.
fn dual_start(inst: &SdpInstance, real: &RealSdp) -> (Vec<f64>, Vec<RMatrix>) {
    let d = inst.qudit_dim as f64;
    let c = 2.0 / d.powi(inst.n_ports as i32 + 1);
    let mut y = vec![0.0; real.rhs.len()];
    for (k, h) in inst.basis.iter().enumerate() {
        if matches!(h, BasisElement::Diagonal(_)) {
            y[k] = c;
        }
    }
    *y.last_mut().expect("trace constraint") = 2.0 * c * d;
    let z = real
        .adjoint(&y)
        .iter()
        .zip(&real.objective)
        .map(|(a, c)| a - c)
        .collect();
    (y, z)
}

/// Solves the program from the square-root warm start and returns the
/// certified primal and dual values.
pub fn solve(instance: &SdpInstance, opts: &SolveOptions) -> Result<SdpSolution> {
    let n = instance.n_ports;
    let d = instance.qudit_dim;
    let real = instance.realify();
    let warm = srm_warm_start(n, d)?;
    let (y, z) = dual_start(instance, &real);
    let start = RealIterate {
        x: realify_point(&warm),
        y,
        z,
    };
    let certifier = Certifier {
        instance,
        states: signal_states(n, d, instance.convention)?,
        space: ab_space(n, d),
    };
    let mut certify = |it: &RealIterate| -> Result<f64> {
        let c = certifier.certify(it)?;
        Ok(c.dual_value - c.primal_value)
    };
    let sol = solve_real(&real, start, opts, &mut certify)?;
    let c = certifier.certify(&sol.iterate)?;
    let d2 = (d * d) as f64;
    Ok(SdpSolution {
        n_ports: n,
        qudit_dim: d,
        convention: instance.convention,
        primal_residual: instance.primal_residual(&c.primal.blocks()),
        primal: c.primal,
        dual: DualCertificate {
            omega: c.omega.scale(d2),
            a: c.a * d2,
        },
        primal_value: c.primal_value,
        dual_value: c.dual_value,
        gap: c.dual_value - c.primal_value,
        iterations: sol.iterations,
        history: sol.history,
    })
}

/// A protocol read off a primal point: resource operator, measurement, and
/// the projector onto the support of `X`.
#[derive(Clone, Debug)]
pub struct ExtractedProtocol {
    /// `O = X^{½}`, rescaled so that `tr O O† = d^N` exactly.
    pub resource_operator: CMatrix,
    pub povm: Povm,
    pub support_projector: CMatrix,
}

/// `O = X^{½}` and `Π_i = (X^{-½} ⊗ 1) Π̃_i (X^{-½} ⊗ 1)` on the support of
/// `X`, with the kernel shared out evenly. A final congruence by
/// `(Σ Π_i)^{-½}` removes the residual completeness defect.
pub fn extract_resource(point: &PrimalPoint, qudit_dim: usize, rank_tol: f64) -> Result<ExtractedProtocol> {
    let n = point.pi_tilde.len();
    if n == 0 {
        return Err(Error::validation("no measurement blocks"));
    }
    let a_dim = point.x.rows();
    let d = qudit_dim;
    let eig = eigh(&point.x.hermitian_part())?;
    let top = eig.max_eigenvalue().max(0.0);
    let cut = rank_tol * top.max(1.0);
    let trace: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let norm = (a_dim as f64 / trace).sqrt();
    let o = eig.apply_fn(|l| if l > 0.0 { l.sqrt() * norm } else { 0.0 });
    let inv_half = eig.apply_fn(|l| if l > cut { l.powf(-0.5) } else { 0.0 });
    let support = eig.apply_fn(|l| if l > cut { 1.0 } else { 0.0 });

    let id_b = CMatrix::identity(d);
    let lift = inv_half.kron(&id_b);
    let kernel = (&CMatrix::identity(a_dim) - &support)
        .kron(&id_b)
        .scale(1.0 / n as f64);
    let raw: Vec<CMatrix> = point
        .pi_tilde
        .iter()
        .map(|p| &lift.matmul(p).matmul(&lift).hermitian_part() + &kernel)
        .collect();
    let mut total = CMatrix::zeros(a_dim * d, a_dim * d);
    for p in &raw {
        total += p;
    }
    let fix = crate::linalg::inv_sqrt_on_support(&total.hermitian_part(), 1e-12)?;
    let elements: Vec<CMatrix> = raw
        .iter()
        .map(|p| fix.matmul(p).matmul(&fix).hermitian_part())
        .collect();
    let space = ab_space(n, d);
    let povm = Povm::new(space, elements)?;
    Ok(ExtractedProtocol {
        resource_operator: o,
        povm,
        support_projector: support,
    })
}

impl SdpSolution {
    pub fn extract_resource(&self) -> Result<ExtractedProtocol> {
        extract_resource(&self.primal, self.qudit_dim, 1e-10)
    }
}

/// Solves with default options; the usual entry point.
pub fn optimal_fidelity(n_ports: usize, qudit_dim: usize, override_size_cap: bool) -> Result<SdpSolution> {
    let inst = build_primary(n_ports, qudit_dim, override_size_cap)?;
    solve(&inst, &SolveOptions::default())
}
