//! Exact density-matrix simulation of the teleportation channel and of the
//! programmable processor built on top of it.
//!
//! The joint space is ordered `[A1, …, AN, B1, …, BN, C]`: Alice's ports,
//! Bob's ports and the input. Alice's measurement acts on `[A1, …, AN, C]`
//! with the matrix of the `[A1, …, AN, B]` POVM unchanged (the `B` factor is
//! read as `C`, no transpose). A program `ε` is applied to every `B_k` before
//! the measurement, so the processor never materializes `|ε⟩`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    apply_to_vector, conjugate_local, eigh, kron_vec, partial_trace, permute_vector, sqrt_psd,
    CMatrix, MatrixJson, TensorSpace,
};
use crate::protocol::{
    check_ports, check_resource_operator, pair_state, port_labels, Convention,
    FidelityMethod, FidelityReport, Povm, PSD_TOL,
};

/// Largest joint dimension `d^(2N+1)` simulated densely.
pub const MAX_SIM_DIM: usize = 512;

/// Below this an outcome is reported with zero probability.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-14;

const TP_TOL: f64 = 1e-12;
const NONINCREASING_TOL: f64 = 1e-9;

/// A quantum operation on a single port, as Kraus operators.
#[derive(Clone, Debug)]
pub struct ProgramOperation {
    kraus_ops: Vec<CMatrix>,
    trace_preserving: bool,
}

impl ProgramOperation {
    /// Validates `Σ K†K ⪯ 1`; the operation is trace preserving when the sum
    /// is the identity to `1e-12`.
    pub fn new(kraus_ops: Vec<CMatrix>) -> Result<Self> {
        let first = kraus_ops
            .first()
            .ok_or_else(|| Error::validation("a program needs at least one Kraus operator"))?;
        let d = first.rows();
        if d == 0 {
            return Err(Error::validation("empty Kraus operator"));
        }
        let mut sum = CMatrix::zeros(d, d);
        for k in &kraus_ops {
            if k.rows() != d || k.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: k.rows().max(k.cols()),
                });
            }
            sum = &sum + &k.adjoint().matmul(k);
        }
        let identity = CMatrix::identity(d);
        let trace_preserving = sum.max_abs_diff(&identity) <= TP_TOL;
        if !trace_preserving {
            let slack = eigh(&(&identity - &sum).hermitian_part())?.min_eigenvalue();
            if slack < -NONINCREASING_TOL {
                return Err(Error::validation(format!(
                    "Kraus operators increase trace (Σ K†K exceeds 1 by {:e})",
                    -slack
                )));
            }
        }
        Ok(ProgramOperation {
            kraus_ops,
            trace_preserving,
        })
    }

    pub fn identity(d: usize) -> Self {
        ProgramOperation {
            kraus_ops: vec![CMatrix::identity(d)],
            trace_preserving: true,
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `ρ ↦ tr(ρ) 1/d`.
    pub fn depolarizing(d: usize) -> Self {
        let scale = 1.0 / (d as f64).sqrt();
        let kraus_ops = (0..d)
            .flat_map(|j| {
                (0..d).map(move |k| {
                    let mut m = CMatrix::zeros(d, d);
                    m[(j, k)] = Complex64::new(scale, 0.0);
                    m
                })
            })
            .collect();
        ProgramOperation {
            kraus_ops,
            trace_preserving: true,
        }
    }

    /// The single filtering branch `ρ ↦ |v⟩⟨v| ρ |v⟩⟨v|` of a projective
    /// measurement; trace non-increasing.
    pub fn projector(v: &[Complex64]) -> Result<Self> {
        let norm = crate::linalg::norm(v);
        if norm == 0.0 {
            return Err(Error::validation("projector onto the zero vector"));
        }
        let unit: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::new(vec![CMatrix::projector(&unit)])
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn dim(&self) -> usize {
        self.kraus_ops[0].rows()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.rows(), rho.cols());
        for k in &self.kraus_ops {
            out = &out + &k.matmul(rho).matmul(&k.adjoint());
        }
        out
    }
}

/// The shared entangled state: either `(O ⊗ 1)` acting on pairs in the
/// given convention, or an explicit vector on `[A1, …, AN, B1, …, BN]`.
#[derive(Clone, Debug)]
pub enum Resource {
    Operator {
        operator: CMatrix,
        convention: Convention,
    },
    State(Vec<Complex64>),
}

impl Resource {
    /// Plain pairs, `O = 1`.
    pub fn pairs(n_ports: usize, qudit_dim: usize, convention: Convention) -> Self {
        Resource::Operator {
            operator: CMatrix::identity(qudit_dim.pow(n_ports as u32)),
            convention,
        }
    }

    /// The normalized state vector on `[A1, …, AN, B1, …, BN]`.
    pub fn state_vector(&self, n_ports: usize, qudit_dim: usize) -> Result<Vec<Complex64>> {
        let a_dim = qudit_dim.pow(n_ports as u32);
        match self {
            Resource::Operator {
                operator,
                convention,
            } => {
                check_resource_operator(operator, a_dim)?;
                let pair = pair_state(qudit_dim, *convention)?;
                let mut v = vec![Complex64::new(1.0, 0.0)];
                let mut interleaved = Vec::new();
                for k in 1..=n_ports {
                    v = kron_vec(&v, &pair);
                    interleaved.push((format!("A{k}"), qudit_dim));
                    interleaved.push((format!("B{k}"), qudit_dim));
                }
                let space = TensorSpace::new(interleaved)?;
                let order = resource_labels(n_ports);
                let order: Vec<&str> = order.iter().map(String::as_str).collect();
                let (v, space) = permute_vector(&v, &space, &order)?;
                let a = port_labels("A", n_ports);
                let a: Vec<&str> = a.iter().map(String::as_str).collect();
                apply_to_vector(operator, &a, &v, &space)
            }
            Resource::State(v) => {
                if v.len() != a_dim * a_dim {
                    return Err(Error::DimensionMismatch {
                        expected: a_dim * a_dim,
                        got: v.len(),
                    });
                }
                let norm = crate::linalg::norm(v);
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::validation(format!(
                        "resource state has norm {norm}, expected 1"
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

fn resource_labels(n_ports: usize) -> Vec<String> {
    let mut labels = port_labels("A", n_ports);
    labels.extend(port_labels("B", n_ports));
    labels
}

/// One measurement outcome.
#[derive(Clone, Debug)]
pub struct TeleportOutcome {
    /// 1-based port index.
    pub index: usize,
    pub probability: f64,
    /// Normalized state on Bob's selected port; zero when the probability is
    /// negligible.
    pub conditional_output: CMatrix,
}

#[derive(Clone, Debug)]
pub struct TeleportResult {
    pub outcomes: Vec<TeleportOutcome>,
    /// `Σ_i p_i ρ_i`, i.e. the unnormalized sum over outcomes.
    pub average_output: CMatrix,
}

impl TeleportResult {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// JSON body `{"outcomes": [{"i", "p", "rho"}], "average"}`.
    pub fn to_json(&self) -> SimulationJson {
        let d = self.average_output.rows();
        let space = TensorSpace::new([("B", d)]).expect("single factor");
        SimulationJson {
            outcomes: self
                .outcomes
                .iter()
                .map(|o| OutcomeJson {
                    i: o.index,
                    p: o.probability,
                    rho: MatrixJson::from_matrix(&o.conditional_output, &space),
                })
                .collect(),
            average: MatrixJson::from_matrix(&self.average_output, &space),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutcomeJson {
    pub i: usize,
    pub p: f64,
    pub rho: MatrixJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationJson {
    pub outcomes: Vec<OutcomeJson>,
    pub average: MatrixJson,
}

/// A fixed teleportation configuration: resource plus measurement.
#[derive(Clone, Debug)]
pub struct Teleporter {
    n_ports: usize,
    qudit_dim: usize,
    resource: CMatrix,
    sqrt_povm: Vec<CMatrix>,
    space: TensorSpace,
}

impl Teleporter {
    pub fn new(resource: &Resource, povm: &Povm) -> Result<Self> {
        let n = povm.len();
        let dims = povm.space().dims();
        if dims.len() != n + 1 {
            return Err(Error::validation(format!(
                "{} POVM elements on a space of {} factors",
                n,
                dims.len()
            )));
        }
        let d = dims[n];
        check_ports(n, d)?;
        if dims.iter().any(|&x| x != d) {
            return Err(Error::validation("POVM factors must share one qudit dimension"));
        }
        let mut total: usize = d;
        for _ in 0..2 * n {
            total = total.saturating_mul(d);
        }
        if total > MAX_SIM_DIM {
            return Err(Error::resource(format!(
                "channel simulation limited to d^(2N+1) <= {MAX_SIM_DIM}"
            )));
        }
        let psi = resource.state_vector(n, d)?;
        let sqrt_povm = povm
            .elements()
            .iter()
            .map(|p| sqrt_psd(p, PSD_TOL))
            .collect::<Result<Vec<_>>>()?;
        let mut factors: Vec<(String, usize)> =
            resource_labels(n).into_iter().map(|l| (l, d)).collect();
        factors.push(("C".to_string(), d));
        Ok(Teleporter {
            n_ports: n,
            qudit_dim: d,
            resource: CMatrix::projector(&psi),
            sqrt_povm,
            space: TensorSpace::new(factors)?,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn qudit_dim(&self) -> usize {
        self.qudit_dim
    }

    fn labels(&self, prefix: &str) -> Vec<String> {
        port_labels(prefix, self.n_ports)
    }

    fn programmed_resource(&self, program: Option<&ProgramOperation>) -> Result<CMatrix> {
        let Some(program) = program else {
            return Ok(self.resource.clone());
        };
        if program.dim() != self.qudit_dim {
            return Err(Error::DimensionMismatch {
                expected: self.qudit_dim,
                got: program.dim(),
            });
        }
        let space = self.space.restrict(&self.resource_label_refs())?;
        let mut rho = self.resource.clone();
        for b in self.labels("B") {
            let mut next = CMatrix::zeros(rho.rows(), rho.cols());
            for k in program.kraus_ops() {
                next = &next + &conjugate_local(k, &[b.as_str()], &rho, &space)?;
            }
            rho = next;
        }
        Ok(rho)
    }

    fn resource_label_refs(&self) -> Vec<&str> {
        self.space.labels()[..2 * self.n_ports].to_vec()
    }

    fn check_input(&self, input: &CMatrix) -> Result<()> {
        if input.rows() != self.qudit_dim || input.cols() != self.qudit_dim {
            return Err(Error::DimensionMismatch {
                expected: self.qudit_dim,
                got: input.rows().max(input.cols()),
            });
        }
        Ok(())
    }

    /// Unnormalized port outputs `tr_{A B̄_i C} √Π_i (ρ_res ⊗ X) √Π_i`; `X`
    /// need not be a state, which lets the Choi matrix be built blockwise.
    fn port_outputs(&self, resource: &CMatrix, input: &CMatrix) -> Result<Vec<CMatrix>> {
        let joint = resource.kron(input);
        let mut measured_on = self.labels("A");
        measured_on.push("C".to_string());
        let on: Vec<&str> = measured_on.iter().map(String::as_str).collect();
        let mut outputs = Vec::with_capacity(self.n_ports);
        for (i, s) in self.sqrt_povm.iter().enumerate() {
            let post = conjugate_local(s, &on, &joint, &self.space)?;
            let port = format!("B{}", i + 1);
            outputs.push(partial_trace(&post, &self.space, &[port.as_str()])?.0);
        }
        Ok(outputs)
    }

    /// Runs the channel on a density matrix, optionally with `ε` applied to
    /// every port of the resource first.
    pub fn teleport(
        &self,
        input: &CMatrix,
        program: Option<&ProgramOperation>,
    ) -> Result<TeleportResult> {
        self.check_input(input)?;
        let resource = self.programmed_resource(program)?;
        let outputs = self.port_outputs(&resource, input)?;
        let d = self.qudit_dim;
        let mut average = CMatrix::zeros(d, d);
        let mut outcomes = Vec::with_capacity(outputs.len());
        for (i, out) in outputs.into_iter().enumerate() {
            average = &average + &out;
            let p = out.trace().re;
            let (probability, conditional_output) = if p < NEGLIGIBLE_PROBABILITY {
                (0.0, CMatrix::zeros(d, d))
            } else {
                (p, out.scale(1.0 / p).hermitian_part())
            };
            outcomes.push(TeleportOutcome {
                index: i + 1,
                probability,
                conditional_output,
            });
        }
        Ok(TeleportResult {
            outcomes,
            average_output: average.hermitian_part(),
        })
    }

    /// `Λ(input)` for the plain resource.
    pub fn channel(&self, input: &CMatrix) -> Result<CMatrix> {
        Ok(self.teleport(input, None)?.average_output)
    }

    /// `(Λ ⊗ 1)(|φ+⟩⟨φ+|)` on `[B, D]`, assembled from `Λ(|k⟩⟨l|)`.
    pub fn choi_matrix(&self) -> Result<CMatrix> {
        let d = self.qudit_dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for k in 0..d {
            for l in 0..d {
                let mut unit = CMatrix::zeros(d, d);
                unit[(k, l)] = Complex64::new(1.0, 0.0);
                let outputs = self.port_outputs(&self.resource, &unit)?;
                for out in outputs {
                    for a in 0..d {
                        for b in 0..d {
                            choi[(a * d + k, b * d + l)] += out[(a, b)] / d as f64;
                        }
                    }
                }
            }
        }
        Ok(choi)
    }

    /// Entanglement fidelity `⟨φ+|(Λ ⊗ 1)(φ+)|φ+⟩` through the Choi matrix.
    pub fn choi_fidelity(&self, convention: Convention) -> Result<FidelityReport> {
        let d = self.qudit_dim;
        let choi = self.choi_matrix()?;
        let phi = pair_state(d, Convention::PhiPlus)?;
        let value = crate::linalg::inner(&phi, &choi.matvec(&phi)).re;
        Ok(FidelityReport::new(
            self.n_ports,
            d,
            value,
            FidelityMethod::Choi,
            convention,
        ))
    }

    /// Bob's state on all ports after the measurement, averaged over
    /// outcomes and without selecting a port.
    pub fn bob_marginal(&self, input: &CMatrix) -> Result<CMatrix> {
        self.check_input(input)?;
        let joint = self.resource.kron(input);
        let mut measured_on = self.labels("A");
        measured_on.push("C".to_string());
        let on: Vec<&str> = measured_on.iter().map(String::as_str).collect();
        let keep = self.labels("B");
        let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
        let mut total: Option<CMatrix> = None;
        for s in &self.sqrt_povm {
            let post = conjugate_local(s, &on, &joint, &self.space)?;
            let part = partial_trace(&post, &self.space, &keep)?.0;
            total = Some(match total {
                Some(t) => &t + &part,
                None => part,
            });
        }
        Ok(total.expect("at least one port"))
    }
}

/// Runs the channel once; see [`Teleporter::teleport`].
pub fn teleport(
    input: &CMatrix,
    resource: &Resource,
    povm: &Povm,
    program: Option<&ProgramOperation>,
) -> Result<TeleportResult> {
    Teleporter::new(resource, povm)?.teleport(input, program)
}

/// Entanglement fidelity of the simulated channel, labelled with the pair
/// convention of the configuration.
pub fn choi_fidelity(
    resource: &Resource,
    povm: &Povm,
    convention: Convention,
) -> Result<FidelityReport> {
    Teleporter::new(resource, povm)?.choi_fidelity(convention)
}

/// Output of a programmed run.
#[derive(Clone, Debug)]
pub struct ProcessorOutput {
    pub output: CMatrix,
    pub success_probability: f64,
    pub outcomes: Vec<TeleportOutcome>,
}

/// A programmable processor: teleportation whose resource ports have been
/// acted on by the program. Trace non-increasing programs are normalized by
/// the pooled acceptance probability over all outcomes.
#[derive(Clone, Debug)]
pub struct Processor {
    teleporter: Teleporter,
}

impl Processor {
    pub fn new(resource: &Resource, povm: &Povm) -> Result<Self> {
        Ok(Processor {
            teleporter: Teleporter::new(resource, povm)?,
        })
    }

    pub fn teleporter(&self) -> &Teleporter {
        &self.teleporter
    }

    pub fn execute(&self, program: &ProgramOperation, input: &CMatrix) -> Result<ProcessorOutput> {
        let run = self.teleporter.teleport(input, Some(program))?;
        let success_probability = run.total_probability();
        let d = self.teleporter.qudit_dim;
        let output = if success_probability < NEGLIGIBLE_PROBABILITY {
            CMatrix::zeros(d, d)
        } else {
            run.average_output.scale(1.0 / success_probability)
        };
        Ok(ProcessorOutput {
            output,
            success_probability: if program.trace_preserving() {
                1.0
            } else {
                success_probability
            },
            outcomes: run.outcomes,
        })
    }
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn state_fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    const CLAMP: f64 = 1e-12;
    let dec = eigh(&rho.hermitian_part())?;
    let cutoff = CLAMP * dec.max_eigenvalue().max(0.0);
    let root = dec.apply_fn(|l| if l > cutoff { l.sqrt() } else { 0.0 });
    let inner = eigh(&root.matmul(sigma).matmul(&root).hermitian_part())?;
    let cutoff = CLAMP * inner.max_eigenvalue().max(0.0);
    let s: f64 = inner
        .eigenvalues
        .iter()
        .filter(|&&x| x > cutoff)
        .map(|x| x.sqrt())
        .sum();
    Ok(s * s)
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityEntry {
    /// `f(ε(χ), ε(Λ(χ)))`
    pub processed: f64,
    /// `f(χ, Λ(χ))`
    pub plain: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub entries: Vec<MonotonicityEntry>,
    pub all_passed: bool,
}

/// Checks that processing both the input and the teleported output with the
/// same channel never lowers their fidelity.
pub fn monotonicity_check(
    teleporter: &Teleporter,
    program: &ProgramOperation,
    inputs: &[Vec<Complex64>],
) -> Result<MonotonicityReport> {
    if !program.trace_preserving() {
        return Err(Error::validation("monotonicity needs a trace-preserving program"));
    }
    let mut entries = Vec::with_capacity(inputs.len());
    for chi in inputs {
        let norm = crate::linalg::norm(chi);
        if norm == 0.0 {
            return Err(Error::validation("zero input vector"));
        }
        let unit: Vec<Complex64> = chi.iter().map(|z| z / norm).collect();
        let pure = CMatrix::projector(&unit);
        let out = teleporter.channel(&pure)?;
        let plain = crate::linalg::inner(&unit, &out.matvec(&unit)).re;
        let processed = state_fidelity(&program.apply(&pure), &program.apply(&out))?;
        entries.push(MonotonicityEntry {
            processed,
            plain,
            passed: processed >= plain - 1e-10,
        });
    }
    let all_passed = entries.iter().all(|e| e.passed);
    Ok(MonotonicityReport {
        entries,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::linalg::{basis_vector, random_density, random_pure_state, random_unitary};
    use crate::protocol::{
        fidelity_closed_form, fidelity_dense, signal_states, srm_povm, SignalStateSet,
    };

    fn srm_setup(n: usize, d: usize, conv: Convention) -> (SignalStateSet, Povm, Teleporter) {
        let states = signal_states(n, d, conv).unwrap();
        let povm = srm_povm(&states).unwrap();
        let tel = Teleporter::new(&Resource::pairs(n, d, conv), &povm).unwrap();
        (states, povm, tel)
    }

    fn ket(d: usize, k: usize) -> CMatrix {
        CMatrix::projector(&basis_vector::<Complex64>(d, k))
    }

    #[test]
    fn single_port_output_is_maximally_mixed() {
        let (_, _, tel) = srm_setup(1, 2, Convention::Singlet);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let input = random_density(2, 2, &mut rng);
            let out = tel.channel(&input).unwrap();
            assert!(out.max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-12);
        }
    }

    #[test]
    fn three_port_basis_state_fidelity() {
        let (_, _, tel) = srm_setup(3, 2, Convention::Singlet);
        let out = tel.channel(&ket(2, 0)).unwrap();
        assert!((out[(0, 0)].re - 0.75).abs() < 1e-12);
    }

    #[test]
    fn unital_and_trace_preserving() {
        let (_, _, tel) = srm_setup(3, 2, Convention::Singlet);
        let run = tel.teleport(&CMatrix::identity(2).scale(0.5), None).unwrap();
        assert!(run.average_output.max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-12);
        for o in &run.outcomes {
            assert!((o.probability - 1.0 / 3.0).abs() < 1e-10);
            assert!((o.conditional_output.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn choi_matches_closed_form() {
        for n in 1..=4 {
            let (_, _, tel) = srm_setup(n, 2, Convention::Singlet);
            let f = tel.choi_fidelity(Convention::Singlet).unwrap();
            let exact = fidelity_closed_form(n).unwrap().entanglement_fidelity;
            assert!(
                (f.entanglement_fidelity - exact).abs() < 1e-9,
                "N={n}: {} vs {exact}",
                f.entanglement_fidelity
            );
        }
        let (_, _, tel) = srm_setup(1, 2, Convention::Singlet);
        let f = tel.choi_fidelity(Convention::Singlet).unwrap();
        assert!((f.entanglement_fidelity - 0.25).abs() < 1e-12);
    }

    #[test]
    fn choi_matches_dense_for_qutrits() {
        let (states, povm, tel) = srm_setup(2, 3, Convention::PhiPlus);
        let dense = fidelity_dense(&states, &povm, None).unwrap();
        let choi = tel.choi_fidelity(Convention::PhiPlus).unwrap();
        assert!((dense.entanglement_fidelity - choi.entanglement_fidelity).abs() < 1e-9);
    }

    #[test]
    fn measurement_needs_no_transpose_on_the_input() {
        // A complex POVM breaks the symmetry that would hide a transpose.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (states, povm, _) = srm_setup(2, 2, Convention::Singlet);
        let u = random_unitary(8, &mut rng);
        let twisted = povm.conjugated(&u).unwrap();
        let tel = Teleporter::new(&Resource::pairs(2, 2, Convention::Singlet), &twisted).unwrap();
        let dense = fidelity_dense(&states, &twisted, None).unwrap();
        let choi = tel.choi_fidelity(Convention::Singlet).unwrap();
        assert!((dense.entanglement_fidelity - choi.entanglement_fidelity).abs() < 1e-12);
    }

    #[test]
    fn unitary_programs_commute() {
        let (_, povm, _) = srm_setup(3, 2, Convention::Singlet);
        let proc = Processor::new(&Resource::pairs(3, 2, Convention::Singlet), &povm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let u = random_unitary(2, &mut rng);
            let input = random_density(2, 2, &mut rng);
            let program = ProgramOperation::unitary(u.clone()).unwrap();
            let run = proc.execute(&program, &input).unwrap();
            let expected = proc.teleporter().channel(&input).unwrap().conjugate_by(&u);
            assert!(run.output.max_abs_diff(&expected) < 1e-10);
            assert_eq!(run.success_probability, 1.0);
        }
    }

    #[test]
    fn depolarizing_program_commutes() {
        let (_, povm, _) = srm_setup(2, 2, Convention::Singlet);
        let proc = Processor::new(&Resource::pairs(2, 2, Convention::Singlet), &povm).unwrap();
        let program = ProgramOperation::depolarizing(2);
        let run = proc.execute(&program, &ket(2, 1)).unwrap();
        assert!(run.output.max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn filtering_program_is_pooled() {
        let (_, povm, _) = srm_setup(3, 2, Convention::Singlet);
        let proc = Processor::new(&Resource::pairs(3, 2, Convention::Singlet), &povm).unwrap();
        let zero = basis_vector::<Complex64>(2, 0);
        let program = ProgramOperation::projector(&zero).unwrap();
        assert!(!program.trace_preserving());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
        let input = CMatrix::projector(&plus);
        let run = proc.execute(&program, &input).unwrap();
        assert!(run.success_probability > 0.0 && run.success_probability < 1.0);
        let teleported = proc.teleporter().channel(&input).unwrap();
        let filtered = program.apply(&teleported);
        let expected = filtered.scale(1.0 / filtered.trace().re);
        assert!(run.output.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn outcomes_are_permutation_covariant() {
        for n in 2..=4 {
            let (_, _, tel) = srm_setup(n, 2, Convention::Singlet);
            let run = tel.teleport(&CMatrix::identity(2).scale(0.5), None).unwrap();
            for o in &run.outcomes {
                assert!((o.probability - 1.0 / n as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn no_signalling_to_bob() {
        let (_, _, tel) = srm_setup(3, 2, Convention::Singlet);
        let reference = tel.bob_marginal(&ket(2, 0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let input = random_density(2, 1, &mut rng);
            let m = tel.bob_marginal(&input).unwrap();
            assert!(m.max_abs_diff(&reference) < 1e-10);
        }
    }

    #[test]
    fn monotone_under_programs() {
        let (_, _, tel) = srm_setup(3, 2, Convention::Singlet);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let inputs: Vec<_> = (0..4).map(|_| random_pure_state(2, &mut rng)).collect();
        let id = monotonicity_check(&tel, &ProgramOperation::identity(2), &inputs).unwrap();
        for e in &id.entries {
            assert!((e.processed - e.plain).abs() < 1e-10);
        }
        let dep = monotonicity_check(&tel, &ProgramOperation::depolarizing(2), &inputs).unwrap();
        assert!(dep.all_passed);
        for e in &dep.entries {
            assert!((e.processed - 1.0).abs() < 1e-10);
        }
        for _ in 0..50 {
            let u = random_unitary(2, &mut rng);
            let chi = random_pure_state(2, &mut rng);
            let report =
                monotonicity_check(&tel, &ProgramOperation::unitary(u).unwrap(), &[chi]).unwrap();
            assert!(report.all_passed);
        }
    }

    #[test]
    fn orthogonal_resource_state_matches_operator() {
        let proto = crate::certificates::orthogonal_protocol(2, 2).unwrap();
        let from_op = Resource::Operator {
            operator: proto.resource_operator.clone(),
            convention: Convention::PhiPlus,
        }
        .state_vector(2, 2)
        .unwrap();
        let explicit = proto.resource_state();
        let overlap = crate::linalg::inner(&from_op, &explicit).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        let tel = Teleporter::new(&Resource::State(explicit), &proto.povm).unwrap();
        let f = tel.choi_fidelity(Convention::PhiPlus).unwrap();
        assert!((f.entanglement_fidelity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_programs_rejected() {
        let big = CMatrix::identity(2).scale(1.1);
        assert!(matches!(
            ProgramOperation::new(vec![big]),
            Err(Error::Validation(_))
        ));
        assert!(ProgramOperation::new(vec![]).is_err());
        let (_, _, tel) = srm_setup(2, 2, Convention::Singlet);
        let wrong = ProgramOperation::identity(3);
        assert!(tel.teleport(&ket(2, 0), Some(&wrong)).is_err());
        assert!(tel.channel(&ket(3, 0)).is_err());
    }

    #[test]
    fn simulation_cap() {
        let states = signal_states(5, 2, Convention::Singlet).unwrap();
        let povm = srm_povm(&states).unwrap();
        let r = Teleporter::new(&Resource::pairs(5, 2, Convention::Singlet), &povm);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn simulation_json_shape() {
        let (_, _, tel) = srm_setup(2, 2, Convention::Singlet);
        let run = tel.teleport(&ket(2, 0), None).unwrap();
        let v = serde_json::to_value(run.to_json()).unwrap();
        assert_eq!(v["outcomes"].as_array().unwrap().len(), 2);
        assert!(v["outcomes"][0]["p"].is_number());
        assert!(v["average"]["re"].is_array());
    }
}
