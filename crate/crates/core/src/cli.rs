//! Command-line front end. `pbt <subcommand> …` writes a JSON document
//! tagged `"schema": "pbt/1"` or a CSV table, and exits with
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | invalid input or arguments |
//! | 3 | problem too large for the dense caps |
//! | 4 | a solver did not converge |
//! | 5 | a certificate failed |
//!
//! `PBT_TOL` sets the PSD tolerance used by certificate checks; `--tol`
//! overrides it.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::{
    certify_orthogonal, certify_srm_optimal, certify_universal_upper, random_povm_check,
    CertificateKind, CertificateReport, RandomPovmCheck,
};
use crate::channel::{ProgramOperation, Resource, TeleportResult, Teleporter};
use crate::error::{Error, Result};
use crate::linalg::{psd_check, random_pure_state, CMatrix, MatrixJson};
use crate::protocol::{
    checked_dim, fidelity_blocks, fidelity_closed_form, fidelity_dense, rho_spectrum,
    signal_states, srm_povm, Convention, FidelityMethod, FidelityReport, RhoSpectrum,
    MAX_ANALYTIC_PORTS, MAX_DENSE_DIM, PSD_TOL,
};
use crate::sdp::{build_primary, solve, SolveOptions, REQUIRED_TIER_DIM, OVERRIDE_TIER_DIM};

pub const SCHEMA: &str = "pbt/1";
pub const TOL_ENV: &str = "PBT_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_CERTIFICATE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "pbt", version, about = "Port-based teleportation workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement and average fidelity of one configuration.
    Fidelity {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value = "closed_form")]
        method: FidelityMethod,
        #[arg(long)]
        convention: Option<Convention>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fidelity against N, one row per port count.
    Sweep {
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Comma-separated subset of closed, dense, sdp.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<SweepMethod>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dual certificates for the square-root measurement and the bound F <= N/d².
    Certify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        kind: Option<KindArg>,
        /// PSD tolerance for the margins (overrides PBT_TOL).
        #[arg(long)]
        tol: Option<f64>,
        /// Also compare against randomly rotated measurements.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Optimal fidelity over resources and measurements.
    Sdp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1e-7)]
        gap_tol: f64,
        #[arg(long)]
        override_size_cap: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Runs the teleportation channel on one input.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        convention: Option<Convention>,
        /// Matrix file, or one of zero, one, plus, mixed, random.
        #[arg(long)]
        input: Option<String>,
        /// JSON file `{"kraus": [matrix, …]}` applied to every port.
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenvalues of ρ with their degeneracies (qubits).
    Spectrum {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    Closed,
    Dense,
    Sdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Srm,
    Upper,
    Orthogonal,
    All,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Resource(_) => EXIT_RESOURCE,
        Error::Convergence { .. } | Error::EigenNoConvergence(_) => EXIT_CONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(Outcome { document, output, certificate_failed }) => {
            if let Err(e) = emit(&document, &output) {
                eprintln!("error: {e}");
                return exit_code(&e);
            }
            if certificate_failed {
                eprintln!("error: certificate check failed");
                EXIT_CERTIFICATE
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Rendered output of one command.
pub struct Outcome {
    pub document: String,
    pub output: OutputArgs,
    pub certificate_failed: bool,
}

fn emit(document: &str, output: &OutputArgs) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, document)?,
        None => std::io::stdout().lock().write_all(document.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn json_document<T: Serialize>(command: &str, body: T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&Envelope {
        schema: SCHEMA,
        command,
        body,
    })?;
    text.push('\n');
    Ok(text)
}

fn csv_document(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::validation(e.to_string()))
}

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn csv_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

/// Resolves the PSD tolerance: flag, then `PBT_TOL`, then the default.
pub fn resolve_tolerance(flag: Option<f64>, env: Option<&str>) -> Result<f64> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(raw)) => raw
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::validation(format!("{TOL_ENV}=`{raw}` is not a number")))?,
        (None, None) => PSD_TOL,
    };
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::validation(format!("tolerance {tol} must be finite and >= 0")));
    }
    Ok(tol)
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Fidelity {
            n,
            d,
            method,
            convention,
            output,
        } => cmd_fidelity(*n, *d, *method, *convention, output),
        Command::Sweep {
            n_max,
            d,
            methods,
            output,
        } => cmd_sweep(*n_max, *d, methods, output),
        Command::Certify {
            n,
            d,
            kind,
            tol,
            seed,
            output,
        } => {
            let env = std::env::var(TOL_ENV).ok();
            let tol = resolve_tolerance(*tol, env.as_deref())?;
            cmd_certify(*n, *d, *kind, tol, *seed, output)
        }
        Command::Sdp {
            n,
            d,
            gap_tol,
            override_size_cap,
            output,
        } => cmd_sdp(*n, *d, *gap_tol, *override_size_cap, output),
        Command::Simulate {
            n,
            d,
            convention,
            input,
            program,
            seed,
            output,
        } => cmd_simulate(
            *n,
            *d,
            *convention,
            input.as_deref(),
            program.as_ref(),
            *seed,
            output,
        ),
        Command::Spectrum { n, output } => cmd_spectrum(*n, output),
    }
}

fn done(document: String, output: &OutputArgs) -> Outcome {
    Outcome {
        document,
        output: output.clone(),
        certificate_failed: false,
    }
}

fn check_domain(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("--n must be at least 1"));
    }
    if d < 2 {
        return Err(Error::validation("--d must be at least 2"));
    }
    Ok(())
}

fn require_qubits(d: usize, what: &str) -> Result<()> {
    if d != 2 {
        return Err(Error::validation(format!("{what} is only available for d = 2")));
    }
    Ok(())
}

/// Fidelity of the square-root measurement (or the optimum, for `sdp`).
pub fn fidelity_report(
    n: usize,
    d: usize,
    method: FidelityMethod,
    convention: Option<Convention>,
) -> Result<FidelityReport> {
    check_domain(n, d)?;
    let convention = convention.unwrap_or_else(|| Convention::default_for(d));
    match method {
        FidelityMethod::ClosedForm => {
            require_qubits(d, "the closed form")?;
            let mut r = fidelity_closed_form(n)?;
            r.convention = convention;
            Ok(r)
        }
        FidelityMethod::Block => {
            require_qubits(d, "the block evaluation")?;
            let mut r = fidelity_blocks(n)?;
            r.convention = convention;
            Ok(r)
        }
        FidelityMethod::Dense => {
            checked_dim(n, d, MAX_DENSE_DIM)?;
            let states = signal_states(n, d, convention)?;
            let povm = srm_povm(&states)?;
            fidelity_dense(&states, &povm, None)
        }
        FidelityMethod::Sdp => {
            let solution = solve(&build_primary(n, d, false)?, &SolveOptions::default())?;
            Ok(FidelityReport::new(
                n,
                d,
                solution.primal_value,
                FidelityMethod::Sdp,
                solution.convention,
            ))
        }
        FidelityMethod::Choi => {
            checked_dim(n, d, MAX_DENSE_DIM)?;
            let states = signal_states(n, d, convention)?;
            let povm = srm_povm(&states)?;
            Teleporter::new(&Resource::pairs(n, d, convention), &povm)?.choi_fidelity(convention)
        }
    }
}

#[derive(Serialize)]
struct FidelityBody {
    #[serde(flatten)]
    report: FidelityReport,
    upper_bound: f64,
    within_upper_bound: bool,
}

fn cmd_fidelity(
    n: usize,
    d: usize,
    method: FidelityMethod,
    convention: Option<Convention>,
    output: &OutputArgs,
) -> Result<Outcome> {
    let report = fidelity_report(n, d, method, convention)?;
    let upper_bound = n as f64 / (d * d) as f64;
    let within_upper_bound = report.entanglement_fidelity <= upper_bound + 1e-12;
    let document = match output.format.unwrap_or(Format::Json) {
        Format::Json => json_document(
            "fidelity",
            FidelityBody {
                report,
                upper_bound,
                within_upper_bound,
            },
        )?,
        Format::Csv => csv_document(
            &["n", "d", "F", "f", "method", "convention"],
            &[vec![
                n.to_string(),
                d.to_string(),
                csv_float(report.entanglement_fidelity),
                csv_float(report.average_fidelity),
                report.method.to_string(),
                report.convention.to_string(),
            ]],
        )?,
    };
    Ok(done(document, output))
}

/// One row of the fidelity-versus-N table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub f_srm_closed: Option<f64>,
    pub f_srm_dense: Option<f64>,
    pub f_sdp: Option<f64>,
    pub f_classical_limit: f64,
    pub asymptote_1_minus_1_over_2n: Option<f64>,
}

pub const SWEEP_COLUMNS: [&str; 6] = [
    "N",
    "f_srm_closed",
    "f_srm_dense",
    "f_sdp",
    "f_classical_limit",
    "asymptote_1_minus_1_over_2N",
];

/// Rows `N = 1..=n_max`; the largest N is checked against every requested
/// method's cap before anything is computed.
pub fn sweep_rows(n_max: usize, d: usize, methods: &[SweepMethod]) -> Result<Vec<SweepRow>> {
    check_domain(n_max, d)?;
    let methods: Vec<SweepMethod> = if methods.is_empty() {
        vec![if d == 2 {
            SweepMethod::Closed
        } else {
            SweepMethod::Dense
        }]
    } else {
        methods.to_vec()
    };
    for m in &methods {
        match m {
            SweepMethod::Closed => {
                require_qubits(d, "the closed form")?;
                if n_max > MAX_ANALYTIC_PORTS {
                    return Err(Error::resource(format!(
                        "closed form limited to N <= {MAX_ANALYTIC_PORTS}"
                    )));
                }
            }
            SweepMethod::Dense => {
                checked_dim(n_max, d, MAX_DENSE_DIM)?;
            }
            SweepMethod::Sdp => {
                checked_dim(n_max, d, REQUIRED_TIER_DIM).map_err(|_| {
                    Error::resource(format!(
                        "sweeps solve the SDP only up to d^(N+1) <= {REQUIRED_TIER_DIM}; \
                         use `sdp --override-size-cap` for single runs up to {OVERRIDE_TIER_DIM}"
                    ))
                })?;
            }
        }
    }
    let f_of = |rep: FidelityReport| rep.average_fidelity;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut row = SweepRow {
            n,
            f_srm_closed: None,
            f_srm_dense: None,
            f_sdp: None,
            f_classical_limit: 2.0 / (d as f64 + 1.0),
            asymptote_1_minus_1_over_2n: (d == 2).then(|| 1.0 - 1.0 / (2.0 * n as f64)),
        };
        for m in &methods {
            match m {
                SweepMethod::Closed => {
                    row.f_srm_closed = Some(f_of(fidelity_closed_form(n)?));
                }
                SweepMethod::Dense => {
                    row.f_srm_dense =
                        Some(f_of(fidelity_report(n, d, FidelityMethod::Dense, None)?));
                }
                SweepMethod::Sdp => {
                    row.f_sdp = Some(f_of(fidelity_report(n, d, FidelityMethod::Sdp, None)?));
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SweepBody<'a> {
    d: usize,
    methods: &'a [SweepMethod],
    rows: Vec<SweepRow>,
}

fn cmd_sweep(
    n_max: usize,
    d: usize,
    methods: &[SweepMethod],
    output: &OutputArgs,
) -> Result<Outcome> {
    let rows = sweep_rows(n_max, d, methods)?;
    let document = match output.format.unwrap_or(Format::Csv) {
        Format::Json => json_document("sweep", SweepBody { d, methods, rows })?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        opt_float(r.f_srm_closed),
                        opt_float(r.f_srm_dense),
                        opt_float(r.f_sdp),
                        csv_float(r.f_classical_limit),
                        opt_float(r.asymptote_1_minus_1_over_2n),
                    ]
                })
                .collect();
            csv_document(&SWEEP_COLUMNS, &table)?
        }
    };
    Ok(done(document, output))
}

#[derive(Serialize)]
struct CertifyBody {
    n: usize,
    d: usize,
    tolerance: f64,
    passed: bool,
    reports: Vec<CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    random_povm_check: Option<RandomPovmCheck>,
}

fn cmd_certify(
    n: usize,
    d: usize,
    kind: Option<KindArg>,
    tol: f64,
    seed: Option<u64>,
    output: &OutputArgs,
) -> Result<Outcome> {
    check_domain(n, d)?;
    checked_dim(n, d, MAX_DENSE_DIM)?;
    let kinds: Vec<CertificateKind> = match kind {
        Some(KindArg::Srm) => {
            require_qubits(d, "the square-root measurement certificate")?;
            vec![CertificateKind::SrmOptimal]
        }
        Some(KindArg::Upper) => vec![CertificateKind::UniversalUpper],
        Some(KindArg::Orthogonal) => vec![CertificateKind::OrthogonalAchieving],
        None | Some(KindArg::All) => {
            let mut k = Vec::new();
            if d == 2 {
                k.push(CertificateKind::SrmOptimal);
            }
            k.push(CertificateKind::UniversalUpper);
            if kind == Some(KindArg::All) && n <= d {
                k.push(CertificateKind::OrthogonalAchieving);
            }
            k
        }
    };
    let reports = kinds
        .iter()
        .map(|k| match k {
            CertificateKind::SrmOptimal => certify_srm_optimal(n, tol),
            CertificateKind::UniversalUpper => certify_universal_upper(n, d, tol),
            CertificateKind::OrthogonalAchieving => certify_orthogonal(n, d, tol),
        })
        .collect::<Result<Vec<_>>>()?;
    let random = match seed {
        Some(seed) if d == 2 => Some(random_povm_check(n, 16, seed)?),
        _ => None,
    };
    let random_ok = random
        .as_ref()
        .map_or(true, |r| r.max_sampled <= r.srm_fidelity + tol);
    let passed = reports.iter().all(|r| r.passed) && random_ok;
    let document = match output.format.unwrap_or(Format::Json) {
        Format::Json => json_document(
            "certify",
            CertifyBody {
                n,
                d,
                tolerance: tol,
                passed,
                reports,
                random_povm_check: random,
            },
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        n.to_string(),
                        d.to_string(),
                        r.kind.to_string(),
                        r.passed.to_string(),
                        csv_float(r.worst_margin),
                        opt_float(r.bound),
                    ]
                })
                .collect();
            csv_document(&["n", "d", "kind", "passed", "worst_margin", "bound"], &rows)?
        }
    };
    Ok(Outcome {
        document,
        output: output.clone(),
        certificate_failed: !passed,
    })
}

#[derive(Serialize)]
struct SdpBody {
    #[serde(flatten)]
    summary: crate::sdp::SolutionSummary,
    f: f64,
    convention: Convention,
    primal_residual: f64,
}

fn cmd_sdp(
    n: usize,
    d: usize,
    gap_tol: f64,
    override_size_cap: bool,
    output: &OutputArgs,
) -> Result<Outcome> {
    check_domain(n, d)?;
    if !(gap_tol.is_finite() && gap_tol > 0.0) {
        return Err(Error::validation("--gap-tol must be positive"));
    }
    let instance = build_primary(n, d, override_size_cap)?;
    let opts = SolveOptions {
        gap_tol,
        ..SolveOptions::default()
    };
    let solution = solve(&instance, &opts)?;
    let summary = solution.summary();
    let document = match output.format.unwrap_or(Format::Json) {
        Format::Json => json_document(
            "sdp",
            SdpBody {
                f: solution.average_fidelity(),
                convention: solution.convention,
                primal_residual: solution.primal_residual,
                summary,
            },
        )?,
        Format::Csv => csv_document(
            &["n", "d", "F_primal", "F_dual", "gap", "iterations"],
            &[vec![
                n.to_string(),
                d.to_string(),
                csv_float(summary.primal_value),
                csv_float(summary.dual_value),
                csv_float(summary.gap),
                summary.iterations.to_string(),
            ]],
        )?,
    };
    Ok(done(document, output))
}

/// Program file contents.
#[derive(Debug, Deserialize)]
pub struct ProgramFile {
    pub kraus: Vec<MatrixJson>,
}

pub fn parse_program(text: &str) -> Result<ProgramOperation> {
    let raw: ProgramFile = serde_json::from_str(text)?;
    let ops = raw
        .kraus
        .iter()
        .map(|m| m.to_matrix().map(|(m, _)| m))
        .collect::<Result<Vec<_>>>()?;
    ProgramOperation::new(ops)
}

/// An input density matrix from a keyword or a matrix file.
pub fn parse_input(spec: Option<&str>, d: usize, seed: u64) -> Result<CMatrix> {
    let basis = |k: usize| {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        m
    };
    let rho = match spec.unwrap_or("zero") {
        "zero" => basis(0),
        "one" => basis(1),
        "plus" => CMatrix::from_fn(d, d, |_, _| Complex64::new(1.0 / d as f64, 0.0)),
        "mixed" => CMatrix::identity(d).scale(1.0 / d as f64),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            CMatrix::projector(&random_pure_state(d, &mut rng))
        }
        path => {
            let text = std::fs::read_to_string(path)?;
            MatrixJson::parse(&text)?.0
        }
    };
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::validation(format!(
            "input is {}x{}, expected {d}x{d}",
            rho.rows(),
            rho.cols()
        )));
    }
    let defect = rho.hermiticity_defect();
    if defect > 1e-9 {
        return Err(Error::NotHermitian(defect));
    }
    let (ok, min) = psd_check(&rho, PSD_TOL)?;
    if !ok {
        return Err(Error::NotPsd(min));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!("input has trace {tr}, expected 1")));
    }
    Ok(rho)
}

#[derive(Serialize)]
struct SimulateBody {
    n: usize,
    d: usize,
    convention: Convention,
    #[serde(flatten)]
    result: crate::channel::SimulationJson,
    #[serde(rename = "F")]
    entanglement_fidelity: f64,
    success_probability: f64,
}

/// Teleports `input` through the square-root-measurement protocol.
pub fn simulate(
    n: usize,
    d: usize,
    convention: Convention,
    input: &CMatrix,
    program: Option<&ProgramOperation>,
) -> Result<(TeleportResult, f64)> {
    check_domain(n, d)?;
    checked_dim(n, d, MAX_DENSE_DIM)?;
    let states = signal_states(n, d, convention)?;
    let povm = srm_povm(&states)?;
    let teleporter = Teleporter::new(&Resource::pairs(n, d, convention), &povm)?;
    let result = teleporter.teleport(input, program)?;
    let fidelity = teleporter.choi_fidelity(convention)?.entanglement_fidelity;
    Ok((result, fidelity))
}

fn cmd_simulate(
    n: usize,
    d: usize,
    convention: Option<Convention>,
    input: Option<&str>,
    program: Option<&PathBuf>,
    seed: u64,
    output: &OutputArgs,
) -> Result<Outcome> {
    check_domain(n, d)?;
    if output.format == Some(Format::Csv) {
        return Err(Error::validation("simulate writes JSON only"));
    }
    let convention = convention.unwrap_or_else(|| Convention::default_for(d));
    let rho = parse_input(input, d, seed)?;
    let program = program
        .map(|p| parse_program(&std::fs::read_to_string(p)?))
        .transpose()?;
    let (result, fidelity) = simulate(n, d, convention, &rho, program.as_ref())?;
    let document = json_document(
        "simulate",
        SimulateBody {
            n,
            d,
            convention,
            success_probability: result.total_probability(),
            result: result.to_json(),
            entanglement_fidelity: fidelity,
        },
    )?;
    Ok(done(document, output))
}

#[derive(Serialize)]
struct SpectrumBody {
    #[serde(flatten)]
    spectrum: RhoSpectrum,
    trace: f64,
}

fn cmd_spectrum(n: usize, output: &OutputArgs) -> Result<Outcome> {
    check_domain(n, 2)?;
    let spectrum = rho_spectrum(n)?;
    let document = match output.format.unwrap_or(Format::Json) {
        Format::Json => json_document(
            "spectrum",
            SpectrumBody {
                trace: spectrum.trace(),
                spectrum,
            },
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = spectrum
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.branch.to_string(),
                        e.two_j.to_string(),
                        csv_float(e.eigenvalue),
                        e.degeneracy.to_string(),
                    ]
                })
                .collect();
            csv_document(&["branch", "two_j", "eigenvalue", "degeneracy"], &rows)?
        }
    };
    Ok(done(document, output))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(csv_float(0.75), "0.75");
        assert_eq!(csv_float(2.0 / 3.0), "0.666666666667");
        assert_eq!(csv_float(1.0), "1");
        assert_eq!(csv_float(123456.0), "123456");
        assert_eq!(csv_float(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(csv_float(-0.125), "-0.125");
        assert_eq!(csv_float(0.0), "0");
    }

    #[test]
    fn tolerance_precedence() {
        assert_eq!(resolve_tolerance(None, None).unwrap(), PSD_TOL);
        assert_eq!(resolve_tolerance(None, Some("1e-6")).unwrap(), 1e-6);
        assert_eq!(resolve_tolerance(Some(1e-3), Some("1e-6")).unwrap(), 1e-3);
        assert!(resolve_tolerance(None, Some("abc")).is_err());
        assert!(resolve_tolerance(Some(-1.0), None).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::resource("x")), EXIT_RESOURCE);
        assert_eq!(exit_code(&Error::validation("x")), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::NotSquare(1, 2)), EXIT_VALIDATION);
        let conv = Error::Convergence {
            iterations: 3,
            gap: 1.0,
            reason: "stall".into(),
        };
        assert_eq!(exit_code(&conv), EXIT_CONVERGENCE);
    }

    #[test]
    fn sweep_crosses_classical_limit() {
        let rows = sweep_rows(6, 2, &[SweepMethod::Closed, SweepMethod::Dense]).unwrap();
        assert!(rows[1].f_srm_closed.unwrap() < 2.0 / 3.0);
        assert!(rows[2].f_srm_closed.unwrap() > 2.0 / 3.0);
        for r in &rows {
            assert!((r.f_srm_closed.unwrap() - r.f_srm_dense.unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn sweep_caps_are_checked_up_front() {
        let err = sweep_rows(51, 2, &[SweepMethod::Closed]).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_RESOURCE);
        let err = sweep_rows(5, 2, &[SweepMethod::Sdp]).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_RESOURCE);
        let err = sweep_rows(3, 3, &[SweepMethod::Closed]).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_VALIDATION);
    }

    #[test]
    fn input_keywords() {
        let plus = parse_input(Some("plus"), 2, 0).unwrap();
        assert!((plus[(0, 1)].re - 0.5).abs() < 1e-15);
        let r1 = parse_input(Some("random"), 3, 9).unwrap();
        let r2 = parse_input(Some("random"), 3, 9).unwrap();
        assert_eq!(r1, r2);
        assert!(parse_input(Some("/nonexistent/file.json"), 2, 0).is_err());
    }

    #[test]
    fn program_file_parses() {
        let text = r#"{"kraus": [{"dims": [2], "re": [[0, 1], [1, 0]], "im": []}]}"#;
        let p = parse_program(text).unwrap();
        assert!(p.trace_preserving());
        let bad = r#"{"kraus": [{"dims": [2], "re": [[2, 0], [0, 0]], "im": []}]}"#;
        assert!(parse_program(bad).is_err());
    }
}
