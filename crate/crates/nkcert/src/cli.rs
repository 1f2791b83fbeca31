//! Command-line interface.
//!
//! Subcommands: `corpus` (list/show built-in problems), `certify` (evaluate
//! the certificate), `solve` (certified Newton run), `picard` (certified
//! derivative-free run), `audit` (declaration audits), `majorant` (scalar
//! recurrence alone). All subcommands accept the same flags; settings can
//! also come from a JSON config file, with explicit flags taking
//! precedence.
//!
//! Exit codes: `0` success, `1` configuration/usage error, `2` certificate
//! failure or audit violations, `3` a certified bound was violated
//! mid-run, `4` other runtime failures (iteration budget, domain exit,
//! singular Jacobian).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::audit::{
    check_derivative_norm_contraction, check_integral_rate, check_linearization_residual,
    check_lipschitz_rate, check_regular_smoothness, step_bound_report, SampleReport,
    DEFAULT_SEED,
};
use crate::problems::{
    corpus_get, corpus_list, modulus_from_overrides, psi_from_overrides, CorpusEntry, Overrides,
};
use crate::majorant::{Certificate, IdentityReport, MajorantConfig, MajorantTrace};
use crate::moduli::PsiRate;
use crate::numfmt::sig17;
use crate::operator_model::{precondition, Preconditioned};
use crate::solver::{
    solve_certified, solve_picard, solve_uncertified, Method, SolveResult, SolveStatus,
};
use crate::{Error, Result};

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_MAX_ITER: usize = 100;
const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Parser, Debug)]
#[command(
    name = "nkcert",
    version,
    about = "Certified solver for operator equations f(x) + g(x) = 0 \
             (smooth f, nonsmooth g) with scalar majorant certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in problems, or show one in detail with --problem.
    Corpus(CommonOpts),
    /// Evaluate the majorant certificate for a problem.
    Certify(CommonOpts),
    /// Run the certified generalized Newton iteration.
    Solve(CommonOpts),
    /// Run the certified derivative-free (Picard-type) iteration.
    Picard(CommonOpts),
    /// Audit the declared regularity data by seeded sampling and run checks.
    Audit(CommonOpts),
    /// Run the scalar majorant recurrence on its own.
    Majorant(CommonOpts),
}

#[derive(Args, Debug, Clone, Default)]
struct CommonOpts {
    /// JSON configuration file; explicit flags override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Corpus problem name (see `nkcert corpus`).
    #[arg(long, value_name = "NAME")]
    problem: Option<String>,
    /// Parameter override, repeatable (e.g. --set x0=1.2 --set K=0.8).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Declared derivative-norm offset h (shorthand for --set h=...).
    #[arg(long, value_name = "H")]
    h: Option<f64>,
    /// Residual-norm convergence tolerance (default 1e-10).
    #[arg(long, value_name = "TOL")]
    tol: Option<f64>,
    /// Iteration budget (default 100).
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
    /// Sample count for audits (default 10000; 0 skips sampling checks).
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// RNG seed for audit sampling (default 12648430).
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Write the per-step table as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write a JSON report.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Solve even when the certificate fails (results are then uncertified).
    #[arg(long)]
    force: bool,
}

/// JSON configuration file schema; every field optional, flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    #[serde(default)]
    pub set: Vec<String>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub force: bool,
}

/// Fully resolved settings after merging defaults, config file, and flags.
#[derive(Debug)]
struct Settings {
    problem: Option<String>,
    overrides: Overrides,
    tol: f64,
    max_iter: usize,
    samples: usize,
    seed: u64,
    csv: Option<PathBuf>,
    report: Option<PathBuf>,
    force: bool,
}

fn resolve_settings(opts: &CommonOpts) -> Result<Settings> {
    let file: RunConfig = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| {
                Error::Config(format!("could not parse {}: {e}", path.display()))
            })?
        }
        None => RunConfig::default(),
    };
    let mut overrides = Overrides::parse(&file.set)?;
    if let Some(h) = file.h {
        overrides.insert("h", h);
    }
    overrides.merge_from(Overrides::parse(&opts.set)?);
    if let Some(h) = opts.h {
        overrides.insert("h", h);
    }
    let tol = opts.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Config(format!("tolerance must be finite and positive, got {tol}")));
    }
    let max_iter = opts.max_iter.or(file.max_iter).unwrap_or(DEFAULT_MAX_ITER);
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    Ok(Settings {
        problem: opts.problem.clone().or(file.problem),
        overrides,
        tol,
        max_iter,
        samples: opts.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
        seed: opts.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        csv: opts.csv.clone().or(file.csv),
        report: opts.report.clone().or(file.report),
        force: opts.force || file.force,
    })
}

fn require_problem<'s>(settings: &'s Settings, command: &str) -> Result<&'s str> {
    settings.problem.as_deref().ok_or_else(|| {
        Error::Config(format!(
            "'{command}' needs a problem: pass --problem NAME or name one in the config file"
        ))
    })
}

fn exit_code_for(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => 0,
        SolveStatus::CertificateFailed => 2,
        SolveStatus::BoundViolation => 3,
        SolveStatus::MaxIter | SolveStatus::DomainExit | SolveStatus::SingularJacobian => 4,
    }
}

fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Invalid(_) | Error::Corpus(_) | Error::Io(_) => 1,
        Error::Precondition(_) => 2,
        Error::Domain(_) | Error::Range(_) | Error::Singular(_) | Error::Oracle(_) => 4,
    }
}

/// Parse arguments from the process environment, run, and return the exit
/// code (errors are printed to stderr).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors; everything else
            // is, and usage errors share exit code 1 with config errors so
            // that code 2 keeps meaning "certificate failed / audit found
            // violations".
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for_error(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Corpus(opts) => cmd_corpus(&resolve_settings(opts)?),
        Command::Certify(opts) => cmd_certify(&resolve_settings(opts)?),
        Command::Solve(opts) => cmd_solve(&resolve_settings(opts)?),
        Command::Picard(opts) => cmd_picard(&resolve_settings(opts)?),
        Command::Audit(opts) => cmd_audit(&resolve_settings(opts)?),
        Command::Majorant(opts) => cmd_majorant(&resolve_settings(opts)?),
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::Config(format!("could not serialize report: {e}")))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

fn bound_ok_label(bound_ok: Option<bool>) -> &'static str {
    match bound_ok {
        Some(true) => "true",
        Some(false) => "false",
        None => "uncertified",
    }
}

/// Write the per-step table of a run as CSV with full-precision decimal
/// columns. The byte output is a pure function of the run.
fn write_solve_csv(path: &Path, result: &SolveResult) -> Result<()> {
    let mut out = String::from("n,t_n,delta_t,step_norm,residual,error_bound,bound_ok\n");
    for step in &result.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            step.n,
            sig17(step.t_before),
            sig17(step.delta_t),
            sig17(step.step_norm),
            sig17(step.residual_norm),
            sig17(step.error_bound),
            bound_ok_label(step.bound_ok),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_majorant_csv(path: &Path, trace: &MajorantTrace) -> Result<()> {
    let mut out = String::from("n,t_n,delta_t\n");
    for (n, pair) in trace.t.windows(2).enumerate() {
        out.push_str(&format!("{},{},{}\n", n, sig17(pair[0]), sig17(pair[1] - pair[0])));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn print_certificate(cert: &Certificate, problem: &str, norm: &str) {
    println!("certificate for {problem} (ball radius {}, {norm} norm)", cert.ball_radius);
    println!("  a (initial residual bound)  = {}", cert.a);
    println!("  h (derivative-norm offset)  = {}", cert.h);
    println!("  chi = omega^-1(1 - h)       = {}", cert.chi);
    println!("  Omega(chi)                  = {}", cert.omega_integral_chi);
    println!("  Psi(chi)                    = {}", cert.psi_integral_chi);
    println!("  W(0) / W(chi)               = {} / {}", cert.w_at_0, cert.w_at_chi);
    println!("  solvability slack           = {}", cert.solvability_slack);
    match cert.t_star {
        Some(t_star) => println!("  t* (certified radius)       = {t_star}"),
        None => println!("  t* (certified radius)       = none (condition fails)"),
    }
    println!(
        "  verdict                     = {}",
        if cert.certified() { "CERTIFIED" } else { "NOT CERTIFIED" }
    );
    if let Some(reason) = cert.failure_reason() {
        println!("  reason                      = {reason}");
    }
}

fn print_steps(result: &SolveResult) {
    if result.steps.is_empty() {
        return;
    }
    println!(
        "{:>4}  {:>13}  {:>13}  {:>13}  {:>13}  {:>13}  {:>11}",
        "n", "t_n", "delta_t", "step_norm", "residual", "error_bound", "bound_ok"
    );
    for step in &result.steps {
        println!(
            "{:>4}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>11}",
            step.n,
            step.t_before,
            step.delta_t,
            step.step_norm,
            step.residual_norm,
            step.error_bound,
            bound_ok_label(step.bound_ok),
        );
    }
}

fn print_outcome(result: &SolveResult) {
    let status = match result.status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIter => "iteration budget exhausted",
        SolveStatus::CertificateFailed => "certificate failed",
        SolveStatus::DomainExit => "left the certified region",
        SolveStatus::SingularJacobian => "singular Jacobian",
        SolveStatus::BoundViolation => "certified bound violated",
    };
    println!(
        "status: {status} after {} iteration(s); final residual {:.6e}",
        result.iterations, result.residual_norm
    );
    let coords: Vec<String> = result.x.iter().map(|v| format!("{v}")).collect();
    println!("x = [{}]", coords.join(", "));
    if let Some(diagnostic) = &result.diagnostic {
        println!("note: {diagnostic}");
    }
}

// ---------------------------------------------------------------------------
// Reports (JSON shapes)
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CertifyReport<'a> {
    problem: &'a str,
    norm: &'a str,
    radius: f64,
    overrides: &'a BTreeMap<String, f64>,
    certified: bool,
    certificate: &'a Certificate,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    problem: &'a str,
    norm: &'a str,
    radius: f64,
    overrides: &'a BTreeMap<String, f64>,
    tol: f64,
    max_iter: usize,
    forced: bool,
    result: &'a SolveResult,
}

#[derive(Serialize)]
struct AuditReport<'a> {
    problem: &'a str,
    norm: &'a str,
    radius: f64,
    overrides: &'a BTreeMap<String, f64>,
    samples: usize,
    seed: u64,
    certificate: &'a Certificate,
    total_violations: usize,
    checks: &'a [SampleReport],
    skipped: &'a [String],
}

#[derive(Serialize)]
struct MajorantReport<'a> {
    a: f64,
    h: f64,
    chi: f64,
    problem: Option<&'a str>,
    trace: &'a MajorantTrace,
    identity: &'a IdentityReport,
}

#[derive(Serialize)]
struct CorpusDetailReport<'a> {
    name: &'a str,
    dim: usize,
    norm: &'a str,
    radius: f64,
    x0: Vec<f64>,
    declared_modulus: String,
    declared_psi: String,
    declared_h: f64,
    summary: &'a str,
    notes: &'a str,
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn load_entry(settings: &Settings, command: &str) -> Result<CorpusEntry> {
    let name = require_problem(settings, command)?;
    corpus_get(name, &settings.overrides)
}

fn cmd_corpus(settings: &Settings) -> Result<i32> {
    match &settings.problem {
        None => {
            println!("{:<22} {:>3}  {:<9}  {}", "name", "dim", "norm", "summary");
            for item in corpus_list() {
                println!("{:<22} {:>3}  {:<9}  {}", item.name, item.dim, item.norm, item.summary);
            }
            if let Some(path) = &settings.report {
                write_json(path, &corpus_list())?;
            }
            Ok(0)
        }
        Some(_) => {
            let entry = load_entry(settings, "corpus")?;
            let problem = &entry.problem;
            let declared = problem.declared();
            println!("{}: {}", entry.name, entry.summary);
            println!("  dim      = {}", problem.dim());
            println!("  norm     = {}", problem.norm().describe());
            println!("  radius   = {}", problem.radius());
            let coords: Vec<String> = problem.x0().iter().map(|v| format!("{v}")).collect();
            println!("  x0       = [{}]", coords.join(", "));
            println!("  omega    = {}", declared.modulus.describe());
            println!("  psi      = {}", declared.psi.describe());
            println!("  h        = {}", declared.h);
            println!();
            println!("{}", entry.notes);
            if let Some(path) = &settings.report {
                write_json(
                    path,
                    &CorpusDetailReport {
                        name: entry.name,
                        dim: problem.dim(),
                        norm: problem.norm().describe(),
                        radius: problem.radius(),
                        x0: problem.x0().iter().copied().collect(),
                        declared_modulus: declared.modulus.describe(),
                        declared_psi: declared.psi.describe(),
                        declared_h: declared.h,
                        summary: entry.summary,
                        notes: &entry.notes,
                    },
                )?;
            }
            Ok(0)
        }
    }
}

fn cmd_certify(settings: &Settings) -> Result<i32> {
    let entry = load_entry(settings, "certify")?;
    let pp = precondition(&entry.problem)?;
    let cert = pp.majorant_config()?.certificate(entry.problem.radius())?;
    print_certificate(&cert, entry.name, entry.problem.norm().describe());
    if let Some(path) = &settings.report {
        write_json(
            path,
            &CertifyReport {
                problem: entry.name,
                norm: entry.problem.norm().describe(),
                radius: entry.problem.radius(),
                overrides: settings.overrides.as_map(),
                certified: cert.certified(),
                certificate: &cert,
            },
        )?;
    }
    Ok(if cert.certified() { 0 } else { 2 })
}

fn run_iteration(settings: &Settings, method: Method, command: &str) -> Result<i32> {
    let entry = load_entry(settings, command)?;
    let pp = precondition(&entry.problem)?;
    let mut result = match method {
        Method::Newton => solve_certified(&pp, settings.tol, settings.max_iter)?,
        Method::Picard => solve_picard(&pp, settings.tol, settings.max_iter)?,
    };
    if result.status == SolveStatus::CertificateFailed && settings.force {
        if method == Method::Picard {
            return Err(Error::Config(
                "--force applies to 'solve' only; an uncertified Picard run has no \
                 contraction guarantee at all"
                    .into(),
            ));
        }
        println!(
            "certificate failed ({}); continuing uncertified because --force was given",
            result.diagnostic.as_deref().unwrap_or("no reason recorded")
        );
        let cert = result.certificate.take();
        result = solve_uncertified(&pp, settings.tol, settings.max_iter)?;
        result.certificate = cert;
    }
    if let Some(cert) = &result.certificate {
        print_certificate(cert, entry.name, entry.problem.norm().describe());
    }
    print_steps(&result);
    print_outcome(&result);
    if let Some(path) = &settings.csv {
        write_solve_csv(path, &result)?;
    }
    if let Some(path) = &settings.report {
        write_json(
            path,
            &SolveReport {
                problem: entry.name,
                norm: entry.problem.norm().describe(),
                radius: entry.problem.radius(),
                overrides: settings.overrides.as_map(),
                tol: settings.tol,
                max_iter: settings.max_iter,
                forced: settings.force,
                result: &result,
            },
        )?;
    }
    Ok(exit_code_for(result.status))
}

fn cmd_solve(settings: &Settings) -> Result<i32> {
    run_iteration(settings, Method::Newton, "solve")
}

fn cmd_picard(settings: &Settings) -> Result<i32> {
    run_iteration(settings, Method::Picard, "picard")
}

fn print_sample_report(report: &SampleReport) {
    println!(
        "  {:<28} pairs {:>6}  violations {:>5}  max deficit {:>13.6e}  {}",
        report.check,
        report.pairs_evaluated,
        report.violations,
        report.max_deficit,
        if report.clean() { "clean" } else { "VIOLATED" }
    );
    if let Some(first) = &report.first_violation {
        println!("      first: {first}");
    }
}

fn cmd_audit(settings: &Settings) -> Result<i32> {
    let entry = load_entry(settings, "audit")?;
    let pp = precondition(&entry.problem)?;
    let mut checks: Vec<SampleReport> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();

    if settings.samples > 0 {
        checks.push(check_regular_smoothness(&pp, settings.samples, settings.seed)?);
        checks.push(check_derivative_norm_contraction(&pp, settings.samples, settings.seed)?);
        checks.push(check_lipschitz_rate(&pp, settings.samples, settings.seed)?);
        checks.push(check_integral_rate(&pp, settings.samples, settings.seed)?);
    } else {
        skipped.push("sampling checks skipped: samples = 0".into());
    }

    let cert = pp.majorant_config()?.certificate(entry.problem.radius())?;
    if cert.certified() {
        let run = solve_certified(&pp, settings.tol, settings.max_iter)?;
        checks.push(step_bound_report(&run)?);
        if run.status == SolveStatus::BoundViolation || run.status == SolveStatus::DomainExit {
            skipped.push(format!(
                "linearization_residual skipped: certified run aborted ({})",
                run.diagnostic.as_deref().unwrap_or("no diagnostic")
            ));
        } else {
            checks.push(check_linearization_residual(&pp, &run)?);
        }
    } else {
        skipped.push(format!(
            "step_bounds and linearization_residual skipped: {}",
            cert.failure_reason().unwrap_or_else(|| "certificate failed".into())
        ));
    }

    println!(
        "audit of {} (samples {}, seed {})",
        entry.name, settings.samples, settings.seed
    );
    for report in &checks {
        print_sample_report(report);
    }
    for note in &skipped {
        println!("  note: {note}");
    }
    let total_violations: usize = checks.iter().map(|r| r.violations).sum();
    println!(
        "audit result: {}",
        if total_violations == 0 {
            "no violations found (sampling can only falsify, never verify)".into()
        } else {
            format!("{total_violations} violation(s) — the declared regularity data are unsound")
        }
    );
    if let Some(path) = &settings.report {
        write_json(
            path,
            &AuditReport {
                problem: entry.name,
                norm: entry.problem.norm().describe(),
                radius: entry.problem.radius(),
                overrides: settings.overrides.as_map(),
                samples: settings.samples,
                seed: settings.seed,
                certificate: &cert,
                total_violations,
                checks: &checks,
                skipped: &skipped,
            },
        )?;
    }
    Ok(if total_violations == 0 { 0 } else { 2 })
}

fn majorant_config_from(settings: &Settings) -> Result<(MajorantConfig, Option<String>)> {
    if settings.problem.is_some() {
        let entry = load_entry(settings, "majorant")?;
        let pp: Preconditioned<'_> = precondition(&entry.problem)?;
        return Ok((pp.majorant_config()?, Some(entry.name.to_string())));
    }
    settings
        .overrides
        .ensure_known(&["a", "K", "L", "alpha", "h", "psi_c"], "the standalone majorant")?;
    let a = settings.overrides.get("a").ok_or_else(|| {
        Error::Config("the standalone majorant needs --set a=... (or use --problem)".into())
    })?;
    let modulus = modulus_from_overrides(&settings.overrides)?.ok_or_else(|| {
        Error::Config(
            "the standalone majorant needs a modulus: --set K=... or --set L=... [alpha=...]"
                .into(),
        )
    })?;
    let psi = psi_from_overrides(&settings.overrides)?.unwrap_or_else(PsiRate::zero);
    let h = settings.overrides.get("h").unwrap_or(0.0);
    Ok((MajorantConfig::new(a, h, modulus, psi)?, None))
}

fn cmd_majorant(settings: &Settings) -> Result<i32> {
    let (cfg, problem) = majorant_config_from(settings)?;
    let trace = cfg.run(settings.tol, settings.max_iter)?;
    let identity = cfg.identity_check(&trace)?;
    println!(
        "majorant recurrence (a = {}, h = {}, chi = {})",
        cfg.a(),
        cfg.h(),
        cfg.chi()
    );
    println!("{:>4}  {:>22}  {:>22}", "n", "t_n", "delta_t");
    for (n, pair) in trace.t.windows(2).enumerate() {
        println!("{:>4}  {:>22.16e}  {:>22.16e}", n, pair[0], pair[1] - pair[0]);
    }
    println!(
        "limit = {}  t* = {}  converged = {}  steps = {}",
        trace.limit(),
        trace.t_star,
        trace.converged,
        trace.iterations
    );
    println!("recurrence identity max deviation = {:.6e}", identity.max_deviation);
    if let Some(path) = &settings.csv {
        write_majorant_csv(path, &trace)?;
    }
    if let Some(path) = &settings.report {
        write_json(
            path,
            &MajorantReport {
                a: cfg.a(),
                h: cfg.h(),
                chi: cfg.chi(),
                problem: problem.as_deref(),
                trace: &trace,
                identity: &identity,
            },
        )?;
    }
    // A failed solvability condition surfaces as a Precondition error from
    // `run` (exit code 2) before we get here.
    Ok(if trace.converged { 0 } else { 4 })
}
