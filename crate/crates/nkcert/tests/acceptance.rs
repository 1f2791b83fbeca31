//! Acceptance suite: one test per advertised guarantee of the library, each
//! printing a single `ACCEPTANCE <id>: PASS`/`FAIL` line (visible with
//! `cargo test -- --nocapture`; the test verdicts themselves carry the same
//! information).

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use nkcert::audit::{
    check_derivative_norm_contraction, check_error_bounds_against_oracle,
    check_linearization_residual, check_regular_smoothness, oracle_solution, DEFAULT_SEED,
};
use nkcert::problems::{corpus_get, Overrides};
use nkcert::majorant::MajorantConfig;
use nkcert::moduli::{Modulus, PsiRate};
use nkcert::operator_model::{lu_solve, precondition};
use nkcert::solver::{inverse_bound, solve_certified, solve_picard};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn report(id: &str, outcome: Result<(), String>) {
    match outcome {
        Ok(()) => println!("ACCEPTANCE {id}: PASS"),
        Err(msg) => {
            println!("ACCEPTANCE {id}: FAIL — {msg}");
            panic!("acceptance check '{id}' failed: {msg}");
        }
    }
}

fn run_binary(args: &[&str]) -> (i32, String, String) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_nkcert"))
        .args(args)
        .output()
        .expect("solver binary is runnable");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// 1. With a Lipschitz modulus, no offset, and no nonsmooth part, the
/// majorant root reduces to the classical closed form
/// `t* = (1 − √(1 − 2Ka))/K`, and the majorant sequence converges to it.
/// Infeasible (K, a) pairs fail cleanly instead of producing a root.
#[test]
fn acceptance_1_classical_limit_reduction() {
    report("1 classical-limit reduction", (|| {
        let started = Instant::now();
        for &k in &[0.5_f64, 1.0, 2.0, 4.0] {
            for &a in &[0.05_f64, 0.1, 0.2, 0.4 / k * 0.999] {
                let cfg = MajorantConfig::new(
                    a,
                    0.0,
                    Modulus::lipschitz(k).map_err(|e| e.to_string())?,
                    PsiRate::zero(),
                )
                .map_err(|e| e.to_string())?;
                if 2.0 * k * a < 1.0 {
                    let closed_form = (1.0 - (1.0 - 2.0 * k * a).sqrt()) / k;
                    let t_star = cfg.find_t_star().map_err(|e| e.to_string())?;
                    ensure!(
                        (t_star - closed_form).abs() <= 1e-12 * closed_form,
                        "K={k}, a={a}: root {t_star} vs closed form {closed_form}"
                    );
                    let trace = cfg.run(1e-13, 2000).map_err(|e| e.to_string())?;
                    ensure!(trace.converged, "K={k}, a={a}: trace did not converge");
                    ensure!(
                        (trace.limit() - t_star).abs() <= 1e-10,
                        "K={k}, a={a}: trace limit {} vs root {t_star}",
                        trace.limit()
                    );
                } else {
                    ensure!(
                        cfg.find_t_star().is_err(),
                        "K={k}, a={a}: infeasible data must not produce a root"
                    );
                    let cert = cfg.certificate(1.0).map_err(|e| e.to_string())?;
                    ensure!(
                        !cert.certified(),
                        "K={k}, a={a}: infeasible data must not certify"
                    );
                }
            }
        }
        ensure!(
            started.elapsed().as_secs_f64() < 1.0,
            "grid took {:?}",
            started.elapsed()
        );
        Ok(())
    })());
}

/// 2. Across 24 majorant configurations (four modulus kinds × three offsets
/// × two nonsmooth rates, each satisfying the strict solvability condition),
/// the majorant sequence increases strictly, stays below its limit `t*`,
/// converges within 500 iterations at tolerance 1e−12, and satisfies the
/// per-step recurrence identity to 1e−10.
#[test]
fn acceptance_2_majorant_trace_suite() {
    report("2 majorant trace suite", (|| {
        let moduli = [
            Modulus::lipschitz(1.0).map_err(|e| e.to_string())?,
            Modulus::hoelder(1.0, 0.5).map_err(|e| e.to_string())?,
            Modulus::sum_of_hoelder(&[(0.6, 1.0), (0.4, 0.5)]).map_err(|e| e.to_string())?,
            Modulus::piecewise_linear_concave(&[
                (0.0, 0.0),
                (0.5, 1.0),
                (1.5, 2.0),
                (2.5, 2.8),
            ])
            .map_err(|e| e.to_string())?,
        ];
        let mut configs_checked = 0usize;
        for modulus in &moduli {
            for &h in &[0.0_f64, 0.1, 0.3] {
                for psi in [PsiRate::zero(), PsiRate::constant(0.05).map_err(|e| e.to_string())?]
                {
                    let probe = MajorantConfig::new(1.0, h, modulus.clone(), psi.clone())
                        .map_err(|e| e.to_string())?;
                    let rhs = probe.solvability_rhs().map_err(|e| e.to_string())?;
                    ensure!(rhs > 0.0, "admissible right-hand side must be positive");
                    let cfg = MajorantConfig::new(0.5 * rhs, h, modulus.clone(), psi)
                        .map_err(|e| e.to_string())?;
                    let label = format!("{} h={h}", cfg.modulus().describe());

                    let cert = cfg.certificate(cfg.chi()).map_err(|e| e.to_string())?;
                    ensure!(cert.certified(), "{label}: {:?}", cert.failure_reason());
                    let t_star = cert.t_star.expect("certified configurations carry a root");

                    let trace = cfg.run(1e-12, 500).map_err(|e| e.to_string())?;
                    ensure!(
                        trace.converged && trace.iterations <= 500,
                        "{label}: not converged in 500 iterations"
                    );
                    for w in trace.t.windows(2) {
                        ensure!(w[1] > w[0], "{label}: trace must increase strictly");
                    }
                    let slack = 1e-10 * t_star.max(1.0);
                    for &t in &trace.t {
                        ensure!(t <= t_star + slack, "{label}: t={t} above t*={t_star}");
                    }
                    let identity = cfg.identity_check(&trace).map_err(|e| e.to_string())?;
                    ensure!(
                        identity.max_deviation <= 1e-10,
                        "{label}: identity deviation {}",
                        identity.max_deviation
                    );
                    configs_checked += 1;
                }
            }
        }
        ensure!(configs_checked == 24, "expected 24 configurations, ran {configs_checked}");
        Ok(())
    })());
}

/// 3. On the scalar and two-dimensional kink problems, the certified solve
/// keeps every measured step within its majorant increment, keeps every
/// iterate within `t* − t_n` of the independent high-precision solution,
/// keeps measured Jacobian-inverse norms within the certified bound, and
/// reaches residual ≤ 1e−10 within 50 iterations in under a second each.
#[test]
fn acceptance_3_certified_bound_audit() {
    report("3 certified bound audit", (|| {
        for name in ["scalar_sqrt2_kink", "system_2d_kink"] {
            let entry = corpus_get(name, &Overrides::empty()).map_err(|e| e.to_string())?;
            let pp = precondition(&entry.problem).map_err(|e| e.to_string())?;
            let cfg = pp.majorant_config().map_err(|e| e.to_string())?;

            let started = Instant::now();
            let result = solve_certified(&pp, 1e-10, 50).map_err(|e| e.to_string())?;
            let elapsed = started.elapsed();
            ensure!(elapsed.as_secs_f64() < 1.0, "{name}: solve took {elapsed:?}");

            ensure!(
                result.converged() && result.residual_norm <= 1e-10,
                "{name}: {:?} residual {}",
                result.status,
                result.residual_norm
            );
            let t_star = result.t_star.expect("certified run carries t*");
            let slack = 1e-10 * t_star.max(1.0);
            for step in &result.steps {
                ensure!(
                    step.step_norm <= step.delta_t + slack,
                    "{name}: step {} norm {} above increment {}",
                    step.n,
                    step.step_norm,
                    step.delta_t
                );
                ensure!(step.bound_ok == Some(true), "{name}: step {} flagged", step.n);
            }

            let oracle = oracle_solution(&pp, 400).map_err(|e| e.to_string())?;
            let bounds = check_error_bounds_against_oracle(&pp, &result, &oracle)
                .map_err(|e| e.to_string())?;
            ensure!(
                bounds.clean(),
                "{name}: error-bound audit: {:?}",
                bounds.first_violation
            );

            // Explicit-inverse check of the certified Jacobian-inverse bound
            // at every iterate (x₀ pairs with t = 0, step n with t_n).
            let norm = entry.problem.norm();
            let mut iterates = vec![(entry.problem.x0().clone(), 0.0_f64)];
            for step in &result.steps {
                iterates.push((DVector::from_vec(step.x.clone()), step.t_after));
            }
            for (x, t) in &iterates {
                let jac = pp.jacobian_tilde(x).map_err(|e| e.to_string())?;
                let inv = jac
                    .try_inverse()
                    .ok_or_else(|| format!("{name}: Jacobian not invertible at t={t}"))?;
                let measured = norm.operator_norm(&inv);
                let certified = inverse_bound(&cfg, t.min(t_star)).map_err(|e| e.to_string())?;
                ensure!(
                    measured <= certified + slack,
                    "{name}: inverse norm {measured} above certified bound {certified} at t={t}"
                );
            }
        }
        Ok(())
    })());
}

/// 4. The derivative-free iteration respects its comparison sequence
/// (`‖u_{n+1} − u_n‖ ≤ ρ_{n+1} − ρ_n`), agrees with the Newton root within
/// twice the tolerance, and Newton started from 8 deterministic points on
/// the sphere of radius `t*` converges to the same root within 1e−8.
#[test]
fn acceptance_4_picard_agreement_and_uniqueness() {
    report("4 Picard agreement and uniqueness probe", (|| {
        let tol = 1e-10_f64;
        for name in ["scalar_sqrt2_kink", "system_2d_kink"] {
            let entry = corpus_get(name, &Overrides::empty()).map_err(|e| e.to_string())?;
            let problem = &entry.problem;
            let pp = precondition(problem).map_err(|e| e.to_string())?;

            let picard = solve_picard(&pp, tol, 400).map_err(|e| e.to_string())?;
            ensure!(
                picard.converged(),
                "{name}: derivative-free run: {:?} {:?}",
                picard.status,
                picard.diagnostic
            );
            for step in &picard.steps {
                ensure!(
                    step.bound_ok == Some(true),
                    "{name}: comparison-sequence bound failed at step {}",
                    step.n
                );
            }

            let newton = solve_certified(&pp, tol, 50).map_err(|e| e.to_string())?;
            ensure!(newton.converged(), "{name}: Newton run did not converge");
            let newton_x = DVector::from_vec(newton.x.clone());
            let picard_x = DVector::from_vec(picard.x.clone());
            let norm = problem.norm();
            let gap = norm.vector_norm(&(&newton_x - &picard_x));
            ensure!(
                gap <= 2.0 * tol,
                "{name}: Newton and derivative-free roots differ by {gap}"
            );

            // Uniqueness probe: Newton from 8 deterministic boundary points.
            let t_star = newton.t_star.expect("certified run carries t*");
            let dim = problem.dim();
            let mut roots: Vec<DVector<f64>> = Vec::new();
            for probe in 0..8usize {
                let mut direction = DVector::from_fn(dim, |j, _| {
                    (((probe + 1) * (j + 1)) as f64).cos()
                });
                direction /= norm.vector_norm(&direction);
                let mut x = problem.x0() + direction * t_star;
                let mut converged = false;
                for _ in 0..100 {
                    let residual = problem.f_eval(&x) + problem.g_eval(&x);
                    if pp.norm(&pp.residual(&x).map_err(|e| e.to_string())?) <= 1e-12 {
                        converged = true;
                        break;
                    }
                    let step = lu_solve(problem.jacobian_eval(&x), &residual)
                        .map_err(|e| e.to_string())?;
                    x -= step;
                }
                ensure!(converged, "{name}: probe {probe} did not converge");
                roots.push(x);
            }
            for root in &roots {
                let gap = norm.vector_norm(&(root - &newton_x));
                ensure!(
                    gap <= 1e-8,
                    "{name}: probe root differs from the certified root by {gap}"
                );
            }
        }
        Ok(())
    })());
}

/// 5. On every corpus problem whose certificate passes, the measured smooth
/// linearization residual of each step stays within its certified bound
/// (and the full residual within the majorant value) to slack 1e−10.
#[test]
fn acceptance_5_linearization_residual_bound() {
    report("5 linearization residual bound", (|| {
        let mut certified_runs = 0usize;
        let mut cases: Vec<(&str, Overrides)> = vec![
            ("scalar_sqrt2_smooth", Overrides::empty()),
            ("scalar_sqrt2_kink", Overrides::empty()),
            ("linear_nd", Overrides::empty()),
            ("hoelder_scalar", Overrides::empty()),
            ("system_2d_kink", Overrides::empty()),
        ];
        // The smooth benchmark's default start sits exactly on the
        // solvability boundary and fails closed; a shifted start certifies.
        let mut shifted = Overrides::empty();
        shifted.insert("x0", 1.2);
        cases.push(("scalar_sqrt2_smooth", shifted));

        for (name, ov) in &cases {
            let entry = corpus_get(name, ov).map_err(|e| e.to_string())?;
            let pp = precondition(&entry.problem).map_err(|e| e.to_string())?;
            let cert = pp
                .majorant_config()
                .and_then(|cfg| cfg.certificate(entry.problem.radius()))
                .map_err(|e| e.to_string())?;
            if !cert.certified() {
                continue;
            }
            let run = solve_certified(&pp, 1e-10, 100).map_err(|e| e.to_string())?;
            ensure!(run.converged(), "{name}: certified run: {:?}", run.status);
            let audit = check_linearization_residual(&pp, &run).map_err(|e| e.to_string())?;
            ensure!(audit.clean(), "{name}: {:?}", audit.first_violation);
            certified_runs += 1;
        }
        ensure!(
            certified_runs == 5,
            "expected 5 certified corpus runs, got {certified_runs}"
        );
        Ok(())
    })());
}

/// 6. Falsifiability through the command-line audit: halving a declared
/// constant is caught (exit 2, ≥ 1 violation over 10⁴ seeded samples) while
/// the honest declaration reports zero violations on the same seed.
#[test]
fn acceptance_6_falsifiability_by_audit() {
    report("6 falsifiability by audit", (|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let violations_of = |path: &std::path::Path| -> Result<u64, String> {
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| e.to_string())?;
            value["total_violations"]
                .as_u64()
                .ok_or_else(|| "report lacks total_violations".into())
        };

        // Halved Lipschitz constant on the smooth benchmark (true slope 1).
        let lying = dir.path().join("smooth_lying.json");
        let (code, _, _) = run_binary(&[
            "audit",
            "--problem",
            "scalar_sqrt2_smooth",
            "--set",
            "K=0.5",
            "--report",
            lying.to_str().unwrap(),
        ]);
        ensure!(code == 2, "halved K audit exited {code}, expected 2");
        ensure!(violations_of(&lying)? >= 1, "halved K audit reported no violations");

        // Halved nonsmooth rate on the kink benchmark.
        let lying_psi = dir.path().join("kink_lying.json");
        let (code, _, _) = run_binary(&[
            "audit",
            "--problem",
            "scalar_sqrt2_kink",
            "--set",
            "psi_c=0.01923076923076923",
            "--report",
            lying_psi.to_str().unwrap(),
        ]);
        ensure!(code == 2, "halved psi audit exited {code}, expected 2");
        ensure!(violations_of(&lying_psi)? >= 1, "halved psi audit reported no violations");

        // Honest declarations: zero violations on the same default seed.
        for name in ["scalar_sqrt2_smooth", "scalar_sqrt2_kink"] {
            let honest = dir.path().join(format!("{name}_honest.json"));
            let (code, _, _) = run_binary(&[
                "audit",
                "--problem",
                name,
                "--report",
                honest.to_str().unwrap(),
            ]);
            ensure!(code == 0, "honest audit of {name} exited {code}, expected 0");
            ensure!(
                violations_of(&honest)? == 0,
                "honest audit of {name} reported violations"
            );
        }
        Ok(())
    })());
}

/// 7. Hölder coverage: on the square-root-derivative benchmark no Lipschitz
/// declaration both certifies and survives a 10⁴-sample audit (the
/// derivative's slope is unbounded near zero), while the default
/// Hölder(1/2) declaration certifies and converges with its bounds intact.
#[test]
fn acceptance_7_hoelder_coverage_dichotomy() {
    report("7 Hölder coverage dichotomy", (|| {
        let mut certified_then_caught = 0usize;
        for &k in &[0.5_f64, 1.0, 2.0, 4.0, 8.0] {
            let mut ov = Overrides::empty();
            ov.insert("K", k);
            let entry = corpus_get("hoelder_scalar", &ov).map_err(|e| e.to_string())?;
            let pp = precondition(&entry.problem).map_err(|e| e.to_string())?;
            let certified = pp
                .majorant_config()
                .and_then(|cfg| cfg.certificate(entry.problem.radius()))
                .map(|cert| cert.certified())
                .unwrap_or(false);
            let smoothness =
                check_regular_smoothness(&pp, 10_000, DEFAULT_SEED).map_err(|e| e.to_string())?;
            let contraction = check_derivative_norm_contraction(&pp, 10_000, DEFAULT_SEED)
                .map_err(|e| e.to_string())?;
            let audit_clean = smoothness.clean() && contraction.clean();
            ensure!(
                !(certified && audit_clean),
                "Lipschitz K={k} both certified and passed the audit"
            );
            if certified && !audit_clean {
                certified_then_caught += 1;
            }
        }
        ensure!(
            certified_then_caught >= 1,
            "no Lipschitz declaration exercised the audit-catches-it leg"
        );

        // The Hölder(1/2) declaration certifies and keeps its bounds.
        let entry = corpus_get("hoelder_scalar", &Overrides::empty()).map_err(|e| e.to_string())?;
        let pp = precondition(&entry.problem).map_err(|e| e.to_string())?;
        let cert = pp
            .majorant_config()
            .and_then(|cfg| cfg.certificate(entry.problem.radius()))
            .map_err(|e| e.to_string())?;
        ensure!(cert.certified(), "Hölder declaration failed: {:?}", cert.failure_reason());
        let run = solve_certified(&pp, 1e-10, 50).map_err(|e| e.to_string())?;
        ensure!(run.converged(), "Hölder-certified run: {:?}", run.status);
        ensure!(
            run.steps.iter().all(|s| s.bound_ok == Some(true)),
            "a Hölder-certified step exceeded its increment"
        );
        let oracle = oracle_solution(&pp, 400).map_err(|e| e.to_string())?;
        let bounds =
            check_error_bounds_against_oracle(&pp, &run, &oracle).map_err(|e| e.to_string())?;
        ensure!(bounds.clean(), "error bounds: {:?}", bounds.first_violation);
        let smoothness =
            check_regular_smoothness(&pp, 10_000, DEFAULT_SEED).map_err(|e| e.to_string())?;
        ensure!(smoothness.clean(), "Hölder declaration flagged: {:?}", smoothness.first_violation);
        Ok(())
    })());
}

/// 8. Repeated runs with identical configuration and seed produce
/// byte-identical CSV and JSON outputs.
#[test]
fn acceptance_8_byte_identical_reruns() {
    report("8 byte-identical reruns", (|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut outputs: BTreeMap<&str, Vec<Vec<u8>>> = BTreeMap::new();

        for round in 0..2 {
            let csv = dir.path().join(format!("solve_{round}.csv"));
            let json = dir.path().join(format!("solve_{round}.json"));
            let (code, _, _) = run_binary(&[
                "solve",
                "--problem",
                "scalar_sqrt2_kink",
                "--csv",
                csv.to_str().unwrap(),
                "--report",
                json.to_str().unwrap(),
            ]);
            ensure!(code == 0, "solve exited {code}");
            outputs
                .entry("solve_csv")
                .or_default()
                .push(std::fs::read(&csv).map_err(|e| e.to_string())?);
            outputs
                .entry("solve_json")
                .or_default()
                .push(std::fs::read(&json).map_err(|e| e.to_string())?);

            let audit = dir.path().join(format!("audit_{round}.json"));
            let (code, _, _) = run_binary(&[
                "audit",
                "--problem",
                "scalar_sqrt2_kink",
                "--report",
                audit.to_str().unwrap(),
            ]);
            ensure!(code == 0, "audit exited {code}");
            outputs
                .entry("audit_json")
                .or_default()
                .push(std::fs::read(&audit).map_err(|e| e.to_string())?);
        }

        for (label, rounds) in &outputs {
            ensure!(
                rounds[0] == rounds[1],
                "{label} differs between identical runs"
            );
        }
        Ok(())
    })());
}
