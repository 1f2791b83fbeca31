//! Empirical audits of declared regularity data and of certified runs.
//!
//! A declaration (`ω`, `h`, `ψ`) is a *claim* about the operator. The
//! majorant engine trusts it; this module attacks it. Seeded sampling draws
//! point pairs from the problem ball — alternating unconstrained pairs with
//! pairs at logarithmically spaced distances down to `2R·10⁻¹²`, so both
//! global and local behavior are probed — and checks each consequence of
//! the declaration that is observable with finitely many evaluations:
//!
//! * **regular smoothness**: `‖F'(x″) − F'(x′)‖ ≤ ω(ξ + ‖x″−x′‖) − ω(ξ)`
//!   with `ξ = ω⁻¹(min(‖F'(x′)‖, ‖F'(x″)‖) − h)`;
//! * **derivative-norm contraction**: the map
//!   `x ↦ ω⁻¹(‖F'(x)‖ − h)` must be nonexpansive;
//! * **nonsmooth rate**: `‖G(x″) − G(x′)‖ ≤ ψ(t)·‖x″−x′‖` for the smallest
//!   ball `B(x₀, t)` containing both points;
//! * **integral rate**: `‖G(x″) − G(x′)‖ ≤ Ψ(t + ‖x″−x′‖) − Ψ(t)` anchored
//!   at the point closer to `x₀`;
//! * **linearization residual** (along a certified Newton run): after each
//!   step the smooth linearization residual must stay below
//!   `Φ(t_{n+1}) + Ψ(t_n)` and the full residual below `W(t_{n+1})`.
//!
//! Sampling can only falsify a declaration, never verify it; every report
//! says so. A clean report raises confidence, a single violation is proof
//! of an unsound declaration (up to the stated tolerance).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::operator_model::{precondition, Preconditioned, Problem};
use crate::solver::{solve_uncertified, Method, SolveResult};
use crate::{Error, Result};

/// Default sampling seed (spelled `0xC0FFEE`).
pub const DEFAULT_SEED: u64 = 0xC0_FF_EE;

/// Absolute tolerance on deficits: a condition counts as violated only when
/// the measured left side exceeds the allowed right side by more than this.
pub const DEFICIT_TOL: f64 = 1e-10;

const DISCLAIMER: &str =
    "sampling can only falsify a declaration, never verify it; a clean report is \
     evidence, not proof";

/// Outcome of one sampling check.
#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub check: &'static str,
    pub samples_requested: usize,
    pub pairs_evaluated: usize,
    pub violations: usize,
    /// Pairs where the declared offset `h` exceeded a measured derivative
    /// norm (the declaration is unsound before any smoothness question).
    pub h_invalid: usize,
    /// Largest signed deficit (left side minus allowed right side) seen;
    /// at most the tolerance on a clean report.
    pub max_deficit: f64,
    pub tolerance: f64,
    pub first_violation: Option<String>,
    pub disclaimer: &'static str,
}

impl SampleReport {
    pub fn clean(&self) -> bool {
        self.violations == 0
    }
}

fn fmt_point(x: &DVector<f64>) -> String {
    let coords: Vec<String> = x.iter().map(|v| format!("{v:.17e}")).collect();
    format!("[{}]", coords.join(", "))
}

/// Seeded sampler for point pairs in the problem ball.
struct BallSampler<'p> {
    problem: &'p Problem,
    rng: ChaCha8Rng,
}

impl<'p> BallSampler<'p> {
    fn new(problem: &'p Problem, seed: u64) -> Self {
        Self { problem, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform point in the ball by rejection from the bounding cube.
    fn point(&mut self) -> DVector<f64> {
        let x0 = self.problem.x0();
        let r = self.problem.radius();
        loop {
            let candidate =
                DVector::from_fn(x0.len(), |i, _| x0[i] + self.rng.gen_range(-r..=r));
            if self.problem.in_domain(&candidate) {
                return candidate;
            }
        }
    }

    /// Direction of unit problem-norm, by rejection and normalization.
    fn direction(&mut self) -> DVector<f64> {
        loop {
            let v = DVector::from_fn(self.problem.dim(), |_, _| self.rng.gen_range(-1.0..=1.0));
            let n = self.problem.norm().vector_norm(&v);
            if n > 1e-3 && n <= 1.0 {
                return v / n;
            }
        }
    }

    /// Alternates two pair styles: even draws take both points uniformly;
    /// odd draws displace a uniform base point by a distance drawn
    /// log-uniformly across twelve decades, `2R·10^{-12u}`, so conditions
    /// are probed at every scale down to the rounding floor.
    fn pair(&mut self, index: usize) -> (DVector<f64>, DVector<f64>) {
        if index % 2 == 0 {
            return (self.point(), self.point());
        }
        for _ in 0..1000 {
            let base = self.point();
            let direction = self.direction();
            let u: f64 = self.rng.gen();
            let delta = 2.0 * self.problem.radius() * 10f64.powf(-12.0 * u);
            let second = &base + direction * delta;
            if self.problem.in_domain(&second) {
                return (base, second);
            }
        }
        (self.point(), self.point())
    }
}

enum PairOutcome {
    /// Signed deficit: positive beyond tolerance means violated.
    Deficit(f64),
    /// The declared `h` exceeds a measured derivative norm.
    HInvalid(String),
}

fn run_pair_check(
    pp: &Preconditioned<'_>,
    check: &'static str,
    samples: usize,
    seed: u64,
    mut eval: impl FnMut(&DVector<f64>, &DVector<f64>, f64) -> Result<PairOutcome>,
) -> Result<SampleReport> {
    let mut sampler = BallSampler::new(pp.problem(), seed);
    let mut report = SampleReport {
        check,
        samples_requested: samples,
        pairs_evaluated: 0,
        violations: 0,
        h_invalid: 0,
        max_deficit: f64::NEG_INFINITY,
        tolerance: DEFICIT_TOL,
        first_violation: None,
        disclaimer: DISCLAIMER,
    };
    for index in 0..samples {
        let (xp, xq) = sampler.pair(index);
        let distance = pp.problem().norm().vector_norm(&(&xq - &xp));
        if distance == 0.0 {
            continue;
        }
        match eval(&xp, &xq, distance)? {
            PairOutcome::HInvalid(description) => {
                report.pairs_evaluated += 1;
                report.h_invalid += 1;
                report.violations += 1;
                report.first_violation.get_or_insert(description);
            }
            PairOutcome::Deficit(deficit) => {
                report.pairs_evaluated += 1;
                if !deficit.is_finite() || deficit > DEFICIT_TOL {
                    report.violations += 1;
                    report.first_violation.get_or_insert_with(|| {
                        format!(
                            "{check}: deficit {deficit:.6e} at x' = {}, x'' = {} \
                             (distance {distance:.6e})",
                            fmt_point(&xp),
                            fmt_point(&xq)
                        )
                    });
                }
                if deficit > report.max_deficit {
                    report.max_deficit = deficit;
                }
            }
        }
    }
    if report.max_deficit == f64::NEG_INFINITY {
        report.max_deficit = 0.0;
    }
    Ok(report)
}

/// Check the regular-smoothness inequality for the declared `(ω, h)` on
/// sampled pairs.
pub fn check_regular_smoothness(
    pp: &Preconditioned<'_>,
    samples: usize,
    seed: u64,
) -> Result<SampleReport> {
    let declared = pp.problem().declared().clone();
    let norm = pp.problem().norm();
    run_pair_check(pp, "regular_smoothness", samples, seed, |xp, xq, d| {
        let jp = pp.jacobian_tilde(xp)?;
        let jq = pp.jacobian_tilde(xq)?;
        let jump = norm.operator_norm(&(&jq - &jp));
        let h_f = norm.operator_norm(&jp).min(norm.operator_norm(&jq)) - declared.h;
        if h_f < -DEFICIT_TOL {
            return Ok(PairOutcome::HInvalid(format!(
                "declared offset h = {} exceeds the derivative norm near x' = {} \
                 (min norm − h = {h_f:.6e})",
                declared.h,
                fmt_point(xp)
            )));
        }
        let xi = declared.modulus.inverse(h_f.max(0.0))?;
        let allowed = declared.modulus.eval(xi + d)? - declared.modulus.eval(xi)?;
        Ok(PairOutcome::Deficit(jump - allowed))
    })
}

/// Check that `x ↦ ω⁻¹(‖F'(x)‖ − h)` is nonexpansive on sampled pairs — an
/// equivalent, inverse-side consequence of the same declaration.
pub fn check_derivative_norm_contraction(
    pp: &Preconditioned<'_>,
    samples: usize,
    seed: u64,
) -> Result<SampleReport> {
    let declared = pp.problem().declared().clone();
    let norm = pp.problem().norm();
    run_pair_check(pp, "derivative_norm_contraction", samples, seed, |xp, xq, d| {
        let np = norm.operator_norm(&pp.jacobian_tilde(xp)?) - declared.h;
        let nq = norm.operator_norm(&pp.jacobian_tilde(xq)?) - declared.h;
        if np < -DEFICIT_TOL || nq < -DEFICIT_TOL {
            return Ok(PairOutcome::HInvalid(format!(
                "declared offset h = {} exceeds a derivative norm near x' = {}",
                declared.h,
                fmt_point(xp)
            )));
        }
        let ip = declared.modulus.inverse(np.max(0.0))?;
        let iq = declared.modulus.inverse(nq.max(0.0))?;
        Ok(PairOutcome::Deficit((iq - ip).abs() - d))
    })
}

/// Check the nonsmooth rate `‖G(x″) − G(x′)‖ ≤ ψ(t)·‖x″−x′‖`, with `t` the
/// radius of the smallest ball around the start point containing the pair.
pub fn check_lipschitz_rate(
    pp: &Preconditioned<'_>,
    samples: usize,
    seed: u64,
) -> Result<SampleReport> {
    let declared = pp.problem().declared().clone();
    let problem = pp.problem();
    run_pair_check(pp, "lipschitz_rate", samples, seed, |xp, xq, d| {
        let jump = pp.norm(&(pp.g_tilde(xq)? - pp.g_tilde(xp)?));
        let t = problem.distance_from_start(xp).max(problem.distance_from_start(xq));
        let allowed = declared.psi.eval(t)? * d;
        Ok(PairOutcome::Deficit(jump - allowed))
    })
}

/// Check the integral form of the nonsmooth rate,
/// `‖G(x″) − G(x′)‖ ≤ Ψ(t + ‖x″−x′‖) − Ψ(t)`, anchored at the pair's point
/// closer to the start (the tightest admissible anchor).
pub fn check_integral_rate(
    pp: &Preconditioned<'_>,
    samples: usize,
    seed: u64,
) -> Result<SampleReport> {
    let declared = pp.problem().declared().clone();
    let problem = pp.problem();
    run_pair_check(pp, "integral_rate", samples, seed, |xp, xq, d| {
        let jump = pp.norm(&(pp.g_tilde(xq)? - pp.g_tilde(xp)?));
        let t = problem.distance_from_start(xp).min(problem.distance_from_start(xq));
        let allowed = declared.psi.integral(t + d)? - declared.psi.integral(t)?;
        Ok(PairOutcome::Deficit(jump - allowed))
    })
}

/// Along a certified Newton run, check the two certified residual bounds
/// for every step `x_n → x_{n+1}`:
///
/// * the smooth linearization residual
///   `‖F(x_{n+1}) − F(x_n) − F'(x_n)(x_{n+1}−x_n)‖ ≤ Φ(t_{n+1}) + Ψ(t_n)`,
/// * the full residual `‖F(x_{n+1}) + G(x_{n+1})‖ ≤ W(t_{n+1})`.
pub fn check_linearization_residual(
    pp: &Preconditioned<'_>,
    result: &SolveResult,
) -> Result<SampleReport> {
    if !result.certified {
        return Err(Error::Precondition(
            "linearization residual audit needs a certified run".into(),
        ));
    }
    if result.method != Method::Newton {
        return Err(Error::Precondition(
            "the linearization residual bound is specific to Newton steps".into(),
        ));
    }
    let cfg = pp.majorant_config()?;
    let mut report = SampleReport {
        check: "linearization_residual",
        samples_requested: 2 * result.steps.len(),
        pairs_evaluated: 0,
        violations: 0,
        h_invalid: 0,
        max_deficit: f64::NEG_INFINITY,
        tolerance: DEFICIT_TOL,
        first_violation: None,
        disclaimer: DISCLAIMER,
    };
    let record = |label: String, measured: f64, allowed: f64, report: &mut SampleReport| {
        let deficit = measured - allowed;
        report.pairs_evaluated += 1;
        if !deficit.is_finite() || deficit > DEFICIT_TOL {
            report.violations += 1;
            report.first_violation.get_or_insert_with(|| {
                format!(
                    "linearization_residual: {label}: measured {measured:.6e} exceeds the \
                     certified bound {allowed:.6e}"
                )
            });
        }
        if deficit > report.max_deficit {
            report.max_deficit = deficit;
        }
    };
    let mut x_prev = pp.problem().x0().clone();
    for (i, step) in result.steps.iter().enumerate() {
        let x_next = DVector::from_vec(step.x.clone());
        let delta = &x_next - &x_prev;
        let lin_res = pp.norm(
            &(pp.f_tilde(&x_next)? - pp.f_tilde(&x_prev)? - pp.jacobian_tilde(&x_prev)? * &delta),
        );
        let t_next = step.t_after.min(cfg.chi());
        let allowed_lin = cfg.phi(t_next)? + cfg.psi().integral(step.t_before)?;
        record(
            format!("smooth linearization residual after step {}", step.n),
            lin_res,
            allowed_lin,
            &mut report,
        );
        let full_res = if i + 1 < result.steps.len() {
            result.steps[i + 1].residual_norm
        } else {
            result.residual_norm
        };
        record(
            format!("full residual after step {}", step.n),
            full_res,
            cfg.w(t_next)?,
            &mut report,
        );
        x_prev = x_next;
    }
    if report.max_deficit == f64::NEG_INFINITY {
        report.max_deficit = 0.0;
    }
    Ok(report)
}

/// Summarize the in-run step-bound audit of a certified run as a report:
/// each step's measured norm against its certified majorant increment.
/// A violation here is the strongest falsification the toolkit can produce
/// — the declaration failed on the iterates themselves.
pub fn step_bound_report(result: &SolveResult) -> Result<SampleReport> {
    if !result.certified {
        return Err(Error::Precondition("step-bound audit needs a certified run".into()));
    }
    let mut report = SampleReport {
        check: "step_bounds",
        samples_requested: result.steps.len(),
        pairs_evaluated: result.steps.len(),
        violations: 0,
        h_invalid: 0,
        max_deficit: f64::NEG_INFINITY,
        tolerance: DEFICIT_TOL,
        first_violation: None,
        disclaimer: DISCLAIMER,
    };
    for step in &result.steps {
        let deficit = step.step_norm - step.delta_t;
        if step.bound_ok == Some(false) {
            report.violations += 1;
            report.first_violation.get_or_insert_with(|| {
                format!(
                    "step_bounds: step {} norm {:.6e} exceeds the certified increment {:.6e}",
                    step.n, step.step_norm, step.delta_t
                )
            });
        }
        if deficit > report.max_deficit {
            report.max_deficit = deficit;
        }
    }
    if report.max_deficit == f64::NEG_INFINITY {
        report.max_deficit = 0.0;
    }
    Ok(report)
}

/// Compute a reference solution independently of any certificate.
///
/// Dimension 1: bracketing bisection on the residual over the problem ball
/// (a 256-interval scan locates the sign change), cross-checked against an
/// uncertified Newton run — the two must agree to `1e-12`.
/// Higher dimensions: uncertified Newton driven to residual `1e-13` with a
/// quadrupled iteration budget.
pub fn oracle_solution(pp: &Preconditioned<'_>, max_iter: usize) -> Result<DVector<f64>> {
    let problem = pp.problem();
    if problem.dim() == 1 {
        let x0 = problem.x0()[0];
        let r = problem.radius();
        let value = |x: f64| -> Result<f64> {
            Ok(pp.residual(&DVector::from_vec(vec![x]))?[0])
        };
        let cells = 256;
        let mut bracket = None;
        let mut left = x0 - r;
        let mut f_left = value(left)?;
        for i in 1..=cells {
            let right = x0 - r + 2.0 * r * (i as f64) / (cells as f64);
            let f_right = value(right)?;
            if f_left == 0.0 {
                bracket = Some((left, left));
                break;
            }
            if f_left * f_right <= 0.0 {
                bracket = Some((left, right));
                break;
            }
            left = right;
            f_left = f_right;
        }
        let (mut lo, mut hi) =
            bracket.ok_or_else(|| Error::Oracle("no sign change in the problem ball".into()))?;
        let mut f_lo = value(lo)?;
        for _ in 0..200 {
            if hi - lo <= 1e-15 * lo.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let f_mid = value(mid)?;
            if f_lo * f_mid > 0.0 {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);

        let newton = solve_uncertified(pp, 1e-14, 4 * max_iter.max(25))?;
        if !newton.converged() {
            return Err(Error::Oracle(
                "cross-check Newton run did not converge to oracle precision".into(),
            ));
        }
        if (newton.x[0] - root).abs() > 1e-12 * root.abs().max(1.0) {
            return Err(Error::Oracle(format!(
                "oracle cross-check failed: bisection {root:.17e} vs Newton {:.17e}",
                newton.x[0]
            )));
        }
        Ok(DVector::from_vec(vec![root]))
    } else {
        let newton = solve_uncertified(pp, 1e-14, 4 * max_iter.max(25))?;
        if !newton.converged() {
            return Err(Error::Oracle(
                "oracle Newton run did not converge to the requested precision".into(),
            ));
        }
        let x = DVector::from_vec(newton.x.clone());
        let residual = pp.norm(&pp.residual(&x)?);
        if residual > 1e-13 {
            return Err(Error::Oracle(format!(
                "oracle residual {residual:.3e} above verification threshold"
            )));
        }
        Ok(x)
    }
}

/// Check every certified error bound of a run against an independently
/// computed solution: `‖x* − x_n‖ ≤ t* − t_n` for each iterate, including
/// the final one.
pub fn check_error_bounds_against_oracle(
    pp: &Preconditioned<'_>,
    result: &SolveResult,
    oracle: &DVector<f64>,
) -> Result<SampleReport> {
    if !result.certified {
        return Err(Error::Precondition("error-bound audit needs a certified run".into()));
    }
    let mut report = SampleReport {
        check: "error_bounds_vs_oracle",
        samples_requested: result.steps.len() + 1,
        pairs_evaluated: 0,
        violations: 0,
        h_invalid: 0,
        max_deficit: f64::NEG_INFINITY,
        tolerance: DEFICIT_TOL,
        first_violation: None,
        disclaimer: DISCLAIMER,
    };
    let t_star = result
        .t_star
        .ok_or_else(|| Error::Precondition("certified run carries no t*".into()))?;
    let mut check_one = |label: String, x: DVector<f64>, bound: f64| {
        let err = pp.norm(&(oracle - &x));
        let deficit = err - bound;
        report.pairs_evaluated += 1;
        if !deficit.is_finite() || deficit > DEFICIT_TOL {
            report.violations += 1;
            report.first_violation.get_or_insert_with(|| {
                format!(
                    "error_bounds_vs_oracle: {label}: distance {err:.6e} exceeds the \
                     certified bound {bound:.6e}"
                )
            });
        }
        if deficit > report.max_deficit {
            report.max_deficit = deficit;
        }
    };
    check_one("iterate 0".into(), pp.problem().x0().clone(), t_star);
    for step in &result.steps {
        check_one(
            format!("iterate {}", step.n + 1),
            DVector::from_vec(step.x.clone()),
            t_star - step.t_after,
        );
    }
    if report.max_deficit == f64::NEG_INFINITY {
        report.max_deficit = 0.0;
    }
    Ok(report)
}

/// Convenience: run all sampling checks plus (when a certified run is
/// possible) the linearization-residual audit with one call.
pub fn audit_problem(
    problem: &Problem,
    samples: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<SampleReport>> {
    let pp = precondition(problem)?;
    let mut reports = Vec::new();
    if samples > 0 {
        reports.push(check_regular_smoothness(&pp, samples, seed)?);
        reports.push(check_derivative_norm_contraction(&pp, samples, seed)?);
        reports.push(check_lipschitz_rate(&pp, samples, seed)?);
        reports.push(check_integral_rate(&pp, samples, seed)?);
    }
    let cert = pp.majorant_config()?.certificate(problem.radius())?;
    if cert.certified() {
        let run = crate::solver::solve_certified(&pp, tol, max_iter)?;
        if run.certified && run.status != crate::solver::SolveStatus::BoundViolation {
            reports.push(check_linearization_residual(&pp, &run)?);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{corpus_get, Overrides};
    use crate::solver::solve_certified;

    fn overrides(pairs: &[&str]) -> Overrides {
        Overrides::parse(&pairs.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    const N: usize = 2000;

    #[test]
    fn honest_declarations_pass_all_sampling_checks() {
        for name in ["scalar_sqrt2_kink", "hoelder_scalar", "linear_nd", "system_2d_kink"] {
            let entry = corpus_get(name, &Overrides::empty()).unwrap();
            let pp = precondition(&entry.problem).unwrap();
            for (label, report) in [
                ("rs", check_regular_smoothness(&pp, N, DEFAULT_SEED).unwrap()),
                ("dc", check_derivative_norm_contraction(&pp, N, DEFAULT_SEED).unwrap()),
                ("lr", check_lipschitz_rate(&pp, N, DEFAULT_SEED).unwrap()),
                ("ir", check_integral_rate(&pp, N, DEFAULT_SEED).unwrap()),
            ] {
                assert!(
                    report.clean(),
                    "{name}/{label}: {} violations, first: {:?}",
                    report.violations,
                    report.first_violation
                );
                assert!(report.max_deficit <= DEFICIT_TOL);
                assert_eq!(report.h_invalid, 0);
            }
        }
    }

    #[test]
    fn understated_lipschitz_constant_is_falsified() {
        let entry = corpus_get("scalar_sqrt2_smooth", &overrides(&["K=0.5"])).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let report = check_regular_smoothness(&pp, N, DEFAULT_SEED).unwrap();
        // True constant is 1; every sampled pair shows the gap.
        assert!(report.violations > N / 2, "violations: {}", report.violations);
        assert!(report.max_deficit > 0.0);
        assert!(report.first_violation.unwrap().contains("deficit"));

        let report = check_derivative_norm_contraction(&pp, N, DEFAULT_SEED).unwrap();
        assert!(report.violations > 0, "inverse-side check must also fire");
    }

    #[test]
    fn understated_kink_rate_is_falsified() {
        let entry = corpus_get("scalar_sqrt2_kink", &overrides(&["psi_c=0.019"])).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let report = check_lipschitz_rate(&pp, N, DEFAULT_SEED).unwrap();
        assert!(report.violations > 0, "rate check must fire on pairs straddling the kink");
        let report = check_integral_rate(&pp, N, DEFAULT_SEED).unwrap();
        assert!(report.violations > 0, "integral check must fire as well");
    }

    #[test]
    fn overstated_offset_is_reported_as_h_invalid() {
        let entry = corpus_get("hoelder_scalar", &overrides(&["h=0.95"])).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let report = check_regular_smoothness(&pp, N, DEFAULT_SEED).unwrap();
        assert!(report.h_invalid > 0);
        assert!(report.violations >= report.h_invalid);
        assert!(report.first_violation.unwrap().contains("offset"));
    }

    #[test]
    fn sampling_is_deterministic_for_a_fixed_seed() {
        let entry = corpus_get("system_2d_kink", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let r1 = check_regular_smoothness(&pp, 500, 42).unwrap();
        let r2 = check_regular_smoothness(&pp, 500, 42).unwrap();
        assert_eq!(r1.violations, r2.violations);
        assert_eq!(r1.max_deficit.to_bits(), r2.max_deficit.to_bits());
        let r3 = check_regular_smoothness(&pp, 500, 43).unwrap();
        assert_ne!(r1.max_deficit.to_bits(), r3.max_deficit.to_bits());
    }

    #[test]
    fn linearization_residual_holds_along_certified_runs() {
        for name in ["scalar_sqrt2_kink", "hoelder_scalar", "system_2d_kink"] {
            let entry = corpus_get(name, &Overrides::empty()).unwrap();
            let pp = precondition(&entry.problem).unwrap();
            let run = solve_certified(&pp, 1e-12, 100).unwrap();
            assert!(run.converged());
            let report = check_linearization_residual(&pp, &run).unwrap();
            assert!(
                report.clean(),
                "{name}: {:?}",
                report.first_violation
            );
        }
    }

    #[test]
    fn linearization_residual_requires_certification() {
        let entry = corpus_get("scalar_sqrt2_smooth", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let run = solve_uncertified(&pp, 1e-12, 50).unwrap();
        assert!(matches!(
            check_linearization_residual(&pp, &run),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let entry = corpus_get("scalar_sqrt2_smooth", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let root = oracle_solution(&pp, 100).unwrap();
        assert!((root[0] - 2.0_f64.sqrt()).abs() < 1e-13);

        let entry = corpus_get("scalar_sqrt2_kink", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let root = oracle_solution(&pp, 100).unwrap();
        assert!((root[0] - (0.1 + 7.41_f64.sqrt()) / 2.0).abs() < 1e-13);

        let entry = corpus_get("system_2d_kink", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let root = oracle_solution(&pp, 100).unwrap();
        assert!(pp.norm(&pp.residual(&root).unwrap()) <= 1e-13);
    }

    #[test]
    fn error_bounds_hold_against_the_oracle() {
        for name in ["scalar_sqrt2_kink", "hoelder_scalar", "linear_nd", "system_2d_kink"] {
            let entry = corpus_get(name, &Overrides::empty()).unwrap();
            let pp = precondition(&entry.problem).unwrap();
            let run = solve_certified(&pp, 1e-12, 100).unwrap();
            assert!(run.converged(), "{name}");
            let oracle = oracle_solution(&pp, 100).unwrap();
            let report = check_error_bounds_against_oracle(&pp, &run, &oracle).unwrap();
            assert!(report.clean(), "{name}: {:?}", report.first_violation);
        }
    }

    #[test]
    fn audit_problem_bundles_the_checks() {
        let entry = corpus_get("scalar_sqrt2_kink", &Overrides::empty()).unwrap();
        let reports = audit_problem(&entry.problem, 200, DEFAULT_SEED, 1e-10, 100).unwrap();
        let names: Vec<&str> = reports.iter().map(|r| r.check).collect();
        assert_eq!(
            names,
            vec![
                "regular_smoothness",
                "derivative_norm_contraction",
                "lipschitz_rate",
                "integral_rate",
                "linearization_residual"
            ]
        );
        assert!(reports.iter().all(|r| r.clean()));

        // samples = 0 skips the sampling checks but keeps the run audit.
        let reports = audit_problem(&entry.problem, 0, DEFAULT_SEED, 1e-10, 100).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].check, "linearization_residual");
    }
}
