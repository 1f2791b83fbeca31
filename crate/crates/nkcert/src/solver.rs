//! Certified iteration drivers.
//!
//! [`solve_certified`] runs the generalized Newton iteration
//! `x_{n+1} = x_n − [f'(x_n)]⁻¹ (f(x_n) + g(x_n))` — only the smooth part is
//! linearized — after checking the majorant certificate. Every step is
//! audited against the certificate while it runs: the step norm must stay
//! within the majorant increment `t_{n+1} − t_n` and the iterate must stay
//! within `t*` of the start point. A violated bound aborts the run with a
//! diagnostic: it means the declared regularity data were wrong, and
//! continuing would produce numbers whose claimed guarantees are false.
//!
//! [`solve_picard`] runs the derivative-free variant
//! `x_{n+1} = x_n − (F(x_n) + G(x_n))` under the same certificate, audited
//! against the comparison sequence `ρ_{n+1} = ρ_n + W(ρ_n)`.
//!
//! [`solve_uncertified`] runs plain Newton with no certificate and no
//! bounds, for exploration only; its records carry `bound_ok = None` and
//! NaN majorant columns so downstream formatting cannot confuse it with a
//! certified run.

use nalgebra::DVector;
use serde::Serialize;

use crate::majorant::{Certificate, MajorantConfig};
use crate::operator_model::{lu_solve, Preconditioned};
use crate::{Error, Result};

/// Relative slack applied when comparing measured step norms against
/// majorant increments: rounding in the linear solve must not produce
/// spurious violations when a bound is attained with equality.
const BOUND_SLACK_REL: f64 = 1e-10;

/// Slack for the accumulated distance-from-start check (bounded by `t*`).
const DOMAIN_SLACK_REL: f64 = 1e-9;

/// Which iteration a result came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    Picard,
}

/// Terminal state of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Residual norm fell below the tolerance.
    Converged,
    /// Iteration budget exhausted before convergence.
    MaxIter,
    /// The certificate did not hold; no iteration was attempted.
    CertificateFailed,
    /// An iterate left the certified region around the start point.
    DomainExit,
    /// A Jacobian could not be factored reliably.
    SingularJacobian,
    /// A measured step exceeded its certified majorant increment — the
    /// declared regularity data are inconsistent with the observed operator.
    BoundViolation,
}

/// One audited iteration step `x_n → x_{n+1}`.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    /// Step index, 0-based.
    pub n: usize,
    /// The new iterate `x_{n+1}`.
    pub x: Vec<f64>,
    /// `‖x_{n+1} − x_n‖` in the problem norm.
    pub step_norm: f64,
    /// `‖F(x_n) + G(x_n)‖` — the preconditioned residual before the step.
    pub residual_norm: f64,
    /// Majorant value `t_n` before the step (NaN when uncertified).
    pub t_before: f64,
    /// Majorant value `t_{n+1}` after the step (NaN when uncertified).
    pub t_after: f64,
    /// Certified increment `t_{n+1} − t_n` (NaN when uncertified).
    pub delta_t: f64,
    /// Certified remaining-error bound `t* − t_n` (NaN when uncertified).
    pub error_bound: f64,
    /// Bound on `‖[F'(x_n)]⁻¹‖` (1.0 for Picard, NaN when uncertified).
    pub jacobian_inverse_bound: f64,
    /// Whether the step stayed within its certified increment; `None` for
    /// uncertified runs.
    pub bound_ok: Option<bool>,
}

/// Complete outcome of a run.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub method: Method,
    pub status: SolveStatus,
    /// Final iterate.
    pub x: Vec<f64>,
    /// Steps actually taken.
    pub iterations: usize,
    /// Preconditioned residual norm at the final iterate.
    pub residual_norm: f64,
    /// Certified radius `t*`, when a certificate was evaluated and held.
    pub t_star: Option<f64>,
    pub certificate: Option<Certificate>,
    /// True when every reported bound is backed by the certificate.
    pub certified: bool,
    /// Human-readable explanation for non-converged terminal states.
    pub diagnostic: Option<String>,
    pub steps: Vec<StepRecord>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Bound on `‖[F'(x)]⁻¹‖` at majorant position `t`:
/// `1 / (1 − [ω(χ) − ω(χ − t)])`.
pub fn inverse_bound(cfg: &MajorantConfig, t: f64) -> Result<f64> {
    let chi = cfg.chi();
    if t.is_nan() || t < 0.0 || t > chi {
        return Err(Error::Domain(format!(
            "inverse bound argument must lie in [0, {chi}], got {t}"
        )));
    }
    let denominator = 1.0 - (cfg.modulus().eval(chi)? - cfg.modulus().eval(chi - t)?);
    if denominator <= 0.0 {
        return Err(Error::Range(format!(
            "inverse bound degenerates at t = {t}: denominator {denominator}"
        )));
    }
    Ok(1.0 / denominator)
}

/// One generalized Newton step from `x`: returns
/// `x − [f'(x)]⁻¹ (f(x) + g(x))`.
///
/// The linear system is solved against the raw Jacobian and raw residual;
/// this equals the step of the preconditioned problem because the start
/// factorization cancels. Errors with [`Error::Domain`] when `x` lies
/// outside the problem ball and [`Error::Singular`] when the Jacobian
/// cannot be factored.
pub fn newton_step(pp: &Preconditioned<'_>, x: &DVector<f64>) -> Result<DVector<f64>> {
    let problem = pp.problem();
    if !problem.in_domain(x) {
        return Err(Error::Domain(format!(
            "iterate lies outside the problem ball of radius {}",
            problem.radius()
        )));
    }
    let raw_residual = problem.f_eval(x) + problem.g_eval(x);
    let step = lu_solve(problem.jacobian_eval(x), &raw_residual)?;
    Ok(x - step)
}

fn to_vec(x: &DVector<f64>) -> Vec<f64> {
    x.iter().copied().collect()
}

fn certificate_failed_result(
    method: Method,
    pp: &Preconditioned<'_>,
    cert: Certificate,
) -> Result<SolveResult> {
    let x0 = pp.problem().x0();
    let residual_norm = pp.norm(&pp.residual(x0)?);
    Ok(SolveResult {
        method,
        status: SolveStatus::CertificateFailed,
        x: to_vec(x0),
        iterations: 0,
        residual_norm,
        t_star: cert.t_star,
        diagnostic: cert.failure_reason(),
        certificate: Some(cert),
        certified: false,
        steps: Vec::new(),
    })
}

/// Run the certified generalized Newton iteration.
///
/// Checks the certificate first and refuses to iterate when it fails
/// (status [`SolveStatus::CertificateFailed`]). While running, audits each
/// step against the majorant increment and aborts with
/// [`SolveStatus::BoundViolation`] when the guarantee is observed to fail.
pub fn solve_certified(
    pp: &Preconditioned<'_>,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    let cfg = pp.majorant_config()?;
    let cert = cfg.certificate(pp.problem().radius())?;
    if !cert.certified() {
        return certificate_failed_result(Method::Newton, pp, cert);
    }
    let t_star = cert.t_star.expect("certified implies t_star");
    let bound_slack = BOUND_SLACK_REL * t_star.max(1.0);
    let domain_slack = DOMAIN_SLACK_REL * t_star.max(1.0);

    let problem = pp.problem();
    let mut x = problem.x0().clone();
    let mut t = 0.0_f64;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut diagnostic: Option<String> = None;
    let mut residual_norm = f64::NAN;

    for n in 0..max_iter {
        let residual = pp.residual(&x)?;
        residual_norm = pp.norm(&residual);
        if residual_norm <= tol {
            status = SolveStatus::Converged;
            break;
        }

        let x_next = match newton_step(pp, &x) {
            Ok(next) => next,
            Err(Error::Singular(msg)) => {
                status = SolveStatus::SingularJacobian;
                diagnostic = Some(format!("step {n}: {msg}"));
                break;
            }
            Err(other) => return Err(other),
        };
        let step_norm = pp.norm(&(&x_next - &x));

        let t_next = cfg.next_t(t)?;
        let delta_t = t_next - t;
        let record = StepRecord {
            n,
            x: to_vec(&x_next),
            step_norm,
            residual_norm,
            t_before: t,
            t_after: t_next,
            delta_t,
            error_bound: t_star - t,
            jacobian_inverse_bound: inverse_bound(&cfg, t)?,
            bound_ok: Some(step_norm <= delta_t + bound_slack),
        };
        let bound_ok = record.bound_ok == Some(true);
        steps.push(record);

        if !bound_ok {
            status = SolveStatus::BoundViolation;
            diagnostic = Some(format!(
                "step {n}: measured step norm {step_norm:.17e} exceeds the certified \
                 increment {delta_t:.17e}; the declared regularity data do not hold \
                 for this operator"
            ));
            x = x_next;
            residual_norm = pp.norm(&pp.residual(&x)?);
            break;
        }
        let distance = problem.distance_from_start(&x_next);
        if distance > t_star + domain_slack {
            status = SolveStatus::DomainExit;
            diagnostic = Some(format!(
                "step {n}: iterate left the certified region: distance {distance:.17e} \
                 exceeds t* = {t_star:.17e}"
            ));
            x = x_next;
            residual_norm = pp.norm(&pp.residual(&x)?);
            break;
        }

        x = x_next;
        t = t_next;

        if status == SolveStatus::MaxIter && steps.len() == max_iter {
            // Budget exhausted; report the residual at the final iterate.
            residual_norm = pp.norm(&pp.residual(&x)?);
            if residual_norm <= tol {
                status = SolveStatus::Converged;
            } else {
                diagnostic = Some(format!(
                    "residual {residual_norm:.3e} still above tolerance {tol:.3e} after \
                     {max_iter} iterations"
                ));
            }
        }
    }

    Ok(SolveResult {
        method: Method::Newton,
        status,
        x: to_vec(&x),
        iterations: steps.len(),
        residual_norm,
        t_star: Some(t_star),
        certificate: Some(cert),
        certified: true,
        diagnostic,
        steps,
    })
}

/// Run the certified derivative-free (Picard-type) iteration
/// `x_{n+1} = x_n − (F(x_n) + G(x_n))`, audited against the comparison
/// sequence `ρ_{n+1} = ρ_n + W(ρ_n)`.
pub fn solve_picard(pp: &Preconditioned<'_>, tol: f64, max_iter: usize) -> Result<SolveResult> {
    let cfg = pp.majorant_config()?;
    let cert = cfg.certificate(pp.problem().radius())?;
    if !cert.certified() {
        return certificate_failed_result(Method::Picard, pp, cert);
    }
    let t_star = cert.t_star.expect("certified implies t_star");
    let bound_slack = BOUND_SLACK_REL * t_star.max(1.0);
    let domain_slack = DOMAIN_SLACK_REL * t_star.max(1.0);

    let problem = pp.problem();
    let mut x = problem.x0().clone();
    let mut rho = 0.0_f64;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut diagnostic: Option<String> = None;
    let mut residual_norm = f64::NAN;

    for n in 0..max_iter {
        let residual = pp.residual(&x)?;
        residual_norm = pp.norm(&residual);
        if residual_norm <= tol {
            status = SolveStatus::Converged;
            break;
        }

        let x_next = &x - &residual;
        let step_norm = residual_norm;
        // The comparison sequence may stall at t* to machine precision;
        // clamp so rounding never pushes it past the majorant zero.
        let rho_next = cfg.next_rho(rho)?.min(t_star);
        let delta_rho = (rho_next - rho).max(0.0);

        let record = StepRecord {
            n,
            x: to_vec(&x_next),
            step_norm,
            residual_norm,
            t_before: rho,
            t_after: rho_next,
            delta_t: delta_rho,
            error_bound: t_star - rho,
            jacobian_inverse_bound: 1.0,
            bound_ok: Some(step_norm <= delta_rho + bound_slack),
        };
        let bound_ok = record.bound_ok == Some(true);
        steps.push(record);

        if !bound_ok {
            status = SolveStatus::BoundViolation;
            diagnostic = Some(format!(
                "step {n}: measured step norm {step_norm:.17e} exceeds the certified \
                 comparison increment {delta_rho:.17e}"
            ));
            x = x_next;
            residual_norm = pp.norm(&pp.residual(&x)?);
            break;
        }
        let distance = problem.distance_from_start(&x_next);
        if distance > t_star + domain_slack {
            status = SolveStatus::DomainExit;
            diagnostic = Some(format!(
                "step {n}: iterate left the certified region: distance {distance:.17e} \
                 exceeds t* = {t_star:.17e}"
            ));
            x = x_next;
            residual_norm = pp.norm(&pp.residual(&x)?);
            break;
        }

        x = x_next;
        rho = rho_next;

        if status == SolveStatus::MaxIter && steps.len() == max_iter {
            residual_norm = pp.norm(&pp.residual(&x)?);
            if residual_norm <= tol {
                status = SolveStatus::Converged;
            } else {
                diagnostic = Some(format!(
                    "residual {residual_norm:.3e} still above tolerance {tol:.3e} after \
                     {max_iter} iterations"
                ));
            }
        }
    }

    Ok(SolveResult {
        method: Method::Picard,
        status,
        x: to_vec(&x),
        iterations: steps.len(),
        residual_norm,
        t_star: Some(t_star),
        certificate: Some(cert),
        certified: true,
        diagnostic,
        steps,
    })
}

/// Plain Newton iteration without a certificate: no bounds are claimed and
/// the records say so (NaN majorant columns, `bound_ok = None`). The only
/// safety check left is domain membership in the problem ball.
pub fn solve_uncertified(
    pp: &Preconditioned<'_>,
    tol: f64,
    max_iter: usize,
) -> Result<SolveResult> {
    let problem = pp.problem();
    let mut x = problem.x0().clone();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut diagnostic: Option<String> = None;
    let mut residual_norm = f64::NAN;

    for n in 0..max_iter {
        let residual = pp.residual(&x)?;
        residual_norm = pp.norm(&residual);
        if residual_norm <= tol {
            status = SolveStatus::Converged;
            break;
        }
        let x_next = match newton_step(pp, &x) {
            Ok(next) => next,
            Err(Error::Singular(msg)) => {
                status = SolveStatus::SingularJacobian;
                diagnostic = Some(format!("step {n}: {msg}"));
                break;
            }
            Err(other) => return Err(other),
        };
        steps.push(StepRecord {
            n,
            x: to_vec(&x_next),
            step_norm: pp.norm(&(&x_next - &x)),
            residual_norm,
            t_before: f64::NAN,
            t_after: f64::NAN,
            delta_t: f64::NAN,
            error_bound: f64::NAN,
            jacobian_inverse_bound: f64::NAN,
            bound_ok: None,
        });
        if !problem.in_domain(&x_next) {
            status = SolveStatus::DomainExit;
            diagnostic = Some(format!(
                "step {n}: iterate left the problem ball of radius {}",
                problem.radius()
            ));
            x = x_next;
            residual_norm = pp.norm(&pp.residual(&x)?);
            break;
        }
        x = x_next;
        if status == SolveStatus::MaxIter && steps.len() == max_iter {
            residual_norm = pp.norm(&pp.residual(&x)?);
            if residual_norm <= tol {
                status = SolveStatus::Converged;
            } else {
                diagnostic = Some(format!(
                    "residual {residual_norm:.3e} still above tolerance {tol:.3e} after \
                     {max_iter} iterations"
                ));
            }
        }
    }

    Ok(SolveResult {
        method: Method::Newton,
        status,
        x: to_vec(&x),
        iterations: steps.len(),
        residual_norm,
        t_star: None,
        certificate: None,
        certified: false,
        diagnostic,
        steps,
    })
}
