//! The scalar majorant engine.
//!
//! Everything the solver certifies reduces to one scalar function on
//! `[0, χ]` built from the declared moduli and the initial residual bound
//! `a`:
//!
//! ```text
//! Φ(t) = a − Ω(χ) + Ω(χ − t) − t·h        (smooth part)
//! W(t) = Φ(t) + Ψ(t)                      (full majorant)
//! χ    = ω⁻¹(1 − h)
//! ```
//!
//! `W` starts at `W(0) = a > 0`, is convex up to the `Ψ` term, and the
//! *solvability condition* `a < Ω(χ) + h·χ − Ψ(χ)` is exactly `W(χ) < 0`.
//! When it holds (strictly — equality fails closed), `W` has its smallest
//! zero `t*` inside `(0, χ)`, the Newton-type recurrence
//!
//! ```text
//! t₀ = 0,   t_{n+1} = t_n + W(t_n) / (h + ω(χ − t_n))
//! ```
//!
//! increases strictly to `t*`, and `t*` bounds the distance from the start
//! point to the solution of the operator equation. The increments
//! `t_{n+1} − t_n` dominate Newton's step norms and `t* − t_n` dominates the
//! remaining error; the Picard comparison sequence `ρ_{n+1} = ρ_n + W(ρ_n)`
//! plays the same role for the derivative-free iteration.

use serde::Serialize;

use crate::moduli::{Modulus, PsiRate};
use crate::{Error, Result};

/// Bisection width target for locating `t*`, relative to `χ`.
const T_STAR_WIDTH_REL: f64 = 1e-14;

/// Residual target for the located zero: `|W(t*)| ≤ 1e-13·max(1, a)`.
const T_STAR_RESIDUAL_REL: f64 = 1e-13;

/// A fully specified scalar majorant: residual bound `a`, derivative-norm
/// offset `h ∈ [0, 1)`, modulus `ω` for the smooth part and rate `ψ` for the
/// nonsmooth part. `χ = ω⁻¹(1 − h)` is computed once at construction.
#[derive(Debug, Clone)]
pub struct MajorantConfig {
    a: f64,
    h: f64,
    chi: f64,
    modulus: Modulus,
    psi: PsiRate,
}

impl MajorantConfig {
    pub fn new(a: f64, h: f64, modulus: Modulus, psi: PsiRate) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Invalid(format!(
                "initial residual bound must be finite and positive, got {a}"
            )));
        }
        if !(0.0..1.0).contains(&h) {
            return Err(Error::Invalid(format!(
                "derivative-norm offset must lie in [0, 1), got {h}"
            )));
        }
        let chi = modulus.inverse(1.0 - h)?;
        Ok(Self { a, h, chi, modulus, psi })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// The right end of the majorant's domain, `χ = ω⁻¹(1 − h)`.
    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn psi(&self) -> &PsiRate {
        &self.psi
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.chi {
            return Err(Error::Domain(format!(
                "majorant argument must lie in [0, {}], got {t}",
                self.chi
            )));
        }
        Ok(())
    }

    /// Smooth part `Φ(t) = a − Ω(χ) + Ω(χ − t) − t·h` on `[0, χ]`.
    pub fn phi(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let omega_chi = self.modulus.integral(self.chi)?;
        let omega_rest = self.modulus.integral(self.chi - t)?;
        Ok(self.a - omega_chi + omega_rest - t * self.h)
    }

    /// Derivative `Φ'(t) = −ω(χ − t) − h`; strictly negative on `[0, χ)`.
    pub fn phi_deriv(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(-(self.modulus.eval(self.chi - t)? + self.h))
    }

    /// Full majorant `W(t) = Φ(t) + Ψ(t)`.
    pub fn w(&self, t: f64) -> Result<f64> {
        Ok(self.phi(t)? + self.psi.integral(t)?)
    }

    /// Right-hand side of the solvability condition,
    /// `Ω(χ) + h·χ − Ψ(χ)`; the condition is `a` strictly below it.
    pub fn solvability_rhs(&self) -> Result<f64> {
        Ok(self.modulus.integral(self.chi)? + self.h * self.chi - self.psi.integral(self.chi)?)
    }

    /// One step of the majorant recurrence:
    /// `t ↦ t + W(t) / (h + ω(χ − t))`, which is Newton's method on `W`
    /// since the denominator is `−Φ'(t)`.
    ///
    /// Computed both as the explicit integral expression and as
    /// `t − W(t)/Φ'(t)`; the two must agree to `1e-12` relative, which traps
    /// inconsistent evaluation of `W` against its closed form.
    pub fn next_t(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        let denominator = self.h + self.modulus.eval(self.chi - t)?;
        if denominator <= 0.0 {
            return Err(Error::Domain(format!(
                "majorant recurrence undefined at t = {t}: slope −(h + ω(χ−t)) vanished"
            )));
        }
        let explicit = {
            let omega_chi = self.modulus.integral(self.chi)?;
            let omega_rest = self.modulus.integral(self.chi - t)?;
            let psi_int = self.psi.integral(t)?;
            t + (self.a - omega_chi + omega_rest - t * self.h + psi_int) / denominator
        };
        let via_w = t - self.w(t)? / self.phi_deriv(t)?;
        debug_assert!(
            (explicit - via_w).abs() <= 1e-12 * explicit.abs().max(1.0),
            "recurrence forms disagree at t = {t}: {explicit} vs {via_w}"
        );
        Ok(explicit)
    }

    /// One step of the Picard comparison sequence `ρ ↦ ρ + W(ρ)`.
    pub fn next_rho(&self, rho: f64) -> Result<f64> {
        self.check_t(rho)?;
        Ok(rho + self.w(rho)?)
    }

    /// Locate the smallest zero `t*` of `W` in `(0, χ)` by bisection.
    ///
    /// Requires the sign change `W(0) > 0 > W(χ)`; fails with
    /// [`Error::Precondition`] otherwise (that is exactly a failed
    /// solvability condition). The bracket is narrowed to `1e-14·χ` and the
    /// returned point satisfies `|W(t*)| ≤ 1e-13·max(1, a)`.
    pub fn find_t_star(&self) -> Result<f64> {
        let w0 = self.w(0.0)?;
        let w_chi = self.w(self.chi)?;
        if !(w0 > 0.0) {
            return Err(Error::Precondition(format!(
                "majorant must start positive: W(0) = {w0}"
            )));
        }
        if !(w_chi < 0.0) {
            return Err(Error::Precondition(format!(
                "solvability condition fails: W(χ) = {w_chi} is not negative"
            )));
        }
        let mut lo = 0.0_f64;
        let mut hi = self.chi;
        let width_tol = T_STAR_WIDTH_REL * self.chi;
        let residual_tol = T_STAR_RESIDUAL_REL * self.a.max(1.0);
        let mut iterations = 0;
        while hi - lo > width_tol || self.w(0.5 * (lo + hi))?.abs() > residual_tol {
            let mid = 0.5 * (lo + hi);
            if self.w(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
            if iterations > 200 {
                return Err(Error::Precondition(format!(
                    "could not localize the majorant zero: bracket [{lo}, {hi}]"
                )));
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Evaluate the full certificate against a ball of radius `radius`.
    /// Never fails: a config whose condition does not hold yields a
    /// certificate that says so.
    pub fn certificate(&self, radius: f64) -> Result<Certificate> {
        let w_at_0 = self.w(0.0)?;
        let w_at_chi = self.w(self.chi)?;
        let solvability_slack = self.solvability_rhs()? - self.a;
        let condition_holds = solvability_slack > 0.0;
        let (t_star, unique_zero_found, ball_radius_ok) = if condition_holds {
            let t_star = self.find_t_star()?;
            let unique = w_at_0 > 0.0 && w_at_chi < 0.0 && t_star > 0.0 && t_star < self.chi;
            (Some(t_star), unique, t_star <= radius)
        } else {
            (None, false, false)
        };
        Ok(Certificate {
            a: self.a,
            h: self.h,
            chi: self.chi,
            omega_integral_chi: self.modulus.integral(self.chi)?,
            psi_integral_chi: self.psi.integral(self.chi)?,
            w_at_0,
            w_at_chi,
            solvability_slack,
            condition_holds,
            t_star,
            unique_zero_found,
            ball_radius: radius,
            ball_radius_ok,
        })
    }

    /// Run the majorant recurrence from `t₀ = 0` until the increment drops
    /// below `tol` or `max_iter` steps have been taken.
    ///
    /// Requires the solvability condition (fails with
    /// [`Error::Precondition`] otherwise, through [`Self::find_t_star`]).
    /// The returned trace is strictly increasing and bounded by `t*`.
    pub fn run(&self, tol: f64, max_iter: usize) -> Result<MajorantTrace> {
        if !(tol >= 0.0) {
            return Err(Error::Invalid(format!("tolerance must be nonnegative, got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::Invalid("max_iter must be at least 1".into()));
        }
        let t_star = self.find_t_star()?;
        let mut t = vec![0.0_f64];
        let mut converged = false;
        for _ in 0..max_iter {
            let current = *t.last().expect("trace nonempty");
            let next = self.next_t(current)?;
            let delta = next - current;
            if delta <= 0.0 {
                // Rounding pushed W(t) nonpositive: t has reached t* to
                // machine precision.
                converged = delta.abs() < tol;
                break;
            }
            t.push(next);
            if delta < tol {
                converged = true;
                break;
            }
        }
        Ok(MajorantTrace { iterations: t.len() - 1, t, t_star, converged })
    }

    /// Verify the conserved quantity of the recurrence along a trace: for
    /// every step,
    /// `ω(χ−t_n)(t_{n+1}−t_n) − Ω(χ−t_n) + t_{n+1}·h − Ψ(t_n) = a − Ω(χ)`.
    ///
    /// The identity is algebraically exact, so any deviation beyond rounding
    /// means the trace was not produced by this configuration's recurrence.
    pub fn identity_check(&self, trace: &MajorantTrace) -> Result<IdentityReport> {
        let rhs = self.a - self.modulus.integral(self.chi)?;
        let mut deviations = Vec::with_capacity(trace.t.len().saturating_sub(1));
        for w in trace.t.windows(2) {
            let (t_n, t_next) = (w[0], w[1]);
            let lhs = self.modulus.eval(self.chi - t_n)? * (t_next - t_n)
                - self.modulus.integral(self.chi - t_n)?
                + t_next * self.h
                - self.psi.integral(t_n)?;
            deviations.push((lhs - rhs).abs());
        }
        let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
        Ok(IdentityReport { max_deviation, deviations })
    }
}

/// The outcome of checking a majorant against a ball: all the scalar facts
/// a caller needs to decide whether a certified run may start.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub a: f64,
    pub h: f64,
    pub chi: f64,
    /// `Ω(χ)`
    pub omega_integral_chi: f64,
    /// `Ψ(χ)`
    pub psi_integral_chi: f64,
    pub w_at_0: f64,
    pub w_at_chi: f64,
    /// `Ω(χ) + h·χ − Ψ(χ) − a`; the solvability condition is `> 0`,
    /// strictly — a slack of exactly zero fails closed.
    pub solvability_slack: f64,
    pub condition_holds: bool,
    /// Smallest zero of `W` in `(0, χ)`, present when the condition holds.
    pub t_star: Option<f64>,
    /// Sign change confirmed and the zero is interior: the zero found by
    /// bisection is the convergence radius and no second zero was crossed.
    pub unique_zero_found: bool,
    pub ball_radius: f64,
    /// `t* ≤ radius`: the certified region fits inside the problem ball.
    pub ball_radius_ok: bool,
}

impl Certificate {
    /// True when a certified run may start: condition holds, the zero is
    /// localized and interior, and it fits in the ball.
    pub fn certified(&self) -> bool {
        self.condition_holds && self.unique_zero_found && self.ball_radius_ok
    }

    /// Human-readable failure reason, if any.
    pub fn failure_reason(&self) -> Option<String> {
        if self.certified() {
            return None;
        }
        if !self.condition_holds {
            return Some(format!(
                "solvability condition fails: a = {} is not below Ω(χ) + h·χ − Ψ(χ) = {} (slack {})",
                self.a,
                self.a + self.solvability_slack,
                self.solvability_slack
            ));
        }
        if !self.unique_zero_found {
            return Some("majorant zero could not be confirmed interior".into());
        }
        Some(format!(
            "certified radius t* = {} exceeds the problem ball radius {}",
            self.t_star.unwrap_or(f64::NAN),
            self.ball_radius
        ))
    }
}

/// A run of the majorant recurrence: `t[0] = 0`, strictly increasing,
/// `converged` when the final increment fell below the tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct MajorantTrace {
    pub t: Vec<f64>,
    pub t_star: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl MajorantTrace {
    /// Final value of the sequence.
    pub fn limit(&self) -> f64 {
        *self.t.last().expect("trace always contains t0 = 0")
    }

    /// Increment `t_{n+1} − t_n` of step `n` (0-based).
    pub fn delta(&self, n: usize) -> f64 {
        self.t[n + 1] - self.t[n]
    }
}

/// Per-step deviations from the recurrence's conserved quantity.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub max_deviation: f64,
    pub deviations: Vec<f64>,
}
