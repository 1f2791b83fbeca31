//! Certified solving of operator equations `f(x) + g(x) = 0` where `f` is
//! differentiable and `g` is merely continuous (kinks allowed).
//!
//! The iteration is the generalized Newton scheme that linearizes only `f`:
//!
//! ```text
//! x_{n+1} = x_n - [f'(x_n)]^{-1} (f(x_n) + g(x_n))
//! ```
//!
//! What distinguishes this crate from a plain Newton loop is that every run
//! is accompanied by a *scalar majorant*: a one-dimensional model problem
//! built from a modulus of continuity for `f'` ([`moduli::Modulus`]), a
//! growth rate for `g` ([`moduli::PsiRate`]), and the initial residual. When
//! the majorant's solvability condition holds, the scalar sequence dominates
//! the real iteration step by step, which yields checkable a-priori and
//! a-posteriori error bounds. The solver refuses to claim convergence it
//! cannot certify, and the [`audit`] module can hunt for counterexamples to
//! every declared hypothesis by sampling.
//!
//! Modules:
//! - [`moduli`]: moduli of continuity (Lipschitz, Hölder, sums, piecewise)
//!   and nondecreasing rates for the nonsmooth part, with exact integrals
//!   and inverses.
//! - [`majorant`]: the scalar engine — solvability certificate, limit of the
//!   majorant recurrence, traces, and the recurrence identity check.
//! - [`operator_model`]: problem containers, preconditioning to
//!   `F'(x0) = I`, and small dense linear algebra with explicit singularity
//!   handling.
//! - [`solver`]: certified Newton and Picard drivers that audit the step
//!   bound on every iteration.
//! - [`audit`]: sampling falsifiers for the declared smoothness hypotheses
//!   and exact per-step residual audits; sampling can only falsify, never
//!   prove.
//! - [`problems`]: built-in test problems with honest declared moduli.
//! - [`cli`]: the `nkcert` command-line front end.

pub mod audit;
pub mod cli;
pub mod majorant;
pub mod moduli;
pub mod numfmt;
pub mod operator_model;
pub mod problems;
pub mod solver;

use thiserror::Error;

/// Errors shared by the whole crate.
///
/// The library keeps one flat error type: callers almost always either
/// propagate the failure into a diagnostic or map it onto a process exit
/// code, and the variant carries enough structure for both.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of the operation
    /// (negative `t` for a modulus, a point outside the problem ball, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value cannot be reached by the function being inverted.
    #[error("range error: {0}")]
    Range(String),

    /// A constructor rejected structurally invalid data.
    #[error("invalid construction: {0}")]
    Invalid(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A matrix was numerically singular at the configured pivot threshold.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// No trustworthy high-precision reference solution could be produced.
    #[error("oracle unavailable: {0}")]
    Oracle(String),

    /// A corpus lookup or override failed validation.
    #[error("corpus error: {0}")]
    Corpus(String),

    /// Run configuration could not be parsed or is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
