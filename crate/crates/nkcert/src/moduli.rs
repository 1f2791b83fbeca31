//! Moduli of continuity for the smooth part and growth rates for the
//! nonsmooth part.
//!
//! A modulus `ω` here is continuous, strictly increasing and concave on
//! `[0, ∞)` with `ω(0) = 0`. It bounds how fast the derivative of the smooth
//! operator can drift. The companion rate `ψ` is nondecreasing and
//! nonnegative and bounds the local variation of the nonsmooth operator.
//! Both come with exact running integrals (`Ω`, `Ψ`), because the majorant
//! engine consumes integrals, not raw values.
//!
//! Closed forms are used wherever they exist (Lipschitz and single Hölder
//! kinds); the piecewise and sum kinds invert by bisection at a fixed
//! absolute tolerance of `1e-14`, which keeps the inverse dependable close
//! to the right end of its range where the majorant is most sensitive.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance for bisection-based inverses of piecewise kinds.
const INVERSE_BISECTION_TOL: f64 = 1e-14;

/// Upper bracket cap for inverse bisection; beyond this the requested value
/// is treated as unreachable.
const INVERSE_BRACKET_CAP: f64 = 1e300;

/// Number of grid points used by [`Modulus::validate`] and
/// [`PsiRate::validate`].
const VALIDATION_GRID: usize = 1024;

/// A modulus of continuity: continuous, strictly increasing, concave,
/// vanishing at zero.
///
/// Construct through the validating constructors; structurally invalid data
/// (a nonpositive constant, an exponent outside `(0, 1)`, breakpoints that
/// are not concave) is rejected with [`Error::Invalid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusRepr", into = "ModulusRepr")]
pub struct Modulus {
    form: Form,
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    /// `ω(t) = K·t`
    Lipschitz { k: f64 },
    /// `ω(t) = L·t^α`, `α ∈ (0, 1)`
    Hoelder { l: f64, alpha: f64 },
    /// `ω(t) = Σ Lᵢ·t^αᵢ`, `αᵢ ∈ (0, 1]`
    SumOfHoelder { terms: Vec<(f64, f64)> },
    /// Piecewise linear through `(0,0)` with positive, nonincreasing slopes;
    /// extended past the last breakpoint with the final slope.
    PiecewiseLinearConcave { points: Vec<(f64, f64)> },
}

impl Modulus {
    /// Lipschitz modulus `ω(t) = K·t` with `K > 0`.
    pub fn lipschitz(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Invalid(format!(
                "Lipschitz constant must be finite and positive, got {k}"
            )));
        }
        Ok(Self { form: Form::Lipschitz { k } })
    }

    /// Hölder modulus `ω(t) = L·t^α` with `L > 0` and `α ∈ (0, 1)`.
    pub fn hoelder(l: f64, alpha: f64) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Invalid(format!(
                "Hölder coefficient must be finite and positive, got {l}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Invalid(format!(
                "Hölder exponent must lie strictly between 0 and 1, got {alpha}"
            )));
        }
        Ok(Self { form: Form::Hoelder { l, alpha } })
    }

    /// Finite sum of Hölder terms `Σ Lᵢ·t^αᵢ`; exponents may include 1
    /// (a linear term), coefficients must be positive.
    pub fn sum_of_hoelder(terms: &[(f64, f64)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Invalid("sum of Hölder terms must not be empty".into()));
        }
        for &(l, alpha) in terms {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Invalid(format!(
                    "Hölder term coefficient must be finite and positive, got {l}"
                )));
            }
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::Invalid(format!(
                    "Hölder term exponent must lie in (0, 1], got {alpha}"
                )));
            }
        }
        Ok(Self { form: Form::SumOfHoelder { terms: terms.to_vec() } })
    }

    /// Piecewise linear concave modulus through breakpoints
    /// `(t₀, v₀) = (0, 0) < (t₁, v₁) < …` with positive, nonincreasing
    /// segment slopes. Past the last breakpoint the final slope continues.
    pub fn piecewise_linear_concave(points: &[(f64, f64)]) -> Result<Self> {
        validate_breakpoints(points, BreakpointKind::ConcaveModulus)?;
        Ok(Self { form: Form::PiecewiseLinearConcave { points: points.to_vec() } })
    }

    /// Evaluate `ω(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        check_nonnegative(t, "modulus argument")?;
        Ok(match &self.form {
            Form::Lipschitz { k } => k * t,
            Form::Hoelder { l, alpha } => l * t.powf(*alpha),
            Form::SumOfHoelder { terms } => {
                terms.iter().map(|&(l, alpha)| l * t.powf(alpha)).sum()
            }
            Form::PiecewiseLinearConcave { points } => pw_eval(points, t),
        })
    }

    /// Evaluate the inverse `ω⁻¹(s)` for `s ≥ 0`.
    ///
    /// Closed forms for the Lipschitz and Hölder kinds; bisection to an
    /// absolute tolerance of `1e-14` for the sum and piecewise kinds. Values
    /// beyond the representable range produce [`Error::Range`].
    pub fn inverse(&self, s: f64) -> Result<f64> {
        check_nonnegative(s, "modulus inverse argument")?;
        if s == 0.0 {
            return Ok(0.0);
        }
        match &self.form {
            Form::Lipschitz { k } => Ok(s / k),
            Form::Hoelder { l, alpha } => Ok((s / l).powf(1.0 / alpha)),
            _ => invert_increasing(|t| self.eval(t).expect("t >= 0 inside bisection"), s),
        }
    }

    /// Evaluate the running integral `Ω(t) = ∫₀ᵗ ω(u) du`, exactly per kind.
    pub fn integral(&self, t: f64) -> Result<f64> {
        check_nonnegative(t, "modulus integral bound")?;
        Ok(match &self.form {
            Form::Lipschitz { k } => 0.5 * k * t * t,
            Form::Hoelder { l, alpha } => l * t.powf(1.0 + alpha) / (1.0 + alpha),
            Form::SumOfHoelder { terms } => terms
                .iter()
                .map(|&(l, alpha)| l * t.powf(1.0 + alpha) / (1.0 + alpha))
                .sum(),
            Form::PiecewiseLinearConcave { points } => pw_integral(points, t),
        })
    }

    /// Grid-check the class conditions: zero at zero, strict monotonicity,
    /// concavity, on a deterministic geometric grid, plus the structural
    /// checks of the constructor. Reports the first violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();

        match self.eval(0.0) {
            Ok(v) if v == 0.0 => {}
            Ok(v) => return report.fail(format!("omega(0) = {v}, expected exactly 0")),
            Err(e) => return report.fail(format!("omega(0) failed to evaluate: {e}")),
        }
        report.checks_run += 1;

        let grid = geometric_grid(1e-6, 10.0, VALIDATION_GRID);
        let values: Vec<f64> = match grid.iter().map(|&t| self.eval(t)).collect() {
            Ok(v) => v,
            Err(e) => return report.fail(format!("grid evaluation failed: {e}")),
        };

        for i in 1..grid.len() {
            if !(values[i] > values[i - 1]) {
                return report.fail(format!(
                    "not strictly increasing: omega({}) = {} vs omega({}) = {}",
                    grid[i - 1],
                    values[i - 1],
                    grid[i],
                    values[i]
                ));
            }
        }
        report.checks_run += 1;

        for i in 1..grid.len() - 1 {
            let (t0, t1, t2) = (grid[i - 1], grid[i], grid[i + 1]);
            let chord = values[i - 1] + (values[i + 1] - values[i - 1]) * (t1 - t0) / (t2 - t0);
            let tol = 1e-12 * values[i + 1].max(1.0);
            if values[i] < chord - tol {
                return report.fail(format!(
                    "not concave near t = {t1}: omega = {} below chord {chord}",
                    values[i]
                ));
            }
        }
        report.checks_run += 1;

        report
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.form {
            Form::Lipschitz { k } => format!("Lipschitz(K = {k})"),
            Form::Hoelder { l, alpha } => format!("Hoelder(L = {l}, alpha = {alpha})"),
            Form::SumOfHoelder { terms } => {
                let parts: Vec<String> =
                    terms.iter().map(|(l, a)| format!("{l}*t^{a}")).collect();
                format!("SumOfHoelder({})", parts.join(" + "))
            }
            Form::PiecewiseLinearConcave { points } => {
                format!("PiecewiseLinearConcave({} breakpoints)", points.len())
            }
        }
    }
}

/// Growth rate for the nonsmooth part: nondecreasing and nonnegative, with
/// an exact running integral `Ψ(t) = ∫₀ᵗ ψ(u) du`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PsiRepr", into = "PsiRepr")]
pub struct PsiRate {
    form: PsiForm,
}

#[derive(Debug, Clone, PartialEq)]
enum PsiForm {
    Zero,
    Constant { c: f64 },
    /// Piecewise linear through breakpoints starting at `t = 0`, with
    /// nondecreasing values; extended past the last breakpoint with the
    /// final slope.
    PiecewiseLinearNondecreasing { points: Vec<(f64, f64)> },
}

impl PsiRate {
    /// The zero rate: `g` does not vary at all (smooth-only problems).
    pub fn zero() -> Self {
        Self { form: PsiForm::Zero }
    }

    /// Constant rate `ψ(t) = c`, `c ≥ 0`.
    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Invalid(format!(
                "constant rate must be finite and nonnegative, got {c}"
            )));
        }
        Ok(Self { form: PsiForm::Constant { c } })
    }

    /// Piecewise linear nondecreasing rate through breakpoints
    /// `(0, v₀), (t₁, v₁), …` with `v₀ ≥ 0` and nondecreasing values.
    pub fn piecewise_linear_nondecreasing(points: &[(f64, f64)]) -> Result<Self> {
        validate_breakpoints(points, BreakpointKind::NondecreasingRate)?;
        Ok(Self { form: PsiForm::PiecewiseLinearNondecreasing { points: points.to_vec() } })
    }

    /// Evaluate `ψ(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        check_nonnegative(t, "rate argument")?;
        Ok(match &self.form {
            PsiForm::Zero => 0.0,
            PsiForm::Constant { c } => *c,
            PsiForm::PiecewiseLinearNondecreasing { points } => pw_eval(points, t),
        })
    }

    /// Evaluate `Ψ(t) = ∫₀ᵗ ψ(u) du`, exactly per kind.
    pub fn integral(&self, t: f64) -> Result<f64> {
        check_nonnegative(t, "rate integral bound")?;
        Ok(match &self.form {
            PsiForm::Zero => 0.0,
            PsiForm::Constant { c } => c * t,
            PsiForm::PiecewiseLinearNondecreasing { points } => pw_integral(points, t),
        })
    }

    /// True when the rate is identically zero.
    pub fn is_zero(&self) -> bool {
        match &self.form {
            PsiForm::Zero => true,
            PsiForm::Constant { c } => *c == 0.0,
            PsiForm::PiecewiseLinearNondecreasing { points } => {
                points.iter().all(|&(_, v)| v == 0.0)
            }
        }
    }

    /// Grid-check nonnegativity and monotonicity plus structural checks.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let grid = geometric_grid(1e-6, 10.0, VALIDATION_GRID);
        let mut prev = match self.eval(0.0) {
            Ok(v) => v,
            Err(e) => return report.fail(format!("psi(0) failed to evaluate: {e}")),
        };
        if prev < 0.0 {
            return report.fail(format!("psi(0) = {prev} is negative"));
        }
        for &t in &grid {
            let v = match self.eval(t) {
                Ok(v) => v,
                Err(e) => return report.fail(format!("psi({t}) failed to evaluate: {e}")),
            };
            if v < prev {
                return report.fail(format!("not nondecreasing near t = {t}: {v} < {prev}"));
            }
            prev = v;
        }
        report.checks_run += 2;
        report
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.form {
            PsiForm::Zero => "zero".into(),
            PsiForm::Constant { c } => format!("constant({c})"),
            PsiForm::PiecewiseLinearNondecreasing { points } => {
                format!("piecewise_linear({} breakpoints)", points.len())
            }
        }
    }
}

/// Outcome of a grid validation run. `valid` is true when every check
/// passed; otherwise `first_violation` names the offending check.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checks_run: usize,
    pub first_violation: Option<String>,
}

impl ValidationReport {
    fn new() -> Self {
        Self { valid: true, checks_run: 0, first_violation: None }
    }

    fn fail(mut self, message: String) -> Self {
        self.valid = false;
        self.first_violation = Some(message);
        self
    }
}

enum BreakpointKind {
    ConcaveModulus,
    NondecreasingRate,
}

fn validate_breakpoints(points: &[(f64, f64)], kind: BreakpointKind) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::Invalid("need at least two breakpoints".into()));
    }
    let (t0, v0) = points[0];
    if t0 != 0.0 {
        return Err(Error::Invalid(format!("first breakpoint must sit at t = 0, got {t0}")));
    }
    match kind {
        BreakpointKind::ConcaveModulus if v0 != 0.0 => {
            return Err(Error::Invalid(format!("modulus must vanish at 0, got value {v0}")));
        }
        BreakpointKind::NondecreasingRate if v0 < 0.0 => {
            return Err(Error::Invalid(format!("rate must be nonnegative at 0, got {v0}")));
        }
        _ => {}
    }
    let mut prev_slope = f64::INFINITY;
    for w in points.windows(2) {
        let (ta, va) = w[0];
        let (tb, vb) = w[1];
        if !(tb > ta) || !tb.is_finite() || !vb.is_finite() {
            return Err(Error::Invalid(format!(
                "breakpoint abscissae must increase and stay finite, got {ta} then {tb}"
            )));
        }
        let slope = (vb - va) / (tb - ta);
        match kind {
            BreakpointKind::ConcaveModulus => {
                if !(slope > 0.0) {
                    return Err(Error::Invalid(format!(
                        "modulus segments must increase strictly, got slope {slope} on [{ta}, {tb}]"
                    )));
                }
                if slope > prev_slope {
                    return Err(Error::Invalid(format!(
                        "modulus segments must be concave (nonincreasing slopes), got {slope} after {prev_slope} on [{ta}, {tb}]"
                    )));
                }
            }
            BreakpointKind::NondecreasingRate => {
                if slope < 0.0 {
                    return Err(Error::Invalid(format!(
                        "rate segments must not decrease, got slope {slope} on [{ta}, {tb}]"
                    )));
                }
            }
        }
        prev_slope = slope;
    }
    Ok(())
}

/// Piecewise linear evaluation with final-slope extension.
fn pw_eval(points: &[(f64, f64)], t: f64) -> f64 {
    let (last_t, last_v) = *points.last().expect("validated nonempty");
    if t >= last_t {
        let (pt, pv) = points[points.len() - 2];
        let slope = (last_v - pv) / (last_t - pt);
        return last_v + slope * (t - last_t);
    }
    // t < last_t: locate the containing segment.
    let idx = points.partition_point(|&(bt, _)| bt <= t);
    let (ta, va) = points[idx - 1];
    let (tb, vb) = points[idx];
    va + (vb - va) * (t - ta) / (tb - ta)
}

/// Exact integral of a piecewise linear function from 0 to `t`.
fn pw_integral(points: &[(f64, f64)], t: f64) -> f64 {
    let mut acc = 0.0;
    for w in points.windows(2) {
        let (ta, va) = w[0];
        let (tb, vb) = w[1];
        if t <= ta {
            return acc;
        }
        if t < tb {
            let dt = t - ta;
            let slope = (vb - va) / (tb - ta);
            return acc + va * dt + 0.5 * slope * dt * dt;
        }
        acc += 0.5 * (va + vb) * (tb - ta);
    }
    // Beyond the last breakpoint: continue with the final slope.
    let (last_t, last_v) = *points.last().expect("validated nonempty");
    let (pt, pv) = points[points.len() - 2];
    let slope = (last_v - pv) / (last_t - pt);
    let dt = t - last_t;
    acc + last_v * dt + 0.5 * slope * dt * dt
}

/// Invert a continuous strictly increasing function with `f(0) = 0` by
/// bracket expansion and bisection at fixed absolute tolerance.
fn invert_increasing(f: impl Fn(f64) -> f64, target: f64) -> Result<f64> {
    let mut hi = 1.0;
    while f(hi) < target {
        hi *= 2.0;
        if hi > INVERSE_BRACKET_CAP {
            return Err(Error::Range(format!(
                "value {target} is above the representable range of the modulus"
            )));
        }
    }
    let mut lo = 0.0;
    while hi - lo > INVERSE_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_nonnegative(t: f64, what: &str) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("{what} must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Deterministic geometric grid on `[lo, hi]` with `n` points.
fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    (0..n).map(|j| lo * (ratio * j as f64 / (n - 1) as f64).exp()).collect()
}

// ---------------------------------------------------------------------------
// Serde wire format: tagged JSON. Deserialization routes through the
// validating constructors so a config file cannot smuggle in an invalid
// modulus.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModulusRepr {
    Lipschitz {
        #[serde(rename = "K")]
        k: f64,
    },
    Hoelder {
        #[serde(rename = "L")]
        l: f64,
        alpha: f64,
    },
    SumOfHoelder {
        terms: Vec<HoelderTerm>,
    },
    PiecewiseLinearConcave {
        points: Vec<(f64, f64)>,
    },
}

#[derive(Serialize, Deserialize)]
struct HoelderTerm {
    #[serde(rename = "L")]
    l: f64,
    alpha: f64,
}

impl TryFrom<ModulusRepr> for Modulus {
    type Error = Error;

    fn try_from(repr: ModulusRepr) -> Result<Self> {
        match repr {
            ModulusRepr::Lipschitz { k } => Modulus::lipschitz(k),
            ModulusRepr::Hoelder { l, alpha } => Modulus::hoelder(l, alpha),
            ModulusRepr::SumOfHoelder { terms } => {
                let terms: Vec<(f64, f64)> = terms.iter().map(|t| (t.l, t.alpha)).collect();
                Modulus::sum_of_hoelder(&terms)
            }
            ModulusRepr::PiecewiseLinearConcave { points } => {
                Modulus::piecewise_linear_concave(&points)
            }
        }
    }
}

impl From<Modulus> for ModulusRepr {
    fn from(m: Modulus) -> Self {
        match m.form {
            Form::Lipschitz { k } => ModulusRepr::Lipschitz { k },
            Form::Hoelder { l, alpha } => ModulusRepr::Hoelder { l, alpha },
            Form::SumOfHoelder { terms } => ModulusRepr::SumOfHoelder {
                terms: terms.into_iter().map(|(l, alpha)| HoelderTerm { l, alpha }).collect(),
            },
            Form::PiecewiseLinearConcave { points } => {
                ModulusRepr::PiecewiseLinearConcave { points }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PsiRepr {
    Zero,
    Constant { c: f64 },
    PiecewiseLinearNondecreasing { points: Vec<(f64, f64)> },
}

impl TryFrom<PsiRepr> for PsiRate {
    type Error = Error;

    fn try_from(repr: PsiRepr) -> Result<Self> {
        match repr {
            PsiRepr::Zero => Ok(PsiRate::zero()),
            PsiRepr::Constant { c } => PsiRate::constant(c),
            PsiRepr::PiecewiseLinearNondecreasing { points } => {
                PsiRate::piecewise_linear_nondecreasing(&points)
            }
        }
    }
}

impl From<PsiRate> for PsiRepr {
    fn from(p: PsiRate) -> Self {
        match p.form {
            PsiForm::Zero => PsiRepr::Zero,
            PsiForm::Constant { c } => PsiRepr::Constant { c },
            PsiForm::PiecewiseLinearNondecreasing { points } => {
                PsiRepr::PiecewiseLinearNondecreasing { points }
            }
        }
    }
}
