//! Built-in problem corpus.
//!
//! Five small, fully specified problems that exercise every part of the
//! solver: a smooth scalar square root, the same equation with an added
//! absolute-value kink, an affine system in the max norm, a scalar problem
//! whose derivative is only Hölder continuous, and a two-dimensional
//! quadratic system with componentwise kinks.
//!
//! Every entry declares moduli for the *preconditioned* operator
//! `F = A₀⁻¹f`, chosen so the declaration is sound on the whole problem
//! ball (several with equality on a family of pairs, so the certified
//! bounds are sharp). Parameters can be adjusted with `key=value`
//! overrides; declared regularity recomputes from the final parameter
//! values, and `K`/`L`,`alpha`/`psi_c`/`h` overrides *replace* the declared
//! data — deliberately allowed to be wrong, so audits have something to
//! falsify.

use std::collections::BTreeMap;

use nalgebra::{dmatrix, dvector, DMatrix, DVector};

use crate::moduli::{Modulus, PsiRate};
use crate::operator_model::{DeclaredModuli, NormChoice, Problem};
use crate::{Error, Result};

/// Names of all built-in entries, in listing order.
pub const ENTRY_NAMES: [&str; 5] = [
    "scalar_sqrt2_smooth",
    "scalar_sqrt2_kink",
    "linear_nd",
    "hoelder_scalar",
    "system_2d_kink",
];

/// Parsed `key=value` parameter overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    map: BTreeMap<String, f64>,
}

impl Overrides {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parse `key=value` pairs; keys must be unique and values finite.
    pub fn parse(pairs: &[String]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for raw in pairs {
            let (key, value) = raw.split_once('=').ok_or_else(|| {
                Error::Config(format!("override '{raw}' must have the form key=value"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("override '{raw}' has an empty key")));
            }
            let parsed: f64 = value.parse().map_err(|_| {
                Error::Config(format!("override '{raw}': '{value}' is not a number"))
            })?;
            if !parsed.is_finite() {
                return Err(Error::Config(format!("override '{raw}' must be finite")));
            }
            if map.insert(key.to_string(), parsed).is_some() {
                return Err(Error::Config(format!("duplicate override key '{key}'")));
            }
        }
        Ok(Self { map })
    }

    pub fn insert(&mut self, key: &str, value: f64) {
        self.map.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.map.get(key).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Merge another override set on top of this one (the other side wins
    /// on key collisions) — used for config-file/flag precedence.
    pub fn merge_from(&mut self, other: Overrides) {
        for (key, value) in other.map {
            self.map.insert(key, value);
        }
    }

    /// The parsed key/value pairs, in deterministic (sorted) order.
    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.map
    }

    pub(crate) fn ensure_known(&self, allowed: &[&str], context: &str) -> Result<()> {
        for key in self.map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown override '{key}' for {context}; allowed keys: {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// Build a modulus from `K` (Lipschitz) or `L`/`alpha` (Hölder) overrides,
/// if present. `K` and `L` are mutually exclusive; `alpha` requires `L`.
pub fn modulus_from_overrides(ov: &Overrides) -> Result<Option<Modulus>> {
    match (ov.get("K"), ov.get("L")) {
        (Some(_), Some(_)) => Err(Error::Config(
            "declare either K (Lipschitz) or L/alpha (Hölder), not both".into(),
        )),
        (Some(k), None) => {
            if ov.get("alpha").is_some() {
                return Err(Error::Config("alpha applies to L (Hölder), not K".into()));
            }
            Ok(Some(Modulus::lipschitz(k)?))
        }
        (None, Some(l)) => Ok(Some(Modulus::hoelder(l, ov.get("alpha").unwrap_or(0.5))?)),
        (None, None) => {
            if ov.get("alpha").is_some() {
                return Err(Error::Config("alpha requires L to be set as well".into()));
            }
            Ok(None)
        }
    }
}

/// Build a nonsmooth rate from the `psi_c` override, if present. Zero maps
/// to the exact zero rate.
pub fn psi_from_overrides(ov: &Overrides) -> Result<Option<PsiRate>> {
    match ov.get("psi_c") {
        None => Ok(None),
        Some(c) if c == 0.0 => Ok(Some(PsiRate::zero())),
        Some(c) => Ok(Some(PsiRate::constant(c)?)),
    }
}

/// Combine entry defaults with declaration overrides.
fn declared_with_defaults(
    ov: &Overrides,
    default_modulus: Modulus,
    default_psi: PsiRate,
    default_h: f64,
) -> Result<DeclaredModuli> {
    let modulus = modulus_from_overrides(ov)?.unwrap_or(default_modulus);
    let psi = psi_from_overrides(ov)?.unwrap_or(default_psi);
    let h = ov.get("h").unwrap_or(default_h);
    DeclaredModuli::new(modulus, psi, h)
}

/// A corpus entry: the problem plus human-oriented notes on what to expect.
#[derive(Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub notes: String,
    pub problem: Problem,
}

/// Static descriptor for listings.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CorpusDescriptor {
    pub name: &'static str,
    pub dim: usize,
    pub norm: &'static str,
    pub summary: &'static str,
}

pub fn corpus_list() -> Vec<CorpusDescriptor> {
    vec![
        CorpusDescriptor {
            name: "scalar_sqrt2_smooth",
            dim: 1,
            norm: "euclidean",
            summary: "x² − 2 = 0; smooth scalar benchmark (defaults sit exactly on the solvability boundary)",
        },
        CorpusDescriptor {
            name: "scalar_sqrt2_kink",
            dim: 1,
            norm: "euclidean",
            summary: "x² − 2 + c·|x − d| = 0; scalar equation with an absolute-value kink in the ball",
        },
        CorpusDescriptor {
            name: "linear_nd",
            dim: 4,
            norm: "max_abs",
            summary: "A·x = b affine system in the max norm; converges in one step",
        },
        CorpusDescriptor {
            name: "hoelder_scalar",
            dim: 1,
            norm: "euclidean",
            summary: "x + β·x·|x|^½ = γ; derivative only Hölder-½ continuous across 0",
        },
        CorpusDescriptor {
            name: "system_2d_kink",
            dim: 2,
            norm: "euclidean",
            summary: "2×2 quadratic system with componentwise kinks; iterates cross a kink",
        },
    ]
}

/// Look up an entry by name and apply overrides. Declared regularity is
/// recomputed from the final parameter values unless explicitly overridden.
pub fn corpus_get(name: &str, ov: &Overrides) -> Result<CorpusEntry> {
    match name {
        "scalar_sqrt2_smooth" => scalar_sqrt2_smooth(ov),
        "scalar_sqrt2_kink" => scalar_sqrt2_kink(ov),
        "linear_nd" => linear_nd(ov),
        "hoelder_scalar" => hoelder_scalar(ov),
        "system_2d_kink" => system_2d_kink(ov),
        other => Err(Error::Corpus(format!(
            "no corpus entry named '{other}'; available: {}",
            ENTRY_NAMES.join(", ")
        ))),
    }
}

const DECLARATION_KEYS: [&str; 5] = ["K", "L", "alpha", "h", "psi_c"];

fn with_declaration_keys(extra: &[&'static str]) -> Vec<&'static str> {
    let mut keys = extra.to_vec();
    keys.extend_from_slice(&DECLARATION_KEYS);
    keys
}

fn scalar_sqrt2_smooth(ov: &Overrides) -> Result<CorpusEntry> {
    ov.ensure_known(&with_declaration_keys(&["x0", "R"]), "scalar_sqrt2_smooth")?;
    let x0 = ov.get("x0").unwrap_or(1.0);
    let radius = ov.get("R").unwrap_or(0.5);
    if !(x0 > 0.0) {
        return Err(Error::Config(format!(
            "scalar_sqrt2_smooth needs a positive start point, got x0 = {x0}"
        )));
    }
    // After dividing by A₀ = 2·x0, the derivative is x/x0 with exact
    // Lipschitz constant 1/x0 on the whole line.
    let declared =
        declared_with_defaults(ov, Modulus::lipschitz(1.0 / x0)?, PsiRate::zero(), 0.0)?;
    let problem = Problem::new(
        "scalar_sqrt2_smooth",
        Box::new(|x: &DVector<f64>| dvector![x[0] * x[0] - 2.0]),
        Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
        Box::new(|x: &DVector<f64>| dmatrix![2.0 * x[0]]),
        dvector![x0],
        radius,
        declared,
        NormChoice::Euclidean,
    )?;
    let notes = format!(
        "Solves x² − 2 = 0 from x0 = {x0} on the ball of radius {radius}. The sharp \
         Lipschitz declaration is K = 1/x0. At the default x0 = 1 the certificate data \
         sit exactly on the solvability boundary (the required strict inequality holds \
         with equality), so certification fails closed by design; any start point with \
         2·K·a < 1 — for example x0=1.2 — certifies and converges to √2."
    );
    Ok(CorpusEntry {
        name: "scalar_sqrt2_smooth",
        summary: "x² − 2 = 0; smooth scalar benchmark",
        notes,
        problem,
    })
}

fn scalar_sqrt2_kink(ov: &Overrides) -> Result<CorpusEntry> {
    ov.ensure_known(&with_declaration_keys(&["x0", "R", "c", "d"]), "scalar_sqrt2_kink")?;
    let x0 = ov.get("x0").unwrap_or(1.3);
    let radius = ov.get("R").unwrap_or(0.25);
    let c = ov.get("c").unwrap_or(0.1);
    let d = ov.get("d").unwrap_or(1.5);
    if !(x0 > 0.0) {
        return Err(Error::Config(format!(
            "scalar_sqrt2_kink needs a positive start point, got x0 = {x0}"
        )));
    }
    if c < 0.0 {
        return Err(Error::Config(format!("kink weight c must be nonnegative, got {c}")));
    }
    let a0 = 2.0 * x0;
    let default_psi =
        if c == 0.0 { PsiRate::zero() } else { PsiRate::constant(c / a0)? };
    let declared = declared_with_defaults(ov, Modulus::lipschitz(1.0 / x0)?, default_psi, 0.0)?;
    let problem = Problem::new(
        "scalar_sqrt2_kink",
        Box::new(|x: &DVector<f64>| dvector![x[0] * x[0] - 2.0]),
        Box::new(move |x: &DVector<f64>| dvector![c * (x[0] - d).abs()]),
        Box::new(|x: &DVector<f64>| dmatrix![2.0 * x[0]]),
        dvector![x0],
        radius,
        declared,
        NormChoice::Euclidean,
    )?;
    let notes = format!(
        "Solves x² − 2 + c·|x − d| = 0 with c = {c}, d = {d}, from x0 = {x0} on the ball \
         of radius {radius}. Only the smooth part is linearized; the kink enters through \
         the declared rate ψ ≡ c/(2·x0). The default ball contains the kink at {d} and \
         the run certifies with room to spare."
    );
    Ok(CorpusEntry {
        name: "scalar_sqrt2_kink",
        summary: "x² − 2 + c·|x − d| = 0; scalar with a kink",
        notes,
        problem,
    })
}

fn linear_nd(ov: &Overrides) -> Result<CorpusEntry> {
    ov.ensure_known(&with_declaration_keys(&["dim", "R"]), "linear_nd")?;
    let dim_f = ov.get("dim").unwrap_or(4.0);
    if dim_f.fract() != 0.0 || !(1.0..=8.0).contains(&dim_f) {
        return Err(Error::Config(format!(
            "linear_nd dimension must be an integer in 1..=8, got {dim_f}"
        )));
    }
    let dim = dim_f as usize;
    let radius = ov.get("R").unwrap_or(1.0);
    let mut a_mat = DMatrix::<f64>::identity(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            a_mat[(i, j)] += 0.1 / ((i + j + 1) as f64);
        }
    }
    let x_sol = DVector::from_fn(dim, |i, _| if i % 2 == 0 { 0.3 } else { -0.3 });
    let b = &a_mat * &x_sol;
    // The preconditioned derivative is constant (the identity), so any
    // positive Lipschitz constant is a sound over-estimate.
    let declared = declared_with_defaults(ov, Modulus::lipschitz(0.05)?, PsiRate::zero(), 0.0)?;
    let a_for_f = a_mat.clone();
    let a_for_jac = a_mat;
    let problem = Problem::new(
        "linear_nd",
        Box::new(move |x: &DVector<f64>| &a_for_f * x - &b),
        Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
        Box::new(move |_: &DVector<f64>| a_for_jac.clone()),
        DVector::zeros(dim),
        radius,
        declared,
        NormChoice::MaxAbs,
    )?;
    let notes = format!(
        "Affine system A·x = b in dimension {dim}, measured in the max norm (so the \
         operator norm is the maximum absolute row sum). A is the identity plus a small \
         fixed perturbation; the solution has max-norm 0.3, reached in a single step. \
         Because the derivative is constant, the declared K = 0.05 is a deliberate \
         over-estimate — the smallest sound Lipschitz constant is 0."
    );
    Ok(CorpusEntry {
        name: "linear_nd",
        summary: "affine system in the max norm",
        notes,
        problem,
    })
}

fn hoelder_scalar(ov: &Overrides) -> Result<CorpusEntry> {
    ov.ensure_known(&with_declaration_keys(&["x0", "R", "beta", "gamma"]), "hoelder_scalar")?;
    let beta = ov.get("beta").unwrap_or(0.2);
    let gamma = ov.get("gamma").unwrap_or(0.02);
    let x0 = ov.get("x0").unwrap_or(0.1);
    let radius = ov.get("R").unwrap_or(0.12);
    if !(beta > 0.0) {
        return Err(Error::Config(format!("hoelder_scalar needs beta > 0, got {beta}")));
    }
    if !(x0 > 0.0) {
        return Err(Error::Config(format!(
            "hoelder_scalar needs a positive start point, got x0 = {x0}"
        )));
    }
    // f'(x) = 1 + (3β/2)·|x|^½ is exactly Hölder-½ with constant 3β/2, and
    // after dividing by A₀ = f'(x0) the valid declaration pairs the scaled
    // Hölder modulus with the offset h = 1/A₀ (the infimum of F' is 1/A₀,
    // attained at the derivative's singularity x = 0 inside the ball).
    let a0 = 1.0 + 1.5 * beta * x0.sqrt();
    let default_modulus = Modulus::hoelder(1.5 * beta / a0, 0.5)?;
    let default_h = 1.0 / a0;
    let declared = declared_with_defaults(ov, default_modulus, PsiRate::zero(), default_h)?;
    let problem = Problem::new(
        "hoelder_scalar",
        Box::new(move |x: &DVector<f64>| {
            dvector![x[0] + beta * x[0] * x[0].abs().sqrt() - gamma]
        }),
        Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
        Box::new(move |x: &DVector<f64>| dmatrix![1.0 + 1.5 * beta * x[0].abs().sqrt()]),
        dvector![x0],
        radius,
        declared,
        NormChoice::Euclidean,
    )?;
    let notes = format!(
        "Solves x + β·x·|x|^½ = γ with β = {beta}, γ = {gamma} from x0 = {x0} on a ball \
         of radius {radius} that contains the derivative's singularity at 0. The \
         declaration (Hölder-½ modulus with offset h = 1/f'(x0)) holds with equality \
         for pairs on the same side of 0, so the certified step and error bounds are \
         sharp along the run; the solvability slack equals γ/f'(x0) and vanishes as \
         γ → 0."
    );
    Ok(CorpusEntry {
        name: "hoelder_scalar",
        summary: "scalar problem with a Hölder-½ derivative",
        notes,
        problem,
    })
}

fn system_2d_kink(ov: &Overrides) -> Result<CorpusEntry> {
    ov.ensure_known(
        &with_declaration_keys(&["gamma", "c", "d1", "d2", "b1", "b2", "R"]),
        "system_2d_kink",
    )?;
    let gamma = ov.get("gamma").unwrap_or(0.3);
    let c = ov.get("c").unwrap_or(0.05);
    let d1 = ov.get("d1").unwrap_or(0.05);
    let d2 = ov.get("d2").unwrap_or(-0.1);
    let b1 = ov.get("b1").unwrap_or(0.12);
    let b2 = ov.get("b2").unwrap_or(-0.07);
    let radius = ov.get("R").unwrap_or(0.6);
    if !(gamma > 0.0) {
        return Err(Error::Config(format!("system_2d_kink needs gamma > 0, got {gamma}")));
    }
    if c < 0.0 {
        return Err(Error::Config(format!("kink weight c must be nonnegative, got {c}")));
    }
    // Jacobian increments satisfy ‖ΔJ‖₂ ≤ ‖ΔJ‖_F = √5·γ·‖Δv‖₂, and the
    // start Jacobian is the identity, so no rescaling enters the constant.
    let default_k = 5.0_f64.sqrt() * gamma;
    let default_psi = if c == 0.0 { PsiRate::zero() } else { PsiRate::constant(c)? };
    let declared = declared_with_defaults(ov, Modulus::lipschitz(default_k)?, default_psi, 0.0)?;
    let problem = Problem::new(
        "system_2d_kink",
        Box::new(move |v: &DVector<f64>| {
            let (x, y) = (v[0], v[1]);
            dvector![
                x + gamma * (x * x + y * y) - b1,
                y + gamma * x * y - b2
            ]
        }),
        Box::new(move |v: &DVector<f64>| {
            dvector![c * (v[0] - d1).abs(), c * (v[1] - d2).abs()]
        }),
        Box::new(move |v: &DVector<f64>| {
            let (x, y) = (v[0], v[1]);
            dmatrix![
                1.0 + 2.0 * gamma * x, 2.0 * gamma * y;
                gamma * y, 1.0 + gamma * x
            ]
        }),
        DVector::zeros(2),
        radius,
        declared,
        NormChoice::Euclidean,
    )?;
    let notes = format!(
        "Two-dimensional quadratic system with componentwise kinks: \
         f = (x + γ(x²+y²) − b₁, y + γxy − b₂), g = (c|x − d₁|, c|y − d₂|), with \
         γ = {gamma}, c = {c}, d = ({d1}, {d2}), b = ({b1}, {b2}), started at the \
         origin where the Jacobian is exactly the identity. Declared K = √5·γ comes \
         from the Frobenius bound on Jacobian increments and ψ ≡ c from the \
         componentwise kink weights. The first coordinate of the iterates crosses \
         the kink line x = d₁ on the way to the solution."
    );
    Ok(CorpusEntry {
        name: "system_2d_kink",
        summary: "2×2 quadratic system with kinks",
        notes,
        problem,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_model::precondition;

    fn ov(pairs: &[&str]) -> Overrides {
        Overrides::parse(&pairs.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn all_default_entries_build_and_precondition() {
        for name in ENTRY_NAMES {
            let entry = corpus_get(name, &Overrides::empty()).unwrap();
            assert_eq!(entry.name, name);
            let pp = precondition(&entry.problem).unwrap();
            assert!(pp.a() > 0.0, "{name}: initial residual bound must be positive");
            let cfg = pp.majorant_config().unwrap();
            assert!(cfg.chi() > 0.0);
        }
        assert_eq!(corpus_list().len(), ENTRY_NAMES.len());
    }

    #[test]
    fn unknown_entry_and_unknown_key_are_rejected() {
        let err = corpus_get("nope", &Overrides::empty()).unwrap_err();
        assert!(err.to_string().contains("scalar_sqrt2_smooth"));
        let err = corpus_get("linear_nd", &ov(&["x0=1.0"])).unwrap_err();
        assert!(err.to_string().contains("unknown override 'x0'"));
        assert!(err.to_string().contains("linear_nd"));
    }

    #[test]
    fn override_parsing_guards() {
        assert!(Overrides::parse(&["c0.1".into()]).is_err());
        assert!(Overrides::parse(&["c=abc".into()]).is_err());
        assert!(Overrides::parse(&["c=inf".into()]).is_err());
        assert!(Overrides::parse(&["c=1".into(), "c=2".into()]).is_err());
        let parsed = Overrides::parse(&["c = 0.25".into()]).unwrap();
        assert_eq!(parsed.get("c"), Some(0.25));
    }

    #[test]
    fn declaration_overrides_replace_the_defaults() {
        let entry = corpus_get("scalar_sqrt2_smooth", &ov(&["K=2.5"])).unwrap();
        let omega = &entry.problem.declared().modulus;
        assert!((omega.eval(1.0).unwrap() - 2.5).abs() < 1e-15);

        let entry = corpus_get("scalar_sqrt2_smooth", &ov(&["L=1.2", "alpha=0.4"])).unwrap();
        let omega = &entry.problem.declared().modulus;
        assert!((omega.eval(1.0).unwrap() - 1.2).abs() < 1e-15);

        assert!(corpus_get("scalar_sqrt2_smooth", &ov(&["K=1.0", "L=1.0"])).is_err());
        assert!(corpus_get("scalar_sqrt2_smooth", &ov(&["alpha=0.5"])).is_err());
        assert!(corpus_get("scalar_sqrt2_smooth", &ov(&["K=1.0", "alpha=0.5"])).is_err());

        let entry = corpus_get("scalar_sqrt2_kink", &ov(&["psi_c=0"])).unwrap();
        assert!(entry.problem.declared().psi.is_zero());
    }

    #[test]
    fn smooth_defaults_sit_on_the_boundary_and_shifted_start_certifies() {
        let entry = corpus_get("scalar_sqrt2_smooth", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let cert = pp.majorant_config().unwrap().certificate(entry.problem.radius()).unwrap();
        assert!(!cert.certified(), "defaults are exactly critical and must fail closed");
        assert!(cert.solvability_slack <= 0.0);

        let entry = corpus_get("scalar_sqrt2_smooth", &ov(&["x0=1.2"])).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        // a = |x0² − 2|/(2 x0), K = 1/x0 ⇒ 2Ka = |x0² − 2|/x0² < 1.
        assert!((pp.a() - 0.56 / 2.4).abs() < 1e-12);
        let cert = pp.majorant_config().unwrap().certificate(entry.problem.radius()).unwrap();
        assert!(cert.certified());
        let t_star = cert.t_star.unwrap();
        // Distance from 1.2 to √2 must be inside the certified radius.
        let distance = 2.0_f64.sqrt() - 1.2;
        assert!(distance <= t_star && t_star <= entry.problem.radius());
    }

    #[test]
    fn kink_defaults_certify_and_match_the_quadratic_closed_form() {
        let entry = corpus_get("scalar_sqrt2_kink", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        assert!((pp.a() - 0.29 / 2.6).abs() < 1e-12);
        let cfg = pp.majorant_config().unwrap();
        let cert = cfg.certificate(entry.problem.radius()).unwrap();
        assert!(cert.certified());
        // W(t) = a − (1 − ψ̃)t + K t²/2 with K = 1/1.3, ψ̃ = 0.1/2.6.
        let (a, k, psi) = (pp.a(), 1.0 / 1.3, 0.1 / 2.6);
        let p = 1.0 - psi;
        let oracle = (p - (p * p - 2.0 * k * a).sqrt()) / k;
        let t_star = cert.t_star.unwrap();
        assert!((t_star - oracle).abs() <= 1e-10 * oracle, "{t_star} vs {oracle}");
        // The true solution (0.1 + √7.41)/2 of x² − 0.1x − 1.85 lies within
        // t* of the start point.
        let root = (0.1 + 7.41_f64.sqrt()) / 2.0;
        assert!((root - 1.3).abs() <= t_star);
    }

    #[test]
    fn linear_entry_is_certified_and_solved_in_one_step() {
        let entry = corpus_get("linear_nd", &Overrides::empty()).unwrap();
        assert_eq!(entry.problem.dim(), 4);
        assert_eq!(entry.problem.norm(), NormChoice::MaxAbs);
        let pp = precondition(&entry.problem).unwrap();
        assert!((pp.a() - 0.3).abs() < 1e-12);
        let cert = pp.majorant_config().unwrap().certificate(1.0).unwrap();
        assert!(cert.certified());
        let oracle = (1.0 - (1.0 - 2.0 * 0.05 * pp.a()).sqrt()) / 0.05;
        assert!((cert.t_star.unwrap() - oracle).abs() < 1e-10);

        let entry = corpus_get("linear_nd", &ov(&["dim=6"])).unwrap();
        assert_eq!(entry.problem.dim(), 6);
        assert!(corpus_get("linear_nd", &ov(&["dim=9"])).is_err());
        assert!(corpus_get("linear_nd", &ov(&["dim=2.5"])).is_err());
    }

    #[test]
    fn hoelder_entry_has_chi_equal_to_the_start_point() {
        let entry = corpus_get("hoelder_scalar", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let cfg = pp.majorant_config().unwrap();
        // χ = ω⁻¹(1 − h) collapses to exactly x0 for this declaration.
        assert!((cfg.chi() - 0.1).abs() < 1e-13);
        let a0 = 1.0 + 0.3 * 0.1_f64.sqrt();
        assert!((pp.a() - (0.08 + 0.02 * 0.1_f64.sqrt()) / a0).abs() < 1e-12);
        let cert = cfg.certificate(entry.problem.radius()).unwrap();
        assert!(cert.certified());
        // Solvability slack is γ/A₀ up to the residual inflation.
        assert!((cert.solvability_slack - 0.02 / a0).abs() < 1e-10);

        // Independent root: bisect x + 0.2·x^{3/2} − 0.02 on [0, 0.1].
        let f = |x: f64| x + 0.2 * x * x.abs().sqrt() - 0.02;
        let (mut lo, mut hi) = (0.0_f64, 0.1_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let t_star = cert.t_star.unwrap();
        assert!((t_star - (0.1 - root)).abs() < 1e-9, "t* should reach exactly to the root");
        assert!(t_star <= entry.problem.radius());

        // γ = 0 closes the solvability gap entirely.
        let entry = corpus_get("hoelder_scalar", &ov(&["gamma=0"])).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        let cert = pp.majorant_config().unwrap().certificate(0.12).unwrap();
        assert!(!cert.certified());
    }

    #[test]
    fn system_2d_certifies_with_the_frobenius_declaration() {
        let entry = corpus_get("system_2d_kink", &Overrides::empty()).unwrap();
        let pp = precondition(&entry.problem).unwrap();
        // Residual at the origin: (−b₁ + c·d₁-distance, −b₂ + c·d₂-distance).
        let expected_a = (0.1175_f64 * 0.1175 + 0.075 * 0.075).sqrt();
        assert!((pp.a() - expected_a).abs() < 1e-12);
        let cfg = pp.majorant_config().unwrap();
        let cert = cfg.certificate(entry.problem.radius()).unwrap();
        assert!(cert.certified());
        // W(t) = a − (1 − c)t + K t²/2 with K = √5·γ.
        let (a, k, c) = (pp.a(), 5.0_f64.sqrt() * 0.3, 0.05);
        let p = 1.0 - c;
        let oracle = (p - (p * p - 2.0 * k * a).sqrt()) / k;
        assert!((cert.t_star.unwrap() - oracle).abs() <= 1e-10);
    }
}
