//! Finite-dimensional operator models.
//!
//! A [`Problem`] packages the equation `f(x) + g(x) = 0` on a closed ball:
//! the smooth part `f` with its Jacobian, the nonsmooth part `g`, the start
//! point and radius, the norm in which every bound is measured, and the
//! *declared* regularity data (modulus `ω`, offset `h`, rate `ψ`) that the
//! majorant engine consumes.
//!
//! [`precondition`] normalizes the equation at the start point: with
//! `A₀ = f'(x₀)` (factored once by LU), the solver and all bounds work with
//! `F = A₀⁻¹f` and `G = A₀⁻¹g`, so `F'(x₀) = I` and the initial residual
//! bound `a = ‖F(x₀) + G(x₀)‖` seeds the majorant directly. Declared moduli
//! always refer to this preconditioned operator.

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::majorant::MajorantConfig;
use crate::moduli::{Modulus, PsiRate};
use crate::{Error, Result};

/// Relative pivot threshold below which an LU factorization is reported
/// singular instead of silently amplifying noise.
const PIVOT_REL_TOL: f64 = 1e-14;

/// Tolerance for the preconditioning self-check `‖F'(x₀) − I‖ ≤ 1e-12`.
const PRECONDITION_IDENTITY_TOL: f64 = 1e-12;

/// Relative inflation applied to the computed initial residual norm so the
/// stored `a` is a true upper bound despite rounding.
const RESIDUAL_INFLATION: f64 = 1e-12;

/// The norm every bound of a problem is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    /// Euclidean vector norm with the spectral operator norm.
    Euclidean,
    /// Max-absolute-value vector norm with the max-row-sum operator norm.
    MaxAbs,
}

impl NormChoice {
    pub fn vector_norm(&self, v: &DVector<f64>) -> f64 {
        match self {
            NormChoice::Euclidean => v.norm(),
            NormChoice::MaxAbs => v.amax(),
        }
    }

    /// The operator norm induced by the vector norm: largest singular value
    /// for Euclidean, maximum absolute row sum for MaxAbs.
    pub fn operator_norm(&self, m: &DMatrix<f64>) -> f64 {
        match self {
            NormChoice::Euclidean => {
                if m.iter().all(|v| *v == 0.0) {
                    0.0
                } else {
                    m.clone().singular_values().max()
                }
            }
            NormChoice::MaxAbs => m
                .row_iter()
                .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            NormChoice::Euclidean => "euclidean",
            NormChoice::MaxAbs => "max_abs",
        }
    }
}

/// Declared regularity of a preconditioned problem: modulus `ω` with offset
/// `h` for the smooth part, growth rate `ψ` for the nonsmooth part.
#[derive(Debug, Clone)]
pub struct DeclaredModuli {
    pub modulus: Modulus,
    pub psi: PsiRate,
    pub h: f64,
}

impl DeclaredModuli {
    pub fn new(modulus: Modulus, psi: PsiRate, h: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&h) {
            return Err(Error::Invalid(format!(
                "declared offset h must lie in [0, 1), got {h}"
            )));
        }
        Ok(Self { modulus, psi, h })
    }
}

type VectorFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64>>;
type MatrixFn = Box<dyn Fn(&DVector<f64>) -> DMatrix<f64>>;

/// An operator equation `f(x) + g(x) = 0` on the closed ball
/// `‖x − x₀‖ ≤ radius`, with declared regularity data.
pub struct Problem {
    name: String,
    dim: usize,
    f: VectorFn,
    g: VectorFn,
    jacobian: MatrixFn,
    jacobian_exact: bool,
    x0: DVector<f64>,
    radius: f64,
    declared: DeclaredModuli,
    norm: NormChoice,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("x0", &self.x0)
            .field("radius", &self.radius)
            .field("norm", &self.norm)
            .field("declared", &self.declared)
            .field("jacobian_exact", &self.jacobian_exact)
            .finish_non_exhaustive()
    }
}

impl Problem {
    /// Build a problem with an analytically supplied Jacobian.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        f: VectorFn,
        g: VectorFn,
        jacobian: MatrixFn,
        x0: DVector<f64>,
        radius: f64,
        declared: DeclaredModuli,
        norm: NormChoice,
    ) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::Invalid("start point must have dimension ≥ 1".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Invalid(format!(
                "ball radius must be finite and positive, got {radius}"
            )));
        }
        let dim = x0.len();
        Ok(Self {
            name: name.into(),
            dim,
            f,
            g,
            jacobian,
            jacobian_exact: true,
            x0,
            radius,
            declared,
            norm,
        })
    }

    /// Build a problem whose Jacobian is approximated by central
    /// differences with step `1e-6·(1 + ‖x‖∞)` per coordinate.
    pub fn with_fd_jacobian(
        name: impl Into<String>,
        f: VectorFn,
        g: VectorFn,
        x0: DVector<f64>,
        radius: f64,
        declared: DeclaredModuli,
        norm: NormChoice,
    ) -> Result<Self> {
        let f_for_jac: std::rc::Rc<VectorFn> = std::rc::Rc::new(f);
        let f_outer = std::rc::Rc::clone(&f_for_jac);
        let jacobian: MatrixFn = Box::new(move |x: &DVector<f64>| {
            let n = x.len();
            let step = 1e-6 * (1.0 + x.amax());
            let mut cols = Vec::with_capacity(n);
            for j in 0..n {
                let mut hi = x.clone();
                let mut lo = x.clone();
                hi[j] += step;
                lo[j] -= step;
                cols.push(((f_for_jac)(&hi) - (f_for_jac)(&lo)) / (2.0 * step));
            }
            DMatrix::from_columns(&cols)
        });
        let f: VectorFn = Box::new(move |x| (f_outer)(x));
        let mut problem = Self::new(name, f, g, jacobian, x0, radius, declared, norm)?;
        problem.jacobian_exact = false;
        Ok(problem)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn norm(&self) -> NormChoice {
        self.norm
    }

    pub fn declared(&self) -> &DeclaredModuli {
        &self.declared
    }

    /// Replace the declared regularity data (used to test declarations that
    /// differ from the built-in ones).
    pub fn set_declared(&mut self, declared: DeclaredModuli) {
        self.declared = declared;
    }

    pub fn jacobian_is_exact(&self) -> bool {
        self.jacobian_exact
    }

    pub fn f_eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }

    pub fn g_eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.g)(x)
    }

    pub fn jacobian_eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.jacobian)(x)
    }

    /// Whether `x` lies in the closed problem ball.
    pub fn in_domain(&self, x: &DVector<f64>) -> bool {
        self.norm.vector_norm(&(x - &self.x0)) <= self.radius
    }

    pub fn distance_from_start(&self, x: &DVector<f64>) -> f64 {
        self.norm.vector_norm(&(x - &self.x0))
    }
}

/// Factor a matrix by LU with partial pivoting, rejecting factorizations
/// whose smallest pivot falls below `1e-14` times the max-row-sum norm.
pub fn lu_factor(m: DMatrix<f64>) -> Result<LU<f64, Dyn, Dyn>> {
    let scale = m
        .row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lu = LU::new(m);
    let u = lu.u();
    let min_pivot = (0..u.nrows().min(u.ncols()))
        .map(|i| u[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    if !(min_pivot > PIVOT_REL_TOL * scale) || scale == 0.0 {
        return Err(Error::Singular(format!(
            "LU pivot {min_pivot:.3e} below threshold {:.3e}",
            PIVOT_REL_TOL * scale
        )));
    }
    Ok(lu)
}

/// Solve `M·s = rhs` through a fresh pivot-checked LU factorization.
pub fn lu_solve(m: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = lu_factor(m)?;
    lu.solve(rhs)
        .ok_or_else(|| Error::Singular("LU back-substitution failed".into()))
}

/// A problem normalized at its start point: `A₀ = f'(x₀)` is factored and
/// every evaluation is reported for `F = A₀⁻¹f`, `G = A₀⁻¹g`.
pub struct Preconditioned<'p> {
    problem: &'p Problem,
    a0: LU<f64, Dyn, Dyn>,
    a: f64,
}

/// Normalize `problem` at its start point. Fails with [`Error::Singular`]
/// when `f'(x₀)` cannot be factored reliably and with
/// [`Error::Precondition`] when the normalization self-check
/// `‖A₀⁻¹f'(x₀) − I‖ ≤ 1e-12` does not hold.
pub fn precondition(problem: &Problem) -> Result<Preconditioned<'_>> {
    let j0 = problem.jacobian_eval(problem.x0());
    if j0.nrows() != problem.dim() || j0.ncols() != problem.dim() {
        return Err(Error::Invalid(format!(
            "Jacobian must be {0}×{0}, got {1}×{2}",
            problem.dim(),
            j0.nrows(),
            j0.ncols()
        )));
    }
    let a0 = lu_factor(j0.clone())?;
    let normalized = a0
        .solve(&j0)
        .ok_or_else(|| Error::Singular("could not apply A₀⁻¹ to f'(x₀)".into()))?;
    let deviation = problem
        .norm()
        .operator_norm(&(&normalized - DMatrix::<f64>::identity(problem.dim(), problem.dim())));
    if deviation > PRECONDITION_IDENTITY_TOL {
        return Err(Error::Precondition(format!(
            "normalization self-check failed: ‖A₀⁻¹f'(x₀) − I‖ = {deviation:.3e}"
        )));
    }
    let raw_residual = problem.f_eval(problem.x0()) + problem.g_eval(problem.x0());
    let residual = a0
        .solve(&raw_residual)
        .ok_or_else(|| Error::Singular("could not apply A₀⁻¹ to the initial residual".into()))?;
    let mut a = problem.norm().vector_norm(&residual) * (1.0 + RESIDUAL_INFLATION);
    if a == 0.0 {
        // The start point already solves the equation; keep `a` positive so
        // the majorant is well-posed (any positive value is a valid bound).
        a = f64::MIN_POSITIVE;
    }
    Ok(Preconditioned { problem, a0, a })
}

impl<'p> Preconditioned<'p> {
    pub fn problem(&self) -> &'p Problem {
        self.problem
    }

    /// Upper bound on `‖F(x₀) + G(x₀)‖`, inflated by one part in 10¹² to
    /// absorb rounding in the norm computation.
    pub fn a(&self) -> f64 {
        self.a
    }

    fn apply_inverse_vec(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.a0
            .solve(v)
            .ok_or_else(|| Error::Singular("could not apply A₀⁻¹".into()))
    }

    fn apply_inverse_mat(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.a0
            .solve(m)
            .ok_or_else(|| Error::Singular("could not apply A₀⁻¹".into()))
    }

    /// `F(x) = A₀⁻¹ f(x)`.
    pub fn f_tilde(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_inverse_vec(&self.problem.f_eval(x))
    }

    /// `G(x) = A₀⁻¹ g(x)`.
    pub fn g_tilde(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_inverse_vec(&self.problem.g_eval(x))
    }

    /// Full preconditioned residual `F(x) + G(x)`.
    pub fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_inverse_vec(&(self.problem.f_eval(x) + self.problem.g_eval(x)))
    }

    /// `F'(x) = A₀⁻¹ f'(x)`.
    pub fn jacobian_tilde(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.apply_inverse_mat(&self.problem.jacobian_eval(x))
    }

    /// Norm of a vector in the problem's norm.
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.problem.norm().vector_norm(v)
    }

    /// The majorant configuration induced by the declared regularity data
    /// and the measured initial residual bound.
    pub fn majorant_config(&self) -> Result<MajorantConfig> {
        let declared = self.problem.declared();
        MajorantConfig::new(self.a, declared.h, declared.modulus.clone(), declared.psi.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn scalar_problem(x0: f64, radius: f64) -> Problem {
        let declared = DeclaredModuli::new(
            Modulus::lipschitz(1.0 / x0).unwrap(),
            PsiRate::zero(),
            0.0,
        )
        .unwrap();
        Problem::new(
            "square_minus_two",
            Box::new(|x: &DVector<f64>| dvector![x[0] * x[0] - 2.0]),
            Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
            Box::new(|x: &DVector<f64>| dmatrix![2.0 * x[0]]),
            dvector![x0],
            radius,
            declared,
            NormChoice::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn euclidean_operator_norm_matches_closed_form_eigenvalues() {
        let m = dmatrix![1.0, 2.0; 3.0, 4.0];
        // Largest singular value from the eigenvalues of MᵀM.
        let oracle = ((30.0 + 884.0_f64.sqrt()) / 2.0).sqrt();
        let got = NormChoice::Euclidean.operator_norm(&m);
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");

        let diag = dmatrix![3.0, 0.0; 0.0, -5.0];
        assert!((NormChoice::Euclidean.operator_norm(&diag) - 5.0).abs() < 1e-12);
        assert_eq!(NormChoice::Euclidean.operator_norm(&DMatrix::zeros(2, 2)), 0.0);
    }

    #[test]
    fn max_abs_norms() {
        let m = dmatrix![0.0, 1.0; 0.0, 0.0];
        assert_eq!(NormChoice::MaxAbs.operator_norm(&m), 1.0);
        let m = dmatrix![1.0, 2.0; 3.0, 4.0];
        assert_eq!(NormChoice::MaxAbs.operator_norm(&m), 7.0);
        assert_eq!(NormChoice::MaxAbs.vector_norm(&dvector![1.0, -3.0, 2.0]), 3.0);
        assert!((NormChoice::Euclidean.vector_norm(&dvector![3.0, 4.0]) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn lu_solves_and_rejects_singular_matrices() {
        let m = dmatrix![2.0, 0.0; 0.0, 4.0];
        let x = lu_solve(m, &dvector![2.0, 4.0]).unwrap();
        assert!((x - dvector![1.0, 1.0]).amax() < 1e-15);

        let singular = dmatrix![1.0, 1.0; 1.0, 1.0];
        assert!(matches!(lu_solve(singular, &dvector![1.0, 1.0]), Err(Error::Singular(_))));
        assert!(matches!(
            lu_factor(DMatrix::zeros(2, 2)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn preconditioning_normalizes_the_scalar_problem() {
        let problem = scalar_problem(1.0, 0.5);
        let pp = precondition(&problem).unwrap();
        // A₀ = 2, residual = (1 − 2)/2 = −0.5.
        assert!((pp.a() - 0.5).abs() < 1e-12);
        assert!(pp.a() >= 0.5, "stored bound must not round below the true norm");
        let r = pp.residual(&dvector![1.0]).unwrap();
        assert!((r[0] + 0.5).abs() < 1e-15);
        let j = pp.jacobian_tilde(&dvector![1.5]).unwrap();
        assert!((j[(0, 0)] - 1.5).abs() < 1e-15);
        let cfg = pp.majorant_config().unwrap();
        assert_eq!(cfg.h(), 0.0);
        assert!((cfg.chi() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preconditioning_rejects_a_singular_start_jacobian() {
        // f(x) = x² − 2 started at x₀ = 0, where f'(0) = 0.
        let declared =
            DeclaredModuli::new(Modulus::lipschitz(1.0).unwrap(), PsiRate::zero(), 0.0).unwrap();
        let problem = Problem::new(
            "square_minus_two_flat_start",
            Box::new(|x: &DVector<f64>| dvector![x[0] * x[0] - 2.0]),
            Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
            Box::new(|x: &DVector<f64>| dmatrix![2.0 * x[0]]),
            dvector![0.0],
            0.5,
            declared,
            NormChoice::Euclidean,
        )
        .unwrap();
        assert!(matches!(precondition(&problem), Err(Error::Singular(_))));
    }

    #[test]
    fn exact_start_solution_keeps_the_bound_positive() {
        let declared =
            DeclaredModuli::new(Modulus::lipschitz(1.0).unwrap(), PsiRate::zero(), 0.0).unwrap();
        let problem = Problem::new(
            "identity_root",
            Box::new(|x: &DVector<f64>| x.clone()),
            Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
            Box::new(|x: &DVector<f64>| DMatrix::identity(x.len(), x.len())),
            dvector![0.0],
            1.0,
            declared,
            NormChoice::Euclidean,
        )
        .unwrap();
        let pp = precondition(&problem).unwrap();
        assert!(pp.a() > 0.0);
        assert!(pp.a() < 1e-300);
    }

    #[test]
    fn domain_membership_uses_the_problem_norm() {
        let problem = scalar_problem(1.0, 0.5);
        assert!(problem.in_domain(&dvector![1.5]));
        assert!(problem.in_domain(&dvector![0.5]));
        assert!(!problem.in_domain(&dvector![1.5000001]));
        assert!((problem.distance_from_start(&dvector![1.2]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn finite_difference_jacobian_tracks_the_analytic_one() {
        let declared =
            DeclaredModuli::new(Modulus::lipschitz(1.0).unwrap(), PsiRate::zero(), 0.0).unwrap();
        let f = |x: &DVector<f64>| {
            dvector![
                x[0] + 0.3 * (x[0] * x[0] + x[1] * x[1]),
                x[1] + 0.3 * x[0] * x[1]
            ]
        };
        let problem = Problem::with_fd_jacobian(
            "fd_quadratic",
            Box::new(f),
            Box::new(|x: &DVector<f64>| DVector::zeros(x.len())),
            dvector![0.1, -0.2],
            1.0,
            declared,
            NormChoice::Euclidean,
        )
        .unwrap();
        assert!(!problem.jacobian_is_exact());
        let x = dvector![0.1, -0.2];
        let fd = problem.jacobian_eval(&x);
        let exact = dmatrix![
            1.0 + 0.6 * x[0], 0.6 * x[1];
            0.3 * x[1], 1.0 + 0.3 * x[0]
        ];
        assert!((fd - exact).amax() < 1e-8);
    }
}
