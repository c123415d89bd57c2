//! Penalized least-squares smoothing splines, with and without the zero-integral constraint.
//!
//! The functional minimized is
//! `J_l(b) = bᵀ N_kl b + α (y − C b)ᵀ W (y − C b)`,
//! whose stationarity condition is the symmetric system
//! `[α⁻¹ N_kl + Cᵀ W C] b = Cᵀ W y`. Singular systems are resolved with the minimum-norm
//! generalized inverse.
//!
//! For the constrained fit, coefficients are written as `b = D K c̄`, where `c̄` are the
//! coefficients of an antiderivative with `c_{-k-1} = c_g`; every such `b` integrates to zero
//! over `[a, b]`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{solve_min_norm, LinearSystem, SolveOptions, SolveReport};
use crate::spline::{Spline, SplineSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingProblem {
    space: SplineSpace,
    xs: Vec<f64>,
    ys: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
    order: usize,
}

impl SmoothingProblem {
    pub fn new(
        space: SplineSpace,
        xs: Vec<f64>,
        ys: Vec<f64>,
        weights: Vec<f64>,
        alpha: f64,
        order: usize,
    ) -> Result<Self> {
        let n = xs.len();
        if ys.len() != n || weights.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} abscissas, {} ordinates and {} weights",
                n,
                ys.len(),
                weights.len()
            )));
        }
        if n < space.interior_count() + 1 {
            return Err(Error::InvalidInput(format!(
                "{n} data points are too few for {} interior knots (need at least {})",
                space.interior_count(),
                space.interior_count() + 1
            )));
        }
        let k = space.degree();
        if order < 1 || order + 1 > k {
            return Err(Error::InvalidOrder { order, min: 1, max: k.saturating_sub(1) });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("weights must be non-negative, got {w}")));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidInput("ordinates must be finite".into()));
        }
        if let Some(&x) = xs.iter().find(|&&x| !(x >= space.a() && x <= space.b())) {
            return Err(Error::OutOfDomain { x, a: space.a(), b: space.b() });
        }
        Ok(Self { space, xs, ys, weights, alpha, order })
    }

    pub fn with_unit_weights(
        space: SplineSpace,
        xs: Vec<f64>,
        ys: Vec<f64>,
        alpha: f64,
        order: usize,
    ) -> Result<Self> {
        let weights = vec![1.0; xs.len()];
        Self::new(space, xs, ys, weights, alpha, order)
    }

    pub fn space(&self) -> &SplineSpace {
        &self.space
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn collocation(&self) -> DMatrix<f64> {
        self.space
            .collocation_matrix(self.space.degree(), &self.xs)
            .expect("abscissas validated on construction")
    }

    pub fn penalty(&self) -> DMatrix<f64> {
        self.space
            .penalty_matrix(self.order)
            .expect("order validated on construction")
    }

    fn weighted(&self, c: &DMatrix<f64>) -> DMatrix<f64> {
        let mut wc = c.clone();
        for (mut row, w) in wc.row_iter_mut().zip(self.weights.iter()) {
            row *= *w;
        }
        wc
    }
}

/// The two parts of `J_l(b)`: roughness `bᵀ N b` and the weighted residual sum of squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms {
    pub penalty: f64,
    pub residual: f64,
}

impl ObjectiveTerms {
    pub fn total(&self, alpha: f64) -> f64 {
        self.penalty + alpha * self.residual
    }
}

pub fn objective_terms(problem: &SmoothingProblem, b: &DVector<f64>) -> Result<ObjectiveTerms> {
    if b.len() != problem.space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} coefficients, got {}",
            problem.space.dim(),
            b.len()
        )));
    }
    let n = problem.penalty();
    let c = problem.collocation();
    let penalty = b.dot(&(n * b));
    let fitted = c * b;
    let residual = problem
        .ys
        .iter()
        .zip(fitted.iter())
        .zip(problem.weights.iter())
        .map(|((y, f), w)| w * (y - f) * (y - f))
        .sum();
    Ok(ObjectiveTerms { penalty, residual })
}

/// `J_l(b)`.
pub fn objective(problem: &SmoothingProblem, b: &DVector<f64>) -> Result<f64> {
    Ok(objective_terms(problem, b)?.total(problem.alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSolution {
    pub spline: Spline,
    pub objective: f64,
    pub terms: ObjectiveTerms,
    pub report: SolveReport,
    pub constrained: bool,
    /// Antiderivative coefficients `c_{-k}, …, c_g` of the constrained solution.
    pub cbar: Option<DVector<f64>>,
    /// Every weight was zero, so only the penalty was minimized.
    pub all_weights_zero: bool,
}

/// Minimize `J_l` over the whole spline space.
pub fn fit_unconstrained(
    problem: &SmoothingProblem,
    opts: &SolveOptions,
) -> Result<SmoothingSolution> {
    let c = problem.collocation();
    let n = problem.penalty();
    let wc = problem.weighted(&c);
    let y = DVector::from_column_slice(&problem.ys);
    let matrix = n / problem.alpha + c.transpose() * &wc;
    let rhs = wc.transpose() * y;
    let (b, report) = solve_min_norm(&LinearSystem::new(matrix, rhs)?, opts)?;
    finish(problem, b, report, None)
}

/// `D = (k+1) diag(1/(λ_{i+k+1} − λ_i))` and the cyclic difference matrix `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintOperators {
    pub d: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl ConstraintOperators {
    pub fn dk(&self) -> DMatrix<f64> {
        &self.d * &self.k
    }
}

pub fn build_constraint_operators(space: &SplineSpace) -> ConstraintOperators {
    let deg = space.degree();
    let dim = space.dim();
    let scale = (deg + 1) as f64;
    let diag = DVector::from_iterator(
        dim,
        space.support_lengths(deg).into_iter().map(|h| scale / h),
    );
    let mut k = DMatrix::identity(dim, dim);
    for i in 1..dim {
        k[(i, i - 1)] = -1.0;
    }
    k[(0, dim - 1)] -= 1.0;
    ConstraintOperators { d: DMatrix::from_diagonal(&diag), k }
}

/// Minimize `J_l` over splines with zero integral on `[a, b]`.
pub fn fit_zero_integral(
    problem: &SmoothingProblem,
    opts: &SolveOptions,
) -> Result<SmoothingSolution> {
    let ops = build_constraint_operators(&problem.space);
    let dk = ops.dk();
    let c = problem.collocation();
    let n = problem.penalty();
    let y = DVector::from_column_slice(&problem.ys);
    let cdk = &c * &dk;
    let w_cdk = problem.weighted(&cdk);
    let w_y = DVector::from_iterator(
        y.len(),
        y.iter().zip(problem.weights.iter()).map(|(v, w)| v * w),
    );
    let matrix = dk.transpose() * n * &dk / problem.alpha + cdk.transpose() * w_cdk;
    let rhs = ops.k.transpose() * ops.d.transpose() * c.transpose() * w_y;
    let (cbar, report) = solve_min_norm(&LinearSystem::new(matrix, rhs)?, opts)?;
    let b = &dk * &cbar;
    finish(problem, b, report, Some(cbar))
}

fn finish(
    problem: &SmoothingProblem,
    b: DVector<f64>,
    report: SolveReport,
    cbar: Option<DVector<f64>>,
) -> Result<SmoothingSolution> {
    let terms = objective_terms(problem, &b)?;
    let spline = Spline::new(problem.space.clone(), b)?;
    Ok(SmoothingSolution {
        spline,
        objective: terms.total(problem.alpha),
        terms,
        report,
        constrained: cbar.is_some(),
        cbar,
        all_weights_zero: problem.weights.iter().all(|w| *w == 0.0),
    })
}

/// Coefficients `c_{-k-1}, …, c_g` of the degree-`(k+1)` antiderivative anchored at
/// `c_{-k-1} = 0`; `c_g` equals the integral of the spline.
pub fn antiderivative_coeffs(spline: &Spline) -> DVector<f64> {
    let d = spline.degree();
    let scale = (d + 1) as f64;
    let lengths = spline.space().support_lengths(d);
    let mut c = DVector::zeros(lengths.len() + 1);
    for (i, (h, b)) in lengths.iter().zip(spline.coeffs().iter()).enumerate() {
        c[i + 1] = c[i] + b * h / scale;
    }
    c
}

/// `Σ_i b_i (λ_{i+k+1} − λ_i)`, which vanishes exactly for zero-integral splines.
pub fn weighted_coefficient_sum(spline: &Spline) -> f64 {
    spline
        .space()
        .support_lengths(spline.degree())
        .iter()
        .zip(spline.coeffs().iter())
        .map(|(h, b)| h * b)
        .sum()
}

/// The same sum divided by `Σ_i |b_i| (λ_{i+k+1} − λ_i)` (zero for the zero spline).
pub fn weighted_coefficient_sum_relative(spline: &Spline) -> f64 {
    let scale: f64 = spline
        .space()
        .support_lengths(spline.degree())
        .iter()
        .zip(spline.coeffs().iter())
        .map(|(h, b)| h * b.abs())
        .sum();
    if scale == 0.0 {
        0.0
    } else {
        weighted_coefficient_sum(spline) / scale
    }
}

/// Accepted magnitude of the integral of a zero-integral fit:
/// `1e-8 · (b − a) · max(1, max|b_i|)`.
pub fn zero_integral_bound(spline: &Spline) -> f64 {
    let space = spline.space();
    1e-8 * (space.b() - space.a()) * spline.coeffs().amax().max(1.0)
}
