#![allow(dead_code)]

use clrspline_core::quadrature::SpanQuadrature;
use clrspline_core::smoothing::SmoothingProblem;
use clrspline_core::spline::{KnotConfig, Spline, SplineSpace};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random clamped space on `[a, a + len]` with well separated interior knots.
pub fn random_space(rng: &mut ChaCha8Rng, degree: usize, interior: usize) -> SplineSpace {
    let a = rng.random_range(-2.0..2.0);
    let len = rng.random_range(1.0..4.0);
    // gaps drawn in [0.5, 1.5] then rescaled keep the spacing ratio below 3
    let gaps: Vec<f64> = (0..=interior).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = gaps.iter().sum();
    let mut knots = Vec::with_capacity(interior);
    let mut acc = a;
    for g in &gaps[..interior] {
        acc += g / total * len;
        knots.push(acc);
    }
    SplineSpace::new(KnotConfig::new(a, a + len, knots, degree).unwrap())
}

pub fn random_points(rng: &mut ChaCha8Rng, space: &SplineSpace, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random_range(space.a()..=space.b())).collect();
    xs.sort_by(f64::total_cmp);
    xs
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// de Boor's algorithm on the clamped knot vector, written independently of the crate's
/// basis evaluation.
pub fn de_boor(space: &SplineSpace, degree: usize, coeffs: &[f64], x: f64) -> f64 {
    let k = space.degree();
    let ext = space.extended_knots().as_slice();
    let t = &ext[k - degree..ext.len() - (k - degree)];
    let p = degree;
    let n = coeffs.len();
    let mut span = p;
    while span < n - 1 && t[span + 1] <= x {
        span += 1;
    }
    let mut d: Vec<f64> = (0..=p).map(|j| coeffs[j + span - p]).collect();
    for r in 1..=p {
        for j in (r..=p).rev() {
            let left = t[j + span - p];
            let right = t[j + 1 + span - r];
            let alpha = if right > left { (x - left) / (right - left) } else { 0.0 };
            d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
        }
    }
    d[p]
}

pub fn quadrature(space: &SplineSpace, nodes: usize, f: impl FnMut(f64) -> f64) -> f64 {
    SpanQuadrature::new(nodes).integrate(space.breakpoints(), f)
}

/// Dense quadratic `J(b) = bᵀ H b − 2 gᵀ b + const` of the smoothing functional.
pub struct Quadratic {
    pub h: DMatrix<f64>,
    pub g: DVector<f64>,
}

pub fn quadratic(problem: &SmoothingProblem) -> Quadratic {
    let c = problem.collocation();
    let w = DMatrix::from_diagonal(&DVector::from_column_slice(problem.weights()));
    let y = DVector::from_column_slice(problem.ys());
    let alpha = problem.alpha();
    Quadratic {
        h: problem.penalty() + (c.transpose() * &w * &c) * alpha,
        g: c.transpose() * &w * y * alpha,
    }
}

pub struct OracleFit {
    pub b: DVector<f64>,
    pub regular: bool,
    /// Spectral condition number of the (reduced) quadratic form.
    pub condition: f64,
}

/// Solves with Cholesky when `h` is numerically regular, otherwise with the eigenvalue
/// pseudoinverse of the symmetric matrix.
fn pinv_solve(h: &DMatrix<f64>, g: &DVector<f64>) -> (DVector<f64>, bool, f64) {
    let eig = h.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.amax();
    let condition = lmax / eig.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let regular = eig.eigenvalues.iter().all(|l| *l > 1e-10 * lmax);
    if regular {
        if let Some(chol) = h.clone().cholesky() {
            return (chol.solve(g), true, condition);
        }
    }
    let inv = eig.eigenvalues.map(|l| if l.abs() > 1e-10 * lmax { 1.0 / l } else { 0.0 });
    let q = &eig.eigenvectors;
    (q * DMatrix::from_diagonal(&inv) * q.transpose() * g, regular, condition)
}

/// Unconstrained minimizer by the pseudoinverse of the full quadratic form.
pub fn oracle_unconstrained(problem: &SmoothingProblem) -> OracleFit {
    let q = quadratic(problem);
    let (b, regular, condition) = pinv_solve(&q.h, &q.g);
    OracleFit { b, regular, condition }
}

/// Zero-integral minimizer: eliminate the last coefficient with
/// `Σ b_i (λ_{i+k+1} − λ_i) = 0` and minimize the reduced quadratic.
pub fn oracle_zero_integral(problem: &SmoothingProblem) -> OracleFit {
    let space = problem.space();
    let h = space.support_lengths(space.degree());
    let n = h.len();
    let mut z = DMatrix::zeros(n, n - 1);
    for i in 0..n - 1 {
        z[(i, i)] = 1.0;
        z[(n - 1, i)] = -h[i] / h[n - 1];
    }
    let q = quadratic(problem);
    let hr = z.transpose() * &q.h * &z;
    let gr = z.transpose() * &q.g;
    let (beta, regular, condition) = pinv_solve(&hr, &gr);
    OracleFit { b: z * beta, regular, condition }
}

pub fn spline(space: &SplineSpace, b: DVector<f64>) -> Spline {
    Spline::new(space.clone(), b).unwrap()
}
