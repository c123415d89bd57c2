//! Centred logratio transforms for compositions and densities.

use crate::error::{Error, Result};
use crate::quadrature::SpanQuadrature;
use crate::spline::Spline;

/// Allowed deviation of a histogram's proportions from unit sum (published tables are
/// rounded to three decimals).
pub const PROPORTION_SUM_TOL: f64 = 5e-3;

/// Gauss–Legendre nodes per knot span for normalizing `exp(spline)`.
pub const NORMALIZER_NODES: usize = 16;

/// Bisection stops once a span's estimate changes by less than this, relatively.
const NORMALIZER_TOL: f64 = 1e-14;

/// Smallest grid accepted by [`inverse_clr_spline`].
pub const MIN_GRID: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("interval [{a}, {b}] is empty")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Length `η = b − a`.
    pub fn eta(&self) -> f64 {
        self.b - self.a
    }

    /// `m ≥ 2` equally spaced points from `a` to `b` inclusive.
    pub fn grid(&self, m: usize) -> Vec<f64> {
        let step = self.eta() / (m - 1) as f64;
        (0..m)
            .map(|i| if i + 1 == m { self.b } else { self.a + step * i as f64 })
            .collect()
    }
}

/// One distribution-valued observation: class midpoints and strictly positive proportions.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSample {
    midpoints: Vec<f64>,
    proportions: Vec<f64>,
}

impl HistogramSample {
    pub fn new(midpoints: Vec<f64>, proportions: Vec<f64>) -> Result<Self> {
        if midpoints.len() != proportions.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} midpoints but {} proportions",
                midpoints.len(),
                proportions.len()
            )));
        }
        if proportions.is_empty() {
            return Err(Error::InvalidInput("histogram has no classes".into()));
        }
        check_positive(&proportions)?;
        let total: f64 = proportions.iter().sum();
        if (total - 1.0).abs() > PROPORTION_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "proportions sum to {total}, not 1 (tolerance {PROPORTION_SUM_TOL})"
            )));
        }
        Ok(Self { midpoints, proportions })
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn len(&self) -> usize {
        self.proportions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proportions.is_empty()
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        Some(index) => Err(Error::NonPositive { index, value: values[index] }),
        None => Ok(()),
    }
}

/// Centred logratio coordinates; they sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ClrVector(pub Vec<f64>);

impl ClrVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `z_i = ln y_i − mean(ln y)`, i.e. `ln(y_i / g(y))` with `g` the geometric mean.
pub fn clr(values: &[f64]) -> Result<ClrVector> {
    check_positive(values)?;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    Ok(ClrVector(logs.into_iter().map(|l| l - mean).collect()))
}

pub fn clr_discrete(sample: &HistogramSample) -> ClrVector {
    clr(&sample.proportions).expect("histogram proportions are positive")
}

/// Back to proportions: `exp(z_i) / Σ exp(z_j)`.
pub fn clr_discrete_inverse(z: &ClrVector) -> Result<Vec<f64>> {
    if z.0.is_empty() || z.0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("clr coordinates must be finite and non-empty".into()));
    }
    let max = z.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.0.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// Functional clr of density values sampled on `grid`:
/// `ln f − (1/η) ∫_I ln f`, the integral taken by the composite trapezoidal rule.
pub fn clr_functional(grid: &[f64], values: &[f64], interval: Interval) -> Result<Vec<f64>> {
    if grid.len() != values.len() || grid.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "{} grid points and {} values",
            grid.len(),
            values.len()
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    let span_tol = 1e-12 * interval.eta();
    if (grid[0] - interval.a).abs() > span_tol
        || (grid[grid.len() - 1] - interval.b).abs() > span_tol
    {
        return Err(Error::InvalidInput(format!(
            "grid [{}, {}] does not span [{}, {}]",
            grid[0],
            grid[grid.len() - 1],
            interval.a,
            interval.b
        )));
    }
    check_positive(values)?;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mean = trapezoid(grid, &logs) / interval.eta();
    Ok(logs.into_iter().map(|l| l - mean).collect())
}

/// Density sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityCurve {
    pub fn trapezoid_integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }
}

/// Inverse clr of a spline: `exp(s(x)) / ∫_I exp(s)`, sampled on `m` equally spaced points.
///
/// The normalizing integral uses [`NORMALIZER_NODES`] Gauss–Legendre nodes per knot span,
/// with spans bisected where `exp(s)` is too steep for a single rule.
pub fn inverse_clr_spline(spline: &Spline, m: usize, interval: Interval) -> Result<DensityCurve> {
    if m < MIN_GRID {
        return Err(Error::InvalidInput(format!("grid size {m} is below {MIN_GRID}")));
    }
    let space = spline.space();
    let tol = 1e-12 * interval.eta();
    if (space.a() - interval.a).abs() > tol || (space.b() - interval.b).abs() > tol {
        return Err(Error::InvalidInput(format!(
            "interval [{}, {}] differs from the spline domain [{}, {}]",
            interval.a,
            interval.b,
            space.a(),
            space.b()
        )));
    }
    let grid = interval.grid(m);
    let clr_values = spline.evaluate_many(&grid)?;
    let shift = clr_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let quad = SpanQuadrature::new(NORMALIZER_NODES);
    let normalizer = quad.integrate_adaptive(space.breakpoints(), NORMALIZER_TOL, 20, |x| {
        (spline.evaluate(x).expect("node inside domain") - shift).exp()
    });
    let values = clr_values.iter().map(|v| (v - shift).exp() / normalizer).collect();
    Ok(DensityCurve { grid, values })
}
