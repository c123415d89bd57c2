//! Row-wise fitting: ordinates per row, one smoothing problem per row, fits run in parallel.

use clrspline_core::clr::{clr_discrete, inverse_clr_spline, Interval};
use clrspline_core::linalg::SolveOptions;
use clrspline_core::smoothing::{
    fit_unconstrained, fit_zero_integral, weighted_coefficient_sum, weighted_coefficient_sum_relative,
    zero_integral_bound, SmoothingProblem, SmoothingSolution,
};
use clrspline_core::spline::SplineSpace;
use rayon::prelude::*;

use crate::config::{FitConfig, Mode};
use crate::dataset::{Dataset, Table};
use crate::error::{CliError, Result};

/// Ordinates of one row, ready to be smoothed.
#[derive(Debug, Clone, PartialEq)]
pub struct RowInput {
    pub label: String,
    pub group: String,
    pub ys: Vec<f64>,
}

/// clr coordinates of each row in clr mode, the proportions themselves in raw mode.
pub fn ordinates_from_dataset(dataset: &Dataset, mode: Mode) -> Vec<RowInput> {
    dataset
        .rows
        .iter()
        .map(|r| RowInput {
            label: r.label.clone(),
            group: r.group.clone(),
            ys: match mode {
                Mode::ZeroIntegralClr => clr_discrete(&r.sample).into_inner(),
                Mode::UnconstrainedRaw => r.sample.proportions().to_vec(),
            },
        })
        .collect()
}

/// Rows of an already clr-transformed table, used as ordinates unchanged.
pub fn ordinates_from_clr_table(table: &Table, mode: Mode) -> Result<Vec<RowInput>> {
    if mode != Mode::ZeroIntegralClr {
        return Err(CliError::Usage("clr input can only be fitted in zero_integral_clr mode".into()));
    }
    Ok(table
        .rows
        .iter()
        .map(|r| RowInput { label: r.label.clone(), group: r.group.clone(), ys: r.values.clone() })
        .collect())
}

#[derive(Debug, Clone)]
pub struct RowFit {
    pub label: String,
    pub group: String,
    pub outcome: std::result::Result<SmoothingSolution, clrspline_core::Error>,
}

impl RowFit {
    /// Fitted, consistent, and (in clr mode) integrating to zero within the accepted bound.
    pub fn passes(&self, mode: Mode) -> bool {
        match &self.outcome {
            Ok(sol) => {
                sol.report.consistent
                    && (mode == Mode::UnconstrainedRaw
                        || sol.spline.integrate().abs() <= zero_integral_bound(&sol.spline))
            }
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitRun {
    pub config: FitConfig,
    pub space: SplineSpace,
    pub rows: Vec<RowFit>,
}

impl FitRun {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.passes(self.config.mode))
    }

    pub fn failures(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| !r.passes(self.config.mode))
            .map(|r| r.label.as_str())
            .collect()
    }
}

/// Fit every row. Problem set-up errors (knots, domain, weights) abort the run; solver
/// failures are kept per row. Output order is input order.
pub fn fit_rows(inputs: &[RowInput], midpoints: &[f64], config: &FitConfig) -> Result<FitRun> {
    if inputs.is_empty() {
        return Err(CliError::Usage("the dataset has no rows".into()));
    }
    let space = SplineSpace::new(config.knot_config(midpoints)?);
    let weights = config.weights_for(midpoints.len())?;
    let problems = inputs
        .iter()
        .map(|row| {
            SmoothingProblem::new(
                space.clone(),
                midpoints.to_vec(),
                row.ys.clone(),
                weights.clone(),
                config.alpha,
                config.order,
            )
            .map_err(|e| CliError::Config(format!("`{}`: {e}", row.label)))
        })
        .collect::<Result<Vec<_>>>()?;
    let opts = SolveOptions::with_rcond(config.rcond);
    let mode = config.mode;
    let rows = problems
        .par_iter()
        .zip(inputs.par_iter())
        .map(|(problem, row)| RowFit {
            label: row.label.clone(),
            group: row.group.clone(),
            outcome: match mode {
                Mode::ZeroIntegralClr => fit_zero_integral(problem, &opts),
                Mode::UnconstrainedRaw => fit_unconstrained(problem, &opts),
            },
        })
        .collect();
    Ok(FitRun { config: config.clone(), space, rows })
}

/// Sampled curve: grid, spline values and density values.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub x: Vec<f64>,
    pub clr_value: Vec<f64>,
    pub density_value: Vec<f64>,
}

/// clr mode: `s(x)` and its inverse clr. Raw mode: `s(x)` and `s(x) / ∫s`, which keeps any
/// negative values of the raw fit visible.
pub fn sample_curve(solution: &SmoothingSolution, mode: Mode, grid_size: usize) -> Result<Curve> {
    let spline = &solution.spline;
    let space = spline.space();
    let interval = Interval::new(space.a(), space.b())?;
    match mode {
        Mode::ZeroIntegralClr => {
            let density = inverse_clr_spline(spline, grid_size, interval)?;
            let clr_value = spline.evaluate_many(&density.grid)?;
            Ok(Curve { x: density.grid, clr_value, density_value: density.values })
        }
        Mode::UnconstrainedRaw => {
            let x = interval.grid(grid_size);
            let clr_value = spline.evaluate_many(&x)?;
            let total = spline.integrate();
            if total == 0.0 || !total.is_finite() {
                return Err(CliError::Numerical(format!(
                    "raw fit integrates to {total}; cannot normalize to a density"
                )));
            }
            let density_value = clr_value.iter().map(|v| v / total).collect();
            Ok(Curve { x, clr_value, density_value })
        }
    }
}

/// Weighted coefficient identity of one coefficient vector on `space`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// `Σ b_i (λ_{i+k+1} − λ_i)`.
    pub weighted_sum: f64,
    /// The same divided by `Σ |b_i| (λ_{i+k+1} − λ_i)`.
    pub relative: f64,
    /// Relative residual after negating the first coefficient.
    pub relative_first_negated: f64,
}

pub fn identity_check(space: &SplineSpace, coeffs: &[f64]) -> Result<IdentityCheck> {
    let spline = clrspline_core::spline::Spline::new(
        space.clone(),
        nalgebra::DVector::from_column_slice(coeffs),
    )?;
    let mut flipped = coeffs.to_vec();
    flipped[0] = -flipped[0];
    let flipped = clrspline_core::spline::Spline::new(
        space.clone(),
        nalgebra::DVector::from_vec(flipped),
    )?;
    Ok(IdentityCheck {
        weighted_sum: weighted_coefficient_sum(&spline),
        relative: weighted_coefficient_sum_relative(&spline),
        relative_first_negated: weighted_coefficient_sum_relative(&flipped),
    })
}
