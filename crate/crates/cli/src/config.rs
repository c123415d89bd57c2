//! Fit configuration: defaults, a flat JSON file, and command-line overrides, in that order.

use std::path::Path;

use clrspline_core::linalg::DEFAULT_RCOND;
use clrspline_core::spline::KnotConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_KNOTS: [f64; 4] = [0.0, 30000.0, 70000.0, 110709.0];
pub const DEFAULT_DEGREE: usize = 3;
pub const DEFAULT_ORDER: usize = 2;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_GRID: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// clr of the proportions, then the zero-integral fit.
    #[value(name = "zero_integral_clr")]
    ZeroIntegralClr,
    /// Proportions fitted directly without constraint, knots at the midpoints.
    #[value(name = "unconstrained_raw")]
    UnconstrainedRaw,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ZeroIntegralClr => "zero_integral_clr",
            Mode::UnconstrainedRaw => "unconstrained_raw",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Scalar(f64),
    PerPoint(Vec<f64>),
}

/// Every field optional; used for both the JSON file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub knots: Option<Vec<f64>>,
    pub degree: Option<usize>,
    pub order: Option<usize>,
    pub alpha: Option<f64>,
    pub weights: Option<Weights>,
    pub mode: Option<Mode>,
    pub grid_size: Option<usize>,
    pub rcond: Option<f64>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `other`'s fields win where set.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            knots: other.knots.or(self.knots),
            degree: other.degree.or(self.degree),
            order: other.order.or(self.order),
            alpha: other.alpha.or(self.alpha),
            weights: other.weights.or(self.weights),
            mode: other.mode.or(self.mode),
            grid_size: other.grid_size.or(self.grid_size),
            rcond: other.rcond.or(self.rcond),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// `a, λ_1, …, λ_g, b`; `None` picks the mode's default.
    pub knots: Option<Vec<f64>>,
    pub degree: usize,
    pub order: usize,
    pub alpha: f64,
    pub weights: Weights,
    pub mode: Mode,
    pub grid_size: usize,
    pub rcond: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            knots: None,
            degree: DEFAULT_DEGREE,
            order: DEFAULT_ORDER,
            alpha: DEFAULT_ALPHA,
            weights: Weights::Scalar(1.0),
            mode: Mode::ZeroIntegralClr,
            grid_size: DEFAULT_GRID,
            rcond: DEFAULT_RCOND,
        }
    }
}

impl FitConfig {
    pub fn from_partial(p: PartialConfig) -> Result<Self> {
        let d = Self::default();
        let cfg = Self {
            knots: p.knots,
            degree: p.degree.unwrap_or(d.degree),
            order: p.order.unwrap_or(d.order),
            alpha: p.alpha.unwrap_or(d.alpha),
            weights: p.weights.unwrap_or(d.weights),
            mode: p.mode.unwrap_or(d.mode),
            grid_size: p.grid_size.unwrap_or(d.grid_size),
            rcond: p.rcond.unwrap_or(d.rcond),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(CliError::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.rcond > 0.0 && self.rcond < 1.0) {
            return Err(CliError::Config(format!("rcond must lie in (0, 1), got {}", self.rcond)));
        }
        if self.order < 1 || self.order >= self.degree {
            return Err(CliError::Config(format!(
                "order must satisfy 1 <= order < degree, got order {} with degree {}",
                self.order, self.degree
            )));
        }
        if self.grid_size < clrspline_core::clr::MIN_GRID {
            return Err(CliError::Config(format!(
                "grid_size must be at least {}, got {}",
                clrspline_core::clr::MIN_GRID,
                self.grid_size
            )));
        }
        if let Some(k) = &self.knots {
            if k.len() < 2 {
                return Err(CliError::Config("knots need at least the two endpoints a and b".into()));
            }
        }
        match &self.weights {
            Weights::Scalar(w) if !(*w >= 0.0 && w.is_finite()) => {
                Err(CliError::Config(format!("weights must be non-negative, got {w}")))
            }
            Weights::PerPoint(ws) if ws.iter().any(|w| !(*w >= 0.0 && w.is_finite())) => {
                Err(CliError::Config("weights must be non-negative".into()))
            }
            _ => Ok(()),
        }
    }

    /// Knot sequence `a, λ_1, …, λ_g, b` actually used for data with these midpoints.
    ///
    /// Without explicit knots, clr mode uses `0, 30000, 70000, 110709`; raw mode places
    /// knots at the midpoints on `[min(0, x_1), x_n]`.
    pub fn knot_sequence(&self, midpoints: &[f64]) -> Vec<f64> {
        if let Some(k) = &self.knots {
            return k.clone();
        }
        match self.mode {
            Mode::ZeroIntegralClr => DEFAULT_KNOTS.to_vec(),
            Mode::UnconstrainedRaw => raw_knots(midpoints),
        }
    }

    pub fn knot_config(&self, midpoints: &[f64]) -> Result<KnotConfig> {
        Ok(KnotConfig::from_breakpoints(&self.knot_sequence(midpoints), self.degree)?)
    }

    pub fn weights_for(&self, n: usize) -> Result<Vec<f64>> {
        match &self.weights {
            Weights::Scalar(w) => Ok(vec![*w; n]),
            Weights::PerPoint(ws) if ws.len() == n => Ok(ws.clone()),
            Weights::PerPoint(ws) => Err(CliError::Config(format!(
                "{} weights given for {n} classes",
                ws.len()
            ))),
        }
    }
}

fn raw_knots(midpoints: &[f64]) -> Vec<f64> {
    let mut sorted = midpoints.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let b = sorted.last().copied().unwrap_or(1.0);
    let a = sorted.first().copied().unwrap_or(0.0).min(0.0);
    let mut knots = vec![a];
    knots.extend(sorted.iter().copied().filter(|m| *m > a && *m < b));
    knots.push(b);
    knots
}

/// Parse `a,λ1,…,λg,b`.
pub fn parse_knot_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}
