//! Smoothing splines for centred logratio (clr) transformed densities.
//!
//! Histogram data are mapped to clr coordinates, smoothed with a penalized B-spline whose
//! integral over the domain is constrained to zero, and mapped back to a positive density
//! with unit integral.
//!
//! ```
//! use clrspline_core::{clr, smoothing, spline, linalg::SolveOptions};
//!
//! let space = spline::SplineSpace::new(
//!     spline::KnotConfig::new(0.0, 1.0, vec![0.3, 0.7], 3).unwrap(),
//! );
//! let xs = vec![0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95];
//! let z = clr::clr(&[0.05, 0.2, 0.3, 0.2, 0.15, 0.07, 0.03]).unwrap();
//! let problem = smoothing::SmoothingProblem::with_unit_weights(
//!     space, xs, z.into_inner(), 1.0, 2,
//! ).unwrap();
//! let fit = smoothing::fit_zero_integral(&problem, &SolveOptions::default()).unwrap();
//! assert!(fit.spline.integrate().abs() < 1e-12);
//! ```

pub mod clr;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod smoothing;
pub mod spline;

pub use error::{Error, Result};
