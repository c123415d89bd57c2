//! Histogram CSV → clr → zero-integral smoothing spline → density curves.
//!
//! The `clrspline` binary wraps these modules; everything it does is reachable from here.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod pipeline;

use std::path::Path;

pub use error::{CliError, Result};

use config::Mode;
use pipeline::RowInput;

/// Rows to fit and their shared abscissas. With `clr_input` the table already holds clr
/// coordinates and is used as is; otherwise it must be a histogram table.
pub fn load_rows(input: &Path, clr_input: bool, mode: Mode) -> Result<(Vec<RowInput>, Vec<f64>)> {
    if clr_input {
        let table = dataset::parse_table(input)?;
        let rows = pipeline::ordinates_from_clr_table(&table, mode)?;
        Ok((rows, table.midpoints))
    } else {
        let data = dataset::parse_histogram_csv(input)?;
        let rows = pipeline::ordinates_from_dataset(&data, mode);
        Ok((rows, data.midpoints))
    }
}
