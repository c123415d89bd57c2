//! The four subcommands as functions from parsed inputs to a writer.

use std::io::Write;

use clrspline_core::clr::clr_discrete;
use clrspline_core::smoothing::zero_integral_bound;
use clrspline_core::spline::SplineSpace;

use crate::config::Mode;
use crate::dataset::{write_record, write_table, Dataset, Record, Table};
use crate::error::{CliError, Result};
use crate::pipeline::{identity_check, sample_curve, FitRun};

/// Six decimals, without a negative zero.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn output_error(e: std::io::Error) -> CliError {
    CliError::Output(e.to_string())
}

/// Column names `b_-k, …, b_g` for a space of degree `k` with `g` interior knots.
pub fn coefficient_names(space: &SplineSpace) -> Vec<String> {
    let k = space.degree() as isize;
    let g = space.interior_count() as isize;
    (-k..=g).map(|i| format!("b_{i}")).collect()
}

pub fn clr_table(dataset: &Dataset) -> Table {
    Table {
        midpoints: dataset.midpoints.clone(),
        rows: dataset
            .rows
            .iter()
            .map(|r| Record {
                label: r.label.clone(),
                group: r.group.clone(),
                values: clr_discrete(&r.sample).into_inner(),
            })
            .collect(),
    }
}

pub fn cmd_clr<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    if dataset.is_empty() {
        return Err(CliError::Usage("the dataset has no rows".into()));
    }
    write_table(out, &clr_table(dataset), fmt6)
}

/// `label,group,b_-k,…,b_g,objective,integral,rank,consistent`. Rows whose solve failed are
/// written with `NaN` values and `consistent = false`.
pub fn cmd_fit<W: Write>(run: &FitRun, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let names = coefficient_names(&run.space);
    let mut header = vec!["label".to_string(), "group".to_string()];
    header.extend(names.iter().cloned());
    header.extend(["objective", "integral", "rank", "consistent"].map(String::from));
    write_record(&mut wtr, &header)?;
    for row in &run.rows {
        let mut fields = vec![row.label.clone(), row.group.clone()];
        match &row.outcome {
            Ok(sol) => {
                fields.extend(sol.spline.coeffs().iter().map(|b| fmt6(*b)));
                fields.push(fmt6(sol.objective));
                fields.push(format!("{:e}", sol.spline.integrate()));
                fields.push(sol.report.rank.to_string());
                fields.push(sol.report.consistent.to_string());
            }
            Err(e) => {
                fields.extend(names.iter().map(|_| "NaN".to_string()));
                fields.extend(["NaN", "NaN"].map(String::from));
                let rank = match e {
                    clrspline_core::Error::Inconsistent(r) => r.rank.to_string(),
                    _ => String::new(),
                };
                fields.push(rank);
                fields.push("false".into());
            }
        }
        write_record(&mut wtr, &fields)?;
    }
    wtr.flush().map_err(output_error)
}

/// Long format `label,group,x,clr_value,density_value`, rows in input order. Values are
/// written in shortest round-trip form. Returns the labels whose curve could not be sampled.
pub fn cmd_curves<W: Write>(run: &FitRun, out: W) -> Result<Vec<String>> {
    let mut wtr = csv::Writer::from_writer(out);
    write_record(&mut wtr, &["label", "group", "x", "clr_value", "density_value"].map(String::from))?;
    let mut failed = Vec::new();
    for row in &run.rows {
        let Ok(sol) = &row.outcome else {
            failed.push(row.label.clone());
            continue;
        };
        let curve = match sample_curve(sol, run.config.mode, run.config.grid_size) {
            Ok(c) => c,
            Err(_) => {
                failed.push(row.label.clone());
                continue;
            }
        };
        for i in 0..curve.x.len() {
            write_record(
                &mut wtr,
                &[
                    row.label.clone(),
                    row.group.clone(),
                    curve.x[i].to_string(),
                    curve.clr_value[i].to_string(),
                    curve.density_value[i].to_string(),
                ],
            )?;
        }
    }
    wtr.flush().map_err(output_error)?;
    Ok(failed)
}

/// Per-row summary of a fit run.
pub fn cmd_report<W: Write>(run: &FitRun, mut out: W) -> Result<()> {
    let cfg = &run.config;
    let knots: Vec<String> = run.space.breakpoints().iter().map(|k| k.to_string()).collect();
    writeln!(
        out,
        "mode {}  knots {}  degree {}  order {}  alpha {}  rcond {:e}",
        cfg.mode.as_str(),
        knots.join(","),
        cfg.degree,
        cfg.order,
        cfg.alpha,
        cfg.rcond
    )
    .map_err(output_error)?;
    writeln!(
        out,
        "{:<16} {:<5} {:>12} {:>12} {:>12} {:>12} {:>5} {:>10} {:>12} {:>12}  status",
        "label", "group", "objective", "residual", "penalty", "integral", "rank", "consistent",
        "identity", "identity_rel"
    )
    .map_err(output_error)?;
    for row in &run.rows {
        let status = if row.passes(cfg.mode) { "ok" } else { "FAIL" };
        match &row.outcome {
            Ok(sol) => {
                let id = identity_check(&run.space, sol.spline.coeffs().as_slice())?;
                writeln!(
                    out,
                    "{:<16} {:<5} {:>12.6} {:>12.6} {:>12.3e} {:>12.3e} {:>5} {:>10} {:>12.3e} {:>12.3e}  {status}",
                    row.label,
                    row.group,
                    sol.objective,
                    sol.terms.residual,
                    sol.terms.penalty,
                    sol.spline.integrate(),
                    sol.report.rank,
                    sol.report.consistent,
                    id.weighted_sum,
                    id.relative,
                )
                .map_err(output_error)?;
                if cfg.mode == Mode::ZeroIntegralClr && status == "FAIL" {
                    writeln!(out, "    integral bound {:e}", zero_integral_bound(&sol.spline))
                        .map_err(output_error)?;
                }
            }
            Err(e) => {
                writeln!(out, "{:<16} {:<5} error: {e}  {status}", row.label, row.group).map_err(output_error)?;
            }
        }
    }
    Ok(())
}

/// Weighted-identity check of given coefficient rows. Returns whether every row passed.
pub fn cmd_report_coefficients<W: Write>(
    rows: &[Record],
    space: &SplineSpace,
    tol: f64,
    mut out: W,
) -> Result<bool> {
    if rows.is_empty() {
        return Err(CliError::Usage("the coefficient table has no rows".into()));
    }
    let knots: Vec<String> = space.breakpoints().iter().map(|k| k.to_string()).collect();
    writeln!(out, "coefficients on knots {}  degree {}  tolerance {:e}", knots.join(","), space.degree(), tol)
        .map_err(output_error)?;
    writeln!(
        out,
        "{:<16} {:<5} {:>14} {:>12} {:>14} {:>12}  status",
        "label", "group", "identity", "identity_rel", "integral", "first_negated"
    )
    .map_err(output_error)?;
    let scale = (space.degree() + 1) as f64;
    let mut all = true;
    for row in rows {
        if row.values.len() != space.dim() {
            return Err(CliError::Usage(format!(
                "`{}` has {} coefficients, the space needs {}",
                row.label,
                row.values.len(),
                space.dim()
            )));
        }
        let id = identity_check(space, &row.values)?;
        let pass = id.relative.abs() <= tol;
        all &= pass;
        writeln!(
            out,
            "{:<16} {:<5} {:>14.6} {:>12.3e} {:>14.6} {:>12.3e}  {}",
            row.label,
            row.group,
            id.weighted_sum,
            id.relative,
            id.weighted_sum / scale,
            id.relative_first_negated,
            if pass { "ok" } else { "FAIL" }
        )
        .map_err(output_error)?;
    }
    Ok(all)
}
