use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clrspline_cli::commands::{cmd_clr, cmd_curves, cmd_fit, cmd_report, cmd_report_coefficients};
use clrspline_cli::config::{parse_knot_list, FitConfig, Mode, PartialConfig, Weights};
use clrspline_cli::dataset::{parse_coefficients, parse_histogram_csv};
use clrspline_cli::pipeline::{fit_rows, FitRun};
use clrspline_cli::{load_rows, CliError, Result};
use clrspline_core::spline::SplineSpace;

#[derive(Parser)]
#[command(name = "clrspline", version, about = "Smooth histogram data as clr-transformed densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// clr transform of every histogram row
    Clr(IoArgs),
    /// Spline coefficients per row
    Fit(FitArgs),
    /// Fitted clr function and density sampled on a grid, long format
    Curves(FitArgs),
    /// Objective, penalty, integral and coefficient identity per row
    Report(ReportArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Histogram CSV: label,group,<midpoint>,...
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone)]
struct KnotList(Vec<f64>);

fn knot_list(s: &str) -> std::result::Result<KnotList, String> {
    parse_knot_list(s).map(KnotList)
}

fn weights(s: &str) -> std::result::Result<Weights, String> {
    let list = parse_knot_list(s)?;
    Ok(if list.len() == 1 { Weights::Scalar(list[0]) } else { Weights::PerPoint(list) })
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Flat JSON with any of: knots, degree, order, alpha, weights, mode, grid_size, rcond
    #[arg(long)]
    config: Option<PathBuf>,
    /// a,λ1,...,λg,b
    #[arg(long, value_parser = knot_list)]
    knots: Option<KnotList>,
    #[arg(long)]
    degree: Option<usize>,
    /// Derivative order of the penalty
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// One weight for all classes, or one per class
    #[arg(long, value_parser = weights)]
    weights: Option<Weights>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Number of grid points for curves
    #[arg(long)]
    grid: Option<usize>,
    /// Relative singular-value cutoff for the numerical rank
    #[arg(long)]
    rcond: Option<f64>,
    /// The input already holds clr coordinates
    #[arg(long)]
    clr_input: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Check the coefficient identity on this table (label,group,b_...) instead of fitting
    #[arg(long)]
    coefficients: Option<PathBuf>,
    /// Relative tolerance of the identity check for --coefficients
    #[arg(long, default_value_t = 1e-8)]
    identity_tol: f64,
}

impl FitArgs {
    fn config(&self) -> Result<FitConfig> {
        let file = match &self.config {
            Some(p) => PartialConfig::load(p)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            knots: self.knots.clone().map(|k| k.0),
            degree: self.degree,
            order: self.order,
            alpha: self.alpha,
            weights: self.weights.clone(),
            mode: self.mode,
            grid_size: self.grid,
            rcond: self.rcond,
        };
        FitConfig::from_partial(file.overlay(flags))
    }

    fn input(&self) -> Result<&Path> {
        self.io.input.as_deref().ok_or_else(|| CliError::Usage("--input is required".into()))
    }

    fn run(&self) -> Result<FitRun> {
        let config = self.config()?;
        let (rows, midpoints) = load_rows(self.input()?, self.clr_input, config.mode)?;
        fit_rows(&rows, &midpoints, &config)
    }
}

fn writer(output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| CliError::Io { path: p.clone(), source })?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn finish(mut out: Box<dyn Write>) -> Result<()> {
    out.flush().map_err(|e| CliError::Output(e.to_string()))
}

fn fit_failures(run: &FitRun) -> Result<()> {
    let failed = run.failures();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("rows failed to fit or broke an invariant: {}", failed.join(", "))))
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Clr(io) => {
            let input = io.input.as_deref().ok_or_else(|| CliError::Usage("--input is required".into()))?;
            let data = parse_histogram_csv(input)?;
            let mut out = writer(&io.output)?;
            cmd_clr(&data, &mut out)?;
            finish(out)
        }
        Command::Fit(args) => {
            let run = args.run()?;
            let mut out = writer(&args.io.output)?;
            cmd_fit(&run, &mut out)?;
            finish(out)?;
            fit_failures(&run)
        }
        Command::Curves(args) => {
            let run = args.run()?;
            let mut out = writer(&args.io.output)?;
            let failed = cmd_curves(&run, &mut out)?;
            finish(out)?;
            fit_failures(&run)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("no curve for: {}", failed.join(", "))))
            }
        }
        Command::Report(args) => match &args.coefficients {
            Some(path) => {
                let config = args.fit.config()?;
                let midpoints = match args.fit.io.input.as_deref() {
                    Some(input) => load_rows(input, args.fit.clr_input, config.mode)?.1,
                    None => Vec::new(),
                };
                let space = SplineSpace::new(config.knot_config(&midpoints)?);
                let rows = parse_coefficients(path)?;
                let mut out = writer(&args.fit.io.output)?;
                let ok = cmd_report_coefficients(&rows, &space, args.identity_tol, &mut out)?;
                finish(out)?;
                if ok {
                    Ok(())
                } else {
                    Err(CliError::Numerical("some rows break the coefficient identity".into()))
                }
            }
            None => {
                let run = args.fit.run()?;
                let mut out = writer(&args.fit.io.output)?;
                cmd_report(&run, &mut out)?;
                finish(out)?;
                fit_failures(&run)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("clrspline: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
