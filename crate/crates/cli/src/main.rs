//! `casimir`: batch front end for plane–plane, atom–surface and grating
//! Casimir calculations.
//!
//! Reads a JSON scenario, evaluates every sweep point on a worker pool, and
//! writes one row per point in sweep order. Exit codes: 0 on success, 2 for
//! configuration errors, 3 when any point fails numerically.

mod config;
mod error;
mod output;
mod plan;
mod run;
mod units;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use crate::config::Mode;
use crate::error::CliError;
use crate::output::{sci, Status, Table};
use crate::plan::Plan;
use crate::run::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Casimir and Casimir–Polder energies from a JSON scenario")]
struct Args {
    /// Scenario file (JSON, schema 1).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Relative tolerance, overriding `numerics.tol`.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::PlanePlane => "plane-plane",
        Mode::CasimirPolder => "casimir-polder",
        Mode::Grating => "grating",
        Mode::Asymptotics => "asymptotics",
    }
}

struct PointResult {
    cells: Vec<Cell>,
    status: Status,
    error: Option<casimir::Error>,
    seconds: f64,
}

fn evaluate_all(plan: &Plan, threads: usize) -> Result<Vec<PointResult>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    Ok(pool.install(|| {
        plan.points
            .par_iter()
            .map(|p| {
                let start = Instant::now();
                let outcome = run::evaluate(plan, p);
                let seconds = start.elapsed().as_secs_f64();
                match outcome {
                    Ok(cells) => PointResult { cells, status: Status::Ok, error: None, seconds },
                    Err(e) => PointResult { cells: run::failed_row(plan), status: Status::Error, error: Some(e), seconds },
                }
            })
            .collect()
    }))
}

fn execute(args: &Args) -> Result<(), CliError> {
    let loaded = config::load(&args.config)?;
    let plan = plan::build(&loaded, args.tol)?;
    let results = evaluate_all(&plan, args.threads)?;

    let var = plan.variable;
    let value_columns = run::columns(plan.mode);
    let total = plan.points.len();
    let mut first_failure = None;
    for (i, (p, r)) in plan.points.iter().zip(&results).enumerate() {
        let label = format!("{}={}", var.column(), sci(var.to_si(p.get(var))));
        match &r.error {
            None => eprintln!("[{}/{total}] {label} ok {}={} ({:.2} s)", i + 1, value_columns[0], match r.cells[0] {
                Cell::Float(x) => sci(x),
                Cell::Int(n) => n.to_string(),
            }, r.seconds),
            Some(e) => {
                eprintln!("[{}/{total}] {label} error: {e}", i + 1);
                first_failure.get_or_insert((i + 1, label, e.clone()));
            }
        }
    }

    let table = Table {
        mode: mode_name(plan.mode),
        columns: std::iter::once(var.column().to_string()).chain(value_columns.iter().map(|c| c.to_string())).collect(),
        rows: plan
            .points
            .iter()
            .zip(results)
            .map(|(p, r)| {
                let mut cells = vec![Cell::Float(var.to_si(p.get(var)))];
                cells.extend(r.cells);
                (cells, r.status)
            })
            .collect(),
    };
    write_table(&table, args)?;

    match first_failure {
        Some((index, label, source)) => Err(CliError::Numerical { index, label, source }),
        None => Ok(()),
    }
}

fn write_table(table: &Table, args: &Args) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Output(e.to_string());
    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::Output(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match args.format {
        Format::Csv => output::write_csv(table, &mut out).map_err(io_err)?,
        Format::Json => output::write_json(table, &mut out).map_err(io_err)?,
    }
    out.flush().map_err(io_err)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("casimir: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
