//! Command-line front end: `run`, `compare` and `verify`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::output::write_csv;
use crate::prediction::PredictorKind;
use crate::scenario::Scenario;
use crate::simulator::{run, Metrics, SimLog};
use crate::svg::render;
use crate::verify::verify_all;

#[derive(Debug, Parser)]
#[command(name = "timegov", version, about = "Safe time-governed path following")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write trajectory.csv, metrics.json and scene.svg.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the integration step.
        #[arg(long)]
        dt: Option<f64>,
        /// Recorded in metrics.json; the simulation itself is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every predictor and feedback combination for each order.
    Compare {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        orders: Vec<usize>,
    },
    /// Run the numerical self-checks.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// One cell of the comparison matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub order: usize,
    pub predictor: PredictorKind,
    pub velocity_feedback: bool,
}

impl Cell {
    pub fn id(&self) -> String {
        format!(
            "n{}-{}-{}",
            self.order,
            self.predictor.name(),
            if self.velocity_feedback { "vel" } else { "pos" }
        )
    }
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub cell: Cell,
    pub log: SimLog,
    pub metrics: Metrics,
}

/// Cells for the given orders: both predictors with and without velocity
/// feedback.
pub fn matrix_cells(orders: &[usize]) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &order in orders {
        for predictor in [PredictorKind::Lyapunov, PredictorKind::Vandermonde] {
            for velocity_feedback in [false, true] {
                cells.push(Cell {
                    order,
                    predictor,
                    velocity_feedback,
                });
            }
        }
    }
    cells
}

/// Simulates one cell, tagging any error with the cell id.
pub fn run_cell(base: &Scenario, cell: Cell) -> Result<CellOutcome> {
    let tag = |e: Error| Error::Setup(format!("cell {}: {e}", cell.id()));
    let sc = base.variant(cell.order, cell.predictor, cell.velocity_feedback);
    let prep = sc.prepare().map_err(tag)?;
    let (log, metrics) = run(&prep.system, &prep.initial, &prep.config).map_err(tag)?;
    Ok(CellOutcome { cell, log, metrics })
}

/// Runs the comparison matrix concurrently. Results follow [`matrix_cells`]
/// order.
pub fn run_matrix(base: &Scenario, orders: &[usize]) -> Result<Vec<CellOutcome>> {
    matrix_cells(orders)
        .into_par_iter()
        .map(|cell| run_cell(base, cell))
        .collect()
}

fn write_outputs(dir: &Path, sc: &Scenario, log: &SimLog, metrics: serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = BufWriter::new(File::create(dir.join("trajectory.csv"))?);
    write_csv(log, &mut csv)?;
    fs::write(
        dir.join("metrics.json"),
        serde_json::to_string_pretty(&metrics).expect("json") + "\n",
    )?;
    let env = sc.build_environment()?;
    let path = sc.build_path()?;
    fs::write(dir.join("scene.svg"), render(&env, &path, log))?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |t| format!("{t:.6}"))
}

fn cmd_run(scenario: &Path, out: &Path, dt: Option<f64>, seed: Option<u64>) -> Result<bool> {
    let mut sc = Scenario::load(scenario)?;
    if let Some(dt) = dt {
        sc.sim.dt = dt;
    }
    let prep = sc.prepare()?;
    let (log, metrics) = run(&prep.system, &prep.initial, &prep.config)?;
    let mut value = serde_json::to_value(&metrics).expect("json");
    value["dt"] = json!(prep.config.dt);
    if let Some(seed) = seed {
        value["seed"] = json!(seed);
    }
    write_outputs(out, &sc, &log, value)?;
    println!(
        "completed={} travel_time={} mean_err={:.6} max_err={:.6} min_clearance={:.6}",
        metrics.completed,
        fmt_opt(metrics.travel_time),
        metrics.mean_path_error,
        metrics.max_path_error,
        metrics.min_clearance
    );
    Ok(metrics.completed)
}

fn cmd_compare(scenario: &Path, out: &Path, orders: &[usize]) -> Result<bool> {
    let sc = Scenario::load(scenario)?;
    let outcomes = run_matrix(&sc, orders)?;
    fs::create_dir_all(out)?;
    let mut summary = String::from("cell,travel_time,mean_err,max_err,min_clearance\n");
    for o in &outcomes {
        let id = o.cell.id();
        let variant = sc.variant(o.cell.order, o.cell.predictor, o.cell.velocity_feedback);
        let value = serde_json::to_value(&o.metrics).expect("json");
        write_outputs(&out.join(&id), &variant, &o.log, value)?;
        let m = &o.metrics;
        summary.push_str(&format!(
            "{id},{},{:.6},{:.6},{:.6}\n",
            fmt_opt(m.travel_time),
            m.mean_path_error,
            m.max_path_error,
            m.min_clearance
        ));
    }
    fs::write(out.join("summary.csv"), &summary)?;
    print!("{summary}");
    Ok(outcomes.iter().all(|o| o.metrics.completed))
}

fn cmd_verify(trials: usize, seed: u64) -> Result<bool> {
    let checks = verify_all(trials, seed)?;
    for c in &checks {
        println!(
            "{} {}: {:.3e} (bound {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    Ok(checks.iter().all(|c| c.passed))
}

/// Runs a parsed command. Exit codes: 0 success, 2 a run did not complete,
/// 1 error.
pub fn execute(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Run {
            scenario,
            out,
            dt,
            seed,
        } => cmd_run(scenario, out, *dt, *seed).map(|done| if done { 0 } else { 2 }),
        Command::Compare {
            scenario,
            out,
            orders,
        } => cmd_compare(scenario, out, orders).map(|done| if done { 0 } else { 2 }),
        Command::Verify { trials, seed } => cmd_verify(*trials, *seed).map(|ok| if ok { 0 } else { 1 }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn main() -> ExitCode {
    execute(Cli::parse())
}
