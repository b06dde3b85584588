//! Paired-seed experiment runs and their CSV outputs.

use std::fs;
use std::path::Path;
use std::time::Instant;

use irsmec_core::solvers::{self, SolveResult, SolverKind};
use irsmec_core::Instance;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::Error;

/// One row of metrics.csv: a solver's outcome in one slot of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub slot: usize,
    pub solver: String,
    pub seed: u64,
    pub delay: f64,
    pub energy: f64,
    pub qoe: f64,
    pub revenue: f64,
}

/// One row of trace.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub solver: String,
    pub seed: u64,
    pub utility: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub solver: SolverKind,
    pub seed: u64,
    pub result: SolveResult,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub runs: Vec<RunRecord>,
    pub metrics: Vec<MetricsRow>,
    pub traces: Vec<TraceRow>,
}

/// Solves one instance and stamps the wall time.
pub fn timed_solve(kind: SolverKind, instance: &Instance, config: &irsmec_core::solvers::SolverConfig) -> Result<SolveResult, Error> {
    let start = Instant::now();
    let mut r = solvers::solve(kind, instance, config)?;
    r.wall_time = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Every solver sees the same realized instance for a given seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, Error> {
    config.validate()?;
    let mut out = ExperimentOutput::default();
    for &seed in &config.run.seeds {
        let instance = Instance::realize(&config.params, seed)?;
        for &kind in &config.run.solvers {
            let solver_cfg = irsmec_core::solvers::SolverConfig {
                seed,
                ..config.solver.clone()
            };
            let result = timed_solve(kind, &instance, &solver_cfg)?;
            for (n, o) in result.outcomes.iter().enumerate() {
                out.metrics.push(MetricsRow {
                    slot: n,
                    solver: kind.name().into(),
                    seed,
                    delay: o.delay,
                    energy: o.energy,
                    qoe: o.qoe,
                    revenue: o.revenue,
                });
            }
            if kind.is_iterative() {
                for (j, (u, r)) in result.utility_trace.iter().zip(&result.reward_trace).enumerate() {
                    out.traces.push(TraceRow {
                        iter: j + 1,
                        solver: kind.name().into(),
                        seed,
                        utility: *u,
                        reward: *r,
                    });
                }
            }
            out.runs.push(RunRecord { solver: kind, seed, result });
        }
    }
    Ok(out)
}

/// Writes metrics.csv, trace.csv and config.resolved into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, output: &ExperimentOutput) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("metrics.csv"), METRICS_HEADER, &output.metrics)?;
    write_csv(&dir.join("trace.csv"), TRACE_HEADER, &output.traces)?;
    fs::write(dir.join("config.resolved"), config.resolved())?;
    Ok(())
}

pub const METRICS_HEADER: &[&str] = &["slot", "solver", "seed", "delay", "energy", "qoe", "revenue"];
pub const TRACE_HEADER: &[&str] = &["iter", "solver", "seed", "utility", "reward"];

/// The header is written even when there are no rows.
fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, Error> {
    if !path.exists() {
        return Err(Error::MissingMetrics(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<MetricsRow>, _>>()?;
    Ok(rows)
}
