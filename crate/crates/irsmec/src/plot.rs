//! Per-panel TSV tables of cumulative metrics, averaged over seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::experiment::{read_metrics, MetricsRow};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    Delay,
    Energy,
    Qoe,
    Revenue,
}

impl Panel {
    pub const ALL: [Panel; 4] = [Panel::Delay, Panel::Energy, Panel::Qoe, Panel::Revenue];

    pub fn name(&self) -> &'static str {
        match self {
            Panel::Delay => "delay",
            Panel::Energy => "energy",
            Panel::Qoe => "qoe",
            Panel::Revenue => "revenue",
        }
    }

    pub fn value(&self, row: &MetricsRow) -> f64 {
        match self {
            Panel::Delay => row.delay,
            Panel::Energy => row.energy,
            Panel::Qoe => row.qoe,
            Panel::Revenue => row.revenue,
        }
    }
}

/// Cumulative per-slot sums: solver → seed → running totals.
pub type Cumulative = BTreeMap<String, BTreeMap<u64, Vec<f64>>>;

/// Running totals over slots for every (solver, seed).
pub fn cumulative(rows: &[MetricsRow], panel: Panel) -> Cumulative {
    let mut per: BTreeMap<String, BTreeMap<u64, BTreeMap<usize, f64>>> = BTreeMap::new();
    for r in rows {
        *per.entry(r.solver.clone())
            .or_default()
            .entry(r.seed)
            .or_default()
            .entry(r.slot)
            .or_default() += panel.value(r);
    }
    per.into_iter()
        .map(|(solver, seeds)| {
            let seeds = seeds
                .into_iter()
                .map(|(seed, slots)| {
                    let mut acc = 0.0;
                    let run = slots
                        .values()
                        .map(|v| {
                            acc += v;
                            acc
                        })
                        .collect();
                    (seed, run)
                })
                .collect();
            (solver, seeds)
        })
        .collect()
}

/// Sample mean and standard error; the error is 0 for a single value.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Solvers in order of first appearance.
fn solver_order(rows: &[MetricsRow]) -> Vec<String> {
    let mut seen = Vec::new();
    for r in rows {
        if !seen.contains(&r.solver) {
            seen.push(r.solver.clone());
        }
    }
    seen
}

/// TSV table: slot, one mean column per solver, one standard-error column per solver.
pub fn panel_table(rows: &[MetricsRow], panel: Panel) -> String {
    let order = solver_order(rows);
    let cum = cumulative(rows, panel);
    let slots = cum
        .values()
        .flat_map(|s| s.values().map(Vec::len))
        .max()
        .unwrap_or(0);
    let mut out = String::from("slot");
    for s in &order {
        let _ = write!(out, "\t{s}");
    }
    for s in &order {
        let _ = write!(out, "\t{s}_se");
    }
    out.push('\n');
    for n in 0..slots {
        let stats: Vec<(f64, f64)> = order
            .iter()
            .map(|s| {
                let vals: Vec<f64> = cum[s].values().filter_map(|run| run.get(n).copied()).collect();
                mean_se(&vals)
            })
            .collect();
        let _ = write!(out, "{n}");
        for (m, _) in &stats {
            let _ = write!(out, "\t{m}");
        }
        for (_, se) in &stats {
            let _ = write!(out, "\t{se}");
        }
        out.push('\n');
    }
    out
}

/// Reads `dir/metrics.csv` and writes `dir/panel_<name>.tsv` for each panel.
pub fn emit_plot_data(dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let rows = read_metrics(&dir.join("metrics.csv"))?;
    let mut written = Vec::new();
    for panel in Panel::ALL {
        let path = dir.join(format!("panel_{}.tsv", panel.name()));
        fs::write(&path, panel_table(&rows, panel))?;
        written.push(path);
    }
    Ok(written)
}
