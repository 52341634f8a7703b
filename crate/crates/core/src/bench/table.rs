//! Per-problem metric tables over the common-convergent starts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::solvers::Algorithm;
use crate::Error;

use super::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Nonconv,
    Iterations,
    CpuTime,
    InvStepSize,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Nonconv, Metric::Iterations, Metric::CpuTime, Metric::InvStepSize];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Nonconv => "nonconv",
            Metric::Iterations => "iterations",
            Metric::CpuTime => "cpu_time",
            Metric::InvStepSize => "inv_step_size",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Statistics of one algorithm on one problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub nonconv: usize,
    pub mean_iterations: Option<f64>,
    pub mean_cpu_time: Option<f64>,
    pub mean_step: Option<f64>,
}

impl Cell {
    /// Value of `metric`; `None` when the common-convergent subset is empty
    /// (or, for the step size, has no recorded steps).
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Nonconv => Some(self.nonconv as f64),
            Metric::Iterations => self.mean_iterations,
            Metric::CpuTime => self.mean_cpu_time,
            Metric::InvStepSize => self.mean_step.map(|s| 1.0 / s).filter(|v| v.is_finite()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub problem: String,
    pub points: usize,
    /// Starts from which every algorithm converged.
    pub common: usize,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub algorithms: Vec<Algorithm>,
    pub rows: Vec<TableRow>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl MetricsTable {
    /// Builds the table for `algorithms` (all algorithms present in the
    /// records, in [`Algorithm::ALL`] order, when `None`). Problems keep registry order, unknown ids follow
    /// alphabetically.
    pub fn build(records: &[RunRecord], algorithms: Option<&[Algorithm]>) -> Self {
        let algorithms: Vec<Algorithm> = match algorithms {
            Some(a) => a.to_vec(),
            None => Algorithm::ALL
                .into_iter()
                .filter(|a| records.iter().any(|r| r.result.algorithm == *a))
                .collect(),
        };
        let mut by_problem: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
        for r in records.iter().filter(|r| algorithms.contains(&r.result.algorithm)) {
            by_problem.entry(r.result.problem.as_str()).or_default().push(r);
        }
        let order = |id: &str| {
            crate::problem::list_ids()
                .iter()
                .position(|k| *k == id)
                .unwrap_or(usize::MAX)
        };
        let mut problems: Vec<&str> = by_problem.keys().copied().collect();
        problems.sort_by_key(|id| (order(id), id.to_string()));

        let rows = problems
            .into_iter()
            .map(|problem| {
                let recs = &by_problem[problem];
                let points: BTreeSet<usize> = recs.iter().map(|r| r.point_index).collect();
                let common: BTreeSet<usize> = points
                    .iter()
                    .copied()
                    .filter(|&k| {
                        algorithms.iter().all(|&a| {
                            recs.iter()
                                .any(|r| r.point_index == k && r.result.algorithm == a && r.result.converged)
                        })
                    })
                    .collect();
                let cells = algorithms
                    .iter()
                    .map(|&a| {
                        let mine: Vec<&&RunRecord> = recs.iter().filter(|r| r.result.algorithm == a).collect();
                        let conv: Vec<&&RunRecord> =
                            mine.iter().copied().filter(|r| common.contains(&r.point_index)).collect();
                        Cell {
                            algorithm: a,
                            runs: mine.len(),
                            nonconv: mine.iter().filter(|r| !r.result.converged).count(),
                            mean_iterations: mean(conv.iter().map(|r| r.result.iterations as f64)),
                            mean_cpu_time: mean(conv.iter().map(|r| r.result.wall_time)),
                            mean_step: mean(conv.iter().filter_map(|r| r.result.mean_step)),
                        }
                    })
                    .collect();
                TableRow {
                    problem: problem.to_string(),
                    points: points.len(),
                    common: common.len(),
                    cells,
                }
            })
            .collect();
        MetricsTable { algorithms, rows }
    }

    /// `problems × algorithms` values of one metric.
    pub fn values(&self, metric: Metric) -> Vec<Vec<Option<f64>>> {
        self.rows
            .iter()
            .map(|r| r.cells.iter().map(|c| c.value(metric)).collect())
            .collect()
    }

    /// CSV with columns `problem, points, common`, then
    /// `nonconv_<alg>`, `iterations_<alg>`, `cpu_time_<alg>`, `step_size_<alg>`
    /// for every algorithm. Absent means are written as `-`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("problem,points,common");
        for group in ["nonconv", "iterations", "cpu_time", "step_size"] {
            for a in &self.algorithms {
                let _ = write!(out, ",{group}_{a}");
            }
        }
        out.push('\n');
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v}"));
        for row in &self.rows {
            let _ = write!(out, "{},{},{}", row.problem, row.points, row.common);
            for c in &row.cells {
                let _ = write!(out, ",{}", c.nonconv);
            }
            for c in &row.cells {
                let _ = write!(out, ",{}", fmt(c.mean_iterations));
            }
            for c in &row.cells {
                let _ = write!(out, ",{}", fmt(c.mean_cpu_time));
            }
            for c in &row.cells {
                let _ = write!(out, ",{}", fmt(c.mean_step));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), Error> {
        if self.rows.is_empty() {
            return Err(Error::Experiment("no records to tabulate".into()));
        }
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
