//! Trust-region drivers (monotone, max-type and average-type references) and
//! the steepest-descent / conjugate-gradient baselines.

mod config;
mod line_search;
pub mod memory;
mod trust_region;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::linalg::Matrix;
use crate::problem::Problem;
use crate::Error;

pub use config::SolverConfig;
pub use line_search::{run_cg, run_sd, steepest_direction};
pub use trust_region::{reduction_ratios, run_trust_region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Trm,
    Max,
    Avg,
    Sd,
    Cg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Sd,
        Algorithm::Cg,
        Algorithm::Trm,
        Algorithm::Max,
        Algorithm::Avg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Trm => "trm",
            Algorithm::Max => "max",
            Algorithm::Avg => "avg",
            Algorithm::Sd => "sd",
            Algorithm::Cg => "cg",
        }
    }

    pub fn is_trust_region(self) -> bool {
        matches!(self, Algorithm::Trm | Algorithm::Max | Algorithm::Avg)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "trm" => Ok(Algorithm::Trm),
            "max" | "max-ntrm" | "maxntrm" => Ok(Algorithm::Max),
            "avg" | "avg-ntrm" | "avgntrm" => Ok(Algorithm::Avg),
            "sd" => Ok(Algorithm::Sd),
            "cg" => Ok(Algorithm::Cg),
            other => Err(Error::Config(format!(
                "unknown algorithm `{other}` (expected trm, max, avg, sd or cg)"
            ))),
        }
    }
}

/// One iteration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    /// Trust-region radius (trust-region drivers) or accepted step length
    /// factor (line-search drivers).
    pub omega: f64,
    /// Criticality value: `t_k` for trust-region drivers, `−‖v_k‖` otherwise.
    pub t: f64,
    pub a: Vec<usize>,
    pub rho: Vec<f64>,
    pub accepted: bool,
    pub step_norm: f64,
    /// `ref_j` used in the ratio test.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference: Vec<Vec<f64>>,
    /// `f^{a_j}(x_k + s_k)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trial: Vec<Vec<f64>>,
    /// `f^{a_j}(x_{k+1})`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub next: Vec<Vec<f64>>,
    /// Averaged reference rows `C_{k+1}` at `a^k`, average-type runs only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_after: Option<Vec<Vec<f64>>>,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub problem: String,
    pub algorithm: Algorithm,
    pub converged: bool,
    pub iterations: usize,
    /// Wall-clock seconds spent inside the driver.
    pub wall_time: f64,
    pub final_point: Vec<f64>,
    /// Last criticality value; absent when the run failed before computing one.
    pub final_t: Option<f64>,
    pub final_radius: f64,
    /// Mean `‖x_{k+1} − x_k‖` over all iterations (rejected ones count as 0);
    /// absent when no iteration ran.
    pub mean_step: Option<f64>,
    /// Machine-readable failure code when the run aborted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
    /// Notable solver events (radius underflow, line-search stall, …).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<IterationRecord>,
}

/// Runs `algorithm` from `x0`. Errors inside the run are reported through
/// [`RunResult::error`]; only invalid inputs fail outright.
pub fn run(
    algorithm: Algorithm,
    problem: &Problem,
    cone: &Cone,
    x0: &[f64],
    config: &SolverConfig,
    trace: bool,
) -> Result<RunResult, Error> {
    config.validate()?;
    if x0.len() != problem.n() {
        return Err(Error::Dimension {
            expected: problem.n(),
            got: x0.len(),
        });
    }
    if cone.dim() != problem.m() {
        return Err(Error::Config(format!(
            "cone has dimension {}, problem {} has m = {}",
            cone.dim(),
            problem.name(),
            problem.m()
        )));
    }
    if !problem.bounds().contains(x0) {
        return Err(Error::Config(format!(
            "initial point {x0:?} lies outside the box of {}",
            problem.name()
        )));
    }
    Ok(match algorithm {
        Algorithm::Sd => run_sd(problem, cone, x0, config, trace),
        Algorithm::Cg => run_cg(problem, cone, x0, config, trace),
        _ => run_trust_region(algorithm, problem, cone, x0, config, trace),
    })
}

pub(crate) fn rows(m: &Matrix, a: &[usize]) -> Vec<Vec<f64>> {
    a.iter().map(|&i| m.row(i).to_vec()).collect()
}

/// Shared bookkeeping of the drivers.
pub(crate) struct RunState {
    pub(crate) result: RunResult,
    started: std::time::Instant,
    step_sum: f64,
    keep_trace: bool,
}

impl RunState {
    pub(crate) fn new(algorithm: Algorithm, problem: &Problem, x0: &[f64], radius: f64, keep_trace: bool) -> Self {
        RunState {
            result: RunResult {
                problem: problem.name().to_string(),
                algorithm,
                converged: false,
                iterations: 0,
                wall_time: 0.0,
                final_point: x0.to_vec(),
                final_t: None,
                final_radius: radius,
                mean_step: None,
                error: None,
                error_message: None,
                events: Vec::new(),
                trace: Vec::new(),
            },
            started: std::time::Instant::now(),
            step_sum: 0.0,
            keep_trace,
        }
    }

    pub(crate) fn record(&mut self, rec: IterationRecord) {
        self.step_sum += rec.step_norm;
        self.result.iterations = rec.k + 1;
        if self.keep_trace {
            self.result.trace.push(rec);
        }
    }

    pub(crate) fn fail(&mut self, err: &Error) {
        log::debug!("{} / {}: {err}", self.result.problem, self.result.algorithm);
        self.result.converged = false;
        self.result.error = Some(err.code().to_string());
        self.result.error_message = Some(err.to_string());
    }

    pub(crate) fn finish(mut self, x: &[f64], t: f64, radius: f64) -> RunResult {
        let r = &mut self.result;
        r.final_point = x.to_vec();
        r.final_t = t.is_finite().then_some(t);
        r.final_radius = radius;
        r.mean_step = (r.iterations > 0).then(|| self.step_sum / r.iterations as f64);
        r.wall_time = self.started.elapsed().as_secs_f64();
        self.result
    }
}
