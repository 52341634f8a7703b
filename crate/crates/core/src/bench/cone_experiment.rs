//! Same start, same algorithms, different ordering cones.

use serde::Serialize;

use crate::cone::Cone;
use crate::problem::Problem;
use crate::solvers::{self, Algorithm, RunResult, SolverConfig};
use crate::Error;

/// All values `f^i(x)` at one iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueCloud {
    /// `initial`, `intermediate` or `final`.
    pub label: String,
    pub k: usize,
    pub x: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeRun {
    pub cone: String,
    /// Run summary without the trace.
    pub result: RunResult,
    /// `x_0, …, x_K` where `K` is the iteration count.
    pub trajectory: Vec<Vec<f64>>,
    pub clouds: Vec<ValueCloud>,
}

/// Runs every algorithm under every named cone from `x0` and collects the
/// value clouds at the first, middle and last iterate.
pub fn cone_experiment(
    problem: &Problem,
    x0: &[f64],
    cones: &[(String, Cone)],
    algorithms: &[Algorithm],
    config: &SolverConfig,
) -> Result<Vec<ConeRun>, Error> {
    if problem.m() != 2 {
        return Err(Error::Config(format!(
            "cone experiment plots the image space, {} has m = {}",
            problem.name(),
            problem.m()
        )));
    }
    let mut out = Vec::with_capacity(cones.len() * algorithms.len());
    for (name, cone) in cones {
        for &alg in algorithms {
            let mut result = solvers::run(alg, problem, cone, x0, config, true)?;
            let mut trajectory: Vec<Vec<f64>> = result.trace.iter().map(|r| r.x.clone()).collect();
            trajectory.push(result.final_point.clone());
            result.trace.clear();

            let last = trajectory.len() - 1;
            let mut picks = vec![("initial", 0)];
            if last >= 2 {
                picks.push(("intermediate", last / 2));
            }
            if last >= 1 {
                picks.push(("final", last));
            }
            let mut clouds = Vec::with_capacity(picks.len());
            for (label, k) in picks {
                let f = problem.eval_all(&trajectory[k])?;
                clouds.push(ValueCloud {
                    label: label.to_string(),
                    k,
                    x: trajectory[k].clone(),
                    values: (0..f.rows()).map(|i| f.row(i).to_vec()).collect(),
                });
            }
            out.push(ConeRun {
                cone: name.clone(),
                result,
                trajectory,
                clouds,
            });
        }
    }
    Ok(out)
}
