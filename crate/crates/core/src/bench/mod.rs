//! Experiment harness: initial points, the run matrix and its record store,
//! metric tables, performance profiles and the cone experiment.

mod cone_experiment;
mod profile;
mod store;
mod table;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{Cone, ConeSpec};
use crate::problem::Bounds;
use crate::solvers::{Algorithm, SolverConfig};

pub use cone_experiment::{cone_experiment, ConeRun, ValueCloud};
pub use profile::{performance_profile, profile_from_table, render_svg, write_svg, ProfileCurve, ProfileSet};
pub use store::{read_store, run_matrix, threads_from_env, MatrixSummary, RunRecord, THREADS_ENV};
pub use table::{Cell, Metric, MetricsTable, TableRow};

/// A cone given either as a preset name or by its dual normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConeChoice {
    Preset(String),
    Normals(ConeSpec),
}

impl ConeChoice {
    pub fn resolve(&self) -> Result<Cone, crate::Error> {
        Ok(match self {
            ConeChoice::Preset(s) => Cone::from_preset(s)?,
            ConeChoice::Normals(spec) => Cone::try_from(spec.clone())?,
        })
    }
}

/// One experiment: every listed algorithm from the same sampled points on
/// every listed problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem_ids: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    pub points_per_problem: usize,
    /// Overrides `solver.it_max`.
    pub it_max: usize,
    pub rng_seed: u64,
    pub metrics: Vec<Metric>,
    /// Ordering cone; the orthant of matching dimension when absent.
    pub cone: Option<ConeChoice>,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem_ids: crate::problem::list_ids().iter().map(|s| s.to_string()).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            points_per_problem: 100,
            it_max: 100,
            rng_seed: 0,
            metrics: Metric::ALL.to_vec(),
            cone: None,
            solver: SolverConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), crate::Error> {
        if self.points_per_problem == 0 {
            return Err(crate::Error::Config("points_per_problem must be at least 1".into()));
        }
        if self.algorithms.is_empty() || self.problem_ids.is_empty() {
            return Err(crate::Error::Config("need at least one problem and one algorithm".into()));
        }
        self.solver_config().validate()
    }

    /// Cone for a problem with `m` objectives.
    pub fn cone_for(&self, m: usize) -> Result<Cone, crate::Error> {
        let cone = match &self.cone {
            Some(c) => c.resolve()?,
            None => Cone::orthant(m),
        };
        if cone.dim() != m {
            return Err(crate::Error::Config(format!(
                "cone has dimension {}, problem has m = {m}",
                cone.dim()
            )));
        }
        Ok(cone)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            it_max: self.it_max,
            ..self.solver.clone()
        }
    }
}

/// `n_points` uniform points in `bounds`. Point `i` is drawn from stream `i`
/// of a ChaCha generator keyed by `seed`, so it does not depend on how many
/// points are requested.
pub fn sample_points(bounds: &Bounds, n_points: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n_points)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            bounds
                .lower
                .iter()
                .zip(&bounds.upper)
                .map(|(&lo, &hi)| rng.random_range(lo..=hi))
                .collect()
        })
        .collect()
}

/// Seed of the sampler for one problem: the experiment seed mixed with a
/// FNV-1a hash of the id.
pub fn problem_seed(seed: u64, problem_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in problem_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed ^ h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let b = Bounds::new(vec![0.0, -2.0], vec![1.0, 5.0]).unwrap();
        assert!(sample_points(&b, 0, 1).is_empty());
        let p = sample_points(&b, 50, 42);
        assert_eq!(p, sample_points(&b, 50, 42));
        assert!(p.iter().all(|x| b.contains(x)));
        assert_ne!(p, sample_points(&b, 50, 43));
        // A prefix does not depend on the count.
        assert_eq!(&sample_points(&b, 10, 42)[..], &p[..10]);
    }

    #[test]
    fn problem_seeds_differ() {
        assert_ne!(problem_seed(1, "hil_n2_m2"), problem_seed(1, "dgo2_n1_m2"));
        assert_eq!(problem_seed(1, "a"), problem_seed(1, "a"));
    }

    #[test]
    fn config_json_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"problem_ids": ["hil_n2_m2"], "algorithms": ["max"], "points_per_problem": 3}"#)
                .unwrap();
        assert_eq!(c.it_max, 100);
        assert_eq!(c.metrics.len(), 4);
        c.validate().unwrap();
        let bad = ExperimentConfig { points_per_problem: 0, ..c };
        assert!(bad.validate().is_err());
    }
}
