use crate::cone::Cone;
use crate::linalg;
use crate::partition::MinimalStructure;
use crate::problem::Problem;
use crate::subproblem::{self, DerivativeCache, ModelSet};
use crate::Error;

use super::memory::{AvgMemory, MaxMemory, Memory};
use super::{rows, Algorithm, IterationRecord, RunResult, RunState, SolverConfig};

/// `ρ_j = −Δ(f^{a_j}(x+s) − ref_j) / Δ(−m_j(s))` for every block of `models`.
pub fn reduction_ratios(
    trial: &[Vec<f64>],
    reference: &[Vec<f64>],
    models: &ModelSet,
    cone: &Cone,
    s: &[f64],
) -> Result<Vec<f64>, Error> {
    let mut rho = Vec::with_capacity(models.blocks.len());
    for (j, block) in models.blocks.iter().enumerate() {
        let pred = subproblem::predicted_reduction(block, cone, s);
        if !(pred > 0.0) {
            return Err(Error::PredictedReduction {
                model: j,
                value: pred,
            });
        }
        let actual = -cone.scalarize(&linalg::sub(&trial[j], &reference[j]));
        rho.push(actual / pred);
    }
    Ok(rho)
}

/// Monotone, max-type or average-type trust-region run.
pub fn run_trust_region(
    algorithm: Algorithm,
    problem: &Problem,
    cone: &Cone,
    x0: &[f64],
    config: &SolverConfig,
    keep_trace: bool,
) -> RunResult {
    let mut state = RunState::new(algorithm, problem, x0, config.omega0, keep_trace);
    let mut x = x0.to_vec();
    let mut radius = config.omega0;
    let mut t_last = f64::NAN;
    let outcome = drive(algorithm, problem, cone, config, &mut state, &mut x, &mut radius, &mut t_last);
    if let Err(e) = outcome {
        state.fail(&e);
    }
    state.finish(&x, t_last, radius)
}

#[allow(clippy::too_many_arguments)]
fn drive(
    algorithm: Algorithm,
    problem: &Problem,
    cone: &Cone,
    config: &SolverConfig,
    state: &mut RunState,
    x: &mut Vec<f64>,
    radius: &mut f64,
    t_last: &mut f64,
) -> Result<(), Error> {
    let mut f = problem.eval_all(x)?;
    let mut memory = match algorithm {
        Algorithm::Max => Memory::Max(MaxMemory::new(config.memory_depth, f.clone())),
        Algorithm::Avg => Memory::Avg(AvgMemory::new(config.mu, f.clone())),
        _ => Memory::monotone(f.clone()),
    };
    let mut structure = MinimalStructure::from_values(&f, cone, config.value_tol);
    let mut cache = DerivativeCache::new(problem, x);

    for k in 0..=config.it_max {
        let (sol, models) =
            subproblem::solve_subproblem(&mut cache, cone, &structure, *radius, config.partition_cap)?;
        let mut t = sol.t_star;
        if t > 0.0 {
            log::warn!("{}: subproblem returned t = {t:e} > 0, clamped", problem.name());
            t = 0.0;
        }
        *t_last = t;
        if t.abs() < config.epsilon {
            state.result.converged = true;
            return Ok(());
        }
        if k == config.it_max {
            break;
        }

        let a = sol.a_star;
        let s = sol.s_star;
        let mut x_trial = linalg::add(x, &s);
        problem.bounds().clamp(&mut x_trial);
        let f_trial = problem.eval_all(&x_trial)?;
        let trial_rows = rows(&f_trial, &a);
        let reference = memory.reference(&a, &f);
        let rho = reduction_ratios(&trial_rows, &reference, &models, cone, &s)?;
        let (accepted, next_radius) = config.accept_and_update(&rho, *radius);

        let step_norm = if accepted {
            linalg::norm2(&linalg::sub(&x_trial, x))
        } else {
            0.0
        };
        let x_k = x.clone();
        if accepted {
            *x = x_trial;
            f = f_trial;
            structure = MinimalStructure::from_values(&f, cone, config.value_tol);
            cache = DerivativeCache::new(problem, x);
        }
        memory.commit(accepted, &f);

        state.record(IterationRecord {
            k,
            x: x_k,
            omega: *radius,
            t,
            rho,
            accepted,
            step_norm,
            reference,
            trial: trial_rows,
            next: rows(&f, &a),
            reference_after: memory.snapshot(&a),
            a,
        });

        *radius = next_radius;
        if *radius < config.min_radius {
            log::warn!("{}: trust-region radius underflow at k = {k}", problem.name());
            state.result.events.push(format!("radius_underflow@{k}"));
            break;
        }
    }
    Ok(())
}
