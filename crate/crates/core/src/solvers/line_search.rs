//! Steepest descent and conjugate gradient baselines.
//!
//! Both use the first-order direction
//! `v(x) = argmin_s max_{j,l} w_lᵀ G_j s + ½‖s‖²`, i.e. minus the minimum-norm
//! point of `conv{G_jᵀ w_l}`, minimized over the partition set (largest `‖v‖`
//! wins). They stop once `‖v‖ < ε`. Trial points are clipped to the box and
//! the Armijo test is applied to the clipped step. The conjugate-gradient
//! update uses the conjugate-descent ratio scaled by `0.99(1 − σ)` with the
//! same Armijo search. Without a Wolfe search the directions can turn almost
//! orthogonal to `v`, so the update restarts from `v` unless
//! `f(x, d)/‖d‖ ≤ σ f(x, v)/‖v‖`, where `f(x, d) = max_j Δ(G_j(x) d)`.

use crate::cone::Cone;
use crate::linalg::{self, Matrix};
use crate::partition::{self, MinimalStructure, PartitionElement};
use crate::problem::Problem;
use crate::Error;

use super::{rows, Algorithm, IterationRecord, RunResult, RunState, SolverConfig};

/// Largest number of backtracking steps before the search gives up.
const MAX_BACKTRACKS: usize = 60;

/// Steepest direction at `x`: `(a, v, Jacobians of f^{a_j})`.
pub fn steepest_direction(
    problem: &Problem,
    cone: &Cone,
    x: &[f64],
    structure: &MinimalStructure,
    cap: usize,
) -> Result<(PartitionElement, Vec<f64>, Vec<Matrix>), Error> {
    let mut jacs: Vec<Option<Matrix>> = vec![None; problem.p()];
    let mut best: Option<(PartitionElement, Vec<f64>, f64)> = None;
    for a in partition::partition_iter(structure, cap)? {
        let mut cs = Vec::with_capacity(a.len() * cone.normals().len());
        for &i in &a {
            if jacs[i].is_none() {
                jacs[i] = Some(problem.jacobian(i, x)?);
            }
            let g = jacs[i].as_ref().expect("filled above");
            for w in cone.normals() {
                cs.push(g.tr_mul_vec(w));
            }
        }
        let (_, mn) = linalg::min_norm_point(&cs);
        let norm = linalg::norm2(&mn);
        let better = best.as_ref().is_none_or(|(_, _, b)| norm > b + 1e-12);
        if better {
            best = Some((a, linalg::scale(&mn, -1.0), norm));
        }
    }
    let (a, v, _) = best.expect("partition set is never empty");
    let g = a
        .iter()
        .map(|&i| jacs[i].clone().expect("computed for every visited index"))
        .collect();
    Ok((a, v, g))
}

/// `max_j Δ(G_j d)`.
fn directional(cone: &Cone, jacs: &[Matrix], d: &[f64]) -> f64 {
    jacs.iter()
        .map(|g| cone.scalarize(&g.mul_vec(d)))
        .fold(f64::NEG_INFINITY, f64::max)
}

struct Armijo {
    x: Vec<f64>,
    f: Matrix,
    alpha: f64,
    step_norm: f64,
}

/// Backtracking from `α = 1` on the clipped trial point. `None` when no
/// backtracking step moves the iterate and satisfies the decrease test.
fn armijo(
    problem: &Problem,
    cone: &Cone,
    x: &[f64],
    f: &Matrix,
    a: &[usize],
    jacs: &[Matrix],
    d: &[f64],
    beta: f64,
    nu: f64,
) -> Result<Option<Armijo>, Error> {
    let mut alpha = 1.0;
    for _ in 0..MAX_BACKTRACKS {
        let mut xt: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        problem.bounds().clamp(&mut xt);
        let step = linalg::sub(&xt, x);
        let step_norm = linalg::norm2(&step);
        if step_norm == 0.0 {
            return Ok(None);
        }
        let ft = problem.eval_all(&xt)?;
        if sufficient_decrease(cone, f, &ft, a, jacs, &step, beta) {
            return Ok(Some(Armijo {
                x: xt,
                f: ft,
                alpha,
                step_norm,
            }));
        }
        alpha *= nu;
    }
    Ok(None)
}

fn sufficient_decrease(cone: &Cone, f: &Matrix, ft: &Matrix, a: &[usize], jacs: &[Matrix], step: &[f64], beta: f64) -> bool {
    a.iter().zip(jacs).all(|(&i, g)| {
        let lin = g.mul_vec(step);
        let diff: Vec<f64> = ft
            .row(i)
            .iter()
            .zip(f.row(i))
            .zip(&lin)
            .map(|((fn_, fo), l)| fn_ - fo - beta * l)
            .collect();
        cone.scalarize(&diff) <= 0.0
    })
}

pub fn run_sd(problem: &Problem, cone: &Cone, x0: &[f64], config: &SolverConfig, trace: bool) -> RunResult {
    descent(Algorithm::Sd, problem, cone, x0, config, trace)
}

pub fn run_cg(problem: &Problem, cone: &Cone, x0: &[f64], config: &SolverConfig, trace: bool) -> RunResult {
    descent(Algorithm::Cg, problem, cone, x0, config, trace)
}

fn descent(
    algorithm: Algorithm,
    problem: &Problem,
    cone: &Cone,
    x0: &[f64],
    config: &SolverConfig,
    keep_trace: bool,
) -> RunResult {
    let mut state = RunState::new(algorithm, problem, x0, 1.0, keep_trace);
    let mut x = x0.to_vec();
    let mut t_last = f64::NAN;
    if let Err(e) = descent_loop(algorithm, problem, cone, config, &mut state, &mut x, &mut t_last) {
        state.fail(&e);
    }
    state.finish(&x, t_last, 1.0)
}

fn descent_loop(
    algorithm: Algorithm,
    problem: &Problem,
    cone: &Cone,
    config: &SolverConfig,
    state: &mut RunState,
    x: &mut Vec<f64>,
    t_last: &mut f64,
) -> Result<(), Error> {
    let beta = match algorithm {
        Algorithm::Cg => config.armijo_rho,
        _ => config.beta_sd,
    };
    let mut f = problem.eval_all(x)?;
    // Previous direction and its slope f(x_{k−1}, d_{k−1}).
    let mut prev: Option<(Vec<f64>, f64)> = None;
    for k in 0..=config.it_max {
        let structure = MinimalStructure::from_values(&f, cone, config.value_tol);
        let (a, v, jacs) = steepest_direction(problem, cone, x, &structure, config.partition_cap)?;
        let vnorm = linalg::norm2(&v);
        *t_last = -vnorm;
        if vnorm < config.epsilon {
            state.result.converged = true;
            return Ok(());
        }
        if k == config.it_max {
            break;
        }

        let mut d = v.clone();
        if algorithm == Algorithm::Cg {
            if let Some((d_prev, slope_prev)) = &prev {
                let beta_cd = directional(cone, &jacs, &v) / slope_prev;
                let beta_cg = 0.99 * (1.0 - config.sigma) * beta_cd;
                let cand: Vec<f64> = v.iter().zip(d_prev).map(|(vi, di)| vi + beta_cg * di).collect();
                let descent = jacs.iter().all(|g| cone.scalarize(&g.mul_vec(&cand)) < 0.0);
                let angle_ok = directional(cone, &jacs, &cand) / linalg::norm2(&cand)
                    <= config.sigma * directional(cone, &jacs, &v) / vnorm;
                if descent && angle_ok {
                    d = cand;
                }
            }
        }
        let slope = directional(cone, &jacs, &d);

        let step = armijo(problem, cone, x, &f, &a, &jacs, &d, beta, config.nu)?;
        let Some(step) = step else {
            state.result.events.push(format!("line_search_stall@{k}"));
            state.record(IterationRecord {
                k,
                x: x.clone(),
                omega: 0.0,
                t: -vnorm,
                a,
                rho: Vec::new(),
                accepted: false,
                step_norm: 0.0,
                reference: Vec::new(),
                trial: Vec::new(),
                next: Vec::new(),
                reference_after: None,
            });
            break;
        };
        let reference = rows(&f, &a);
        let x_k = std::mem::replace(x, step.x);
        f = step.f;
        state.record(IterationRecord {
            k,
            x: x_k,
            omega: step.alpha,
            t: -vnorm,
            rho: Vec::new(),
            accepted: true,
            step_norm: step.step_norm,
            reference,
            trial: rows(&f, &a),
            next: rows(&f, &a),
            reference_after: None,
            a,
        });
        prev = Some((d, slope));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::registry::quadratic_plant;
    use crate::solvers::run;

    fn plant() -> Problem {
        quadratic_plant(Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 4.0]]))
    }

    #[test]
    fn sd_reaches_quadratic_minimizer() {
        let r = run(Algorithm::Sd, &plant(), &Cone::orthant(1), &[3.0, -2.0], &SolverConfig::default(), false).unwrap();
        assert!(r.converged, "{r:?}");
        // ‖∇f‖ = ‖Ax‖ < ε and A has smallest eigenvalue 3 − √2 > 1.
        assert!(linalg::norm2(&r.final_point) < 1e-3);
    }

    #[test]
    fn zero_direction_is_immediate() {
        let r = run(Algorithm::Cg, &plant(), &Cone::orthant(1), &[0.0, 0.0], &SolverConfig::default(), false).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn cg_first_step_matches_sd() {
        let cfg = SolverConfig { it_max: 1, ..Default::default() };
        let sd = run(Algorithm::Sd, &plant(), &Cone::orthant(1), &[3.0, -2.0], &cfg, false).unwrap();
        let cg = run(Algorithm::Cg, &plant(), &Cone::orthant(1), &[3.0, -2.0], &cfg, false).unwrap();
        assert_eq!(sd.final_point, cg.final_point);
        let cg_full = run(Algorithm::Cg, &plant(), &Cone::orthant(1), &[3.0, -2.0], &SolverConfig::default(), false).unwrap();
        assert!(cg_full.converged, "{cg_full:?}");
    }
}
