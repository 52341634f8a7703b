use serde::{Deserialize, Serialize};

use crate::partition::{DEFAULT_CAP, DEFAULT_VALUE_TOL};
use crate::Error;

/// Parameters shared by all drivers. Missing JSON fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub omega0: f64,
    pub omega_max: f64,
    pub epsilon: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Max-type memory depth `N̂`.
    pub memory_depth: usize,
    /// Constant averaging weight `μ_k` of the average-type reference.
    pub mu: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub it_max: usize,
    /// Armijo constant of the conjugate-gradient line search.
    pub armijo_rho: f64,
    /// Armijo constant of steepest descent.
    pub beta_sd: f64,
    /// Backtracking factor.
    pub nu: f64,
    pub sigma: f64,
    pub partition_cap: usize,
    pub value_tol: f64,
    /// Runs stop (not converged) once the radius drops below this.
    pub min_radius: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            omega0: 1.0,
            omega_max: 20.0,
            epsilon: 1e-3,
            eta1: 0.001,
            eta2: 0.75,
            gamma1: 0.4,
            gamma2: 0.9,
            memory_depth: 10,
            mu: 0.5,
            mu_min: 0.0,
            mu_max: 1.0,
            it_max: 100,
            armijo_rho: 1e-4,
            beta_sd: 1e-4,
            nu: 0.5,
            sigma: 0.1,
            partition_cap: DEFAULT_CAP,
            value_tol: DEFAULT_VALUE_TOL,
            min_radius: 1e-14,
        }
    }
}

impl SolverConfig {
    /// Defaults with the shallower memory `N̂ = 4`.
    pub fn fast() -> Self {
        SolverConfig {
            memory_depth: 4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(0.0 < self.eta1 && self.eta1 < self.eta2 && self.eta2 < 1.0) {
            return bad(format!("need 0 < eta1 < eta2 < 1, got {} and {}", self.eta1, self.eta2));
        }
        if !(0.0 < self.gamma1 && self.gamma1 < self.gamma2 && self.gamma2 < 1.0) {
            return bad(format!(
                "need 0 < gamma1 < gamma2 < 1, got {} and {}",
                self.gamma1, self.gamma2
            ));
        }
        if !(0.0 < self.omega0 && self.omega0 <= self.omega_max && self.omega_max.is_finite()) {
            return bad(format!(
                "need 0 < omega0 <= omega_max < inf, got {} and {}",
                self.omega0, self.omega_max
            ));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        // μ_max = 1 is accepted as a bound but μ itself must stay below 1.
        if !(0.0 <= self.mu_min && self.mu_min <= self.mu && self.mu <= self.mu_max && self.mu < 1.0)
        {
            return bad(format!(
                "need 0 <= mu_min <= mu <= mu_max and mu < 1, got mu = {}",
                self.mu
            ));
        }
        for (name, v) in [("armijo_rho", self.armijo_rho), ("beta_sd", self.beta_sd), ("nu", self.nu), ("sigma", self.sigma)] {
            if !(0.0 < v && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.partition_cap == 0 {
            return bad("partition_cap must be positive".into());
        }
        if !(self.value_tol >= 0.0) || !(self.min_radius >= 0.0) {
            return bad("value_tol and min_radius must be non-negative".into());
        }
        Ok(())
    }

    /// Radius after a step with ratios `rho`: returns `(accepted, Ω_next)`.
    pub fn accept_and_update(&self, rho: &[f64], radius: f64) -> (bool, f64) {
        let accepted = rho.iter().all(|r| *r >= self.eta1);
        let next = if !accepted {
            0.5 * (self.gamma1 + self.gamma2) * radius
        } else if rho.iter().all(|r| *r >= self.eta2) {
            (2.0 * radius).min(self.omega_max)
        } else {
            radius
        };
        (accepted, next)
    }
}
