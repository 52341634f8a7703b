//! Set-valued objectives `F(x) = {f^1(x), …, f^p(x)}` with `f^i : R^n → R^m`.

mod fd;
pub mod registry;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

pub use registry::{list_ids, registry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem id `{0}`")]
    UnknownId(String),
    #[error("{problem}: component {index} is not finite at x = {x:?}")]
    Domain {
        problem: String,
        index: usize,
        x: Vec<f64>,
    },
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("point has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Axis-aligned box `[lower, upper]` with `lower < upper` componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ProblemError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(ProblemError::InvalidBox(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(ProblemError::InvalidBox(format!(
                    "coordinate {k}: [{l}, {u}]"
                )));
            }
        }
        Ok(Bounds { lower, upper })
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Bounds::new(vec![lo; n], vec![hi; n]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Step bounds `lower − x ≤ s ≤ upper − x`.
    pub fn shift(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let lo = self.lower.iter().zip(x).map(|(l, v)| (l - v).min(0.0)).collect();
        let hi = self.upper.iter().zip(x).map(|(u, v)| (u - v).max(0.0)).collect();
        (lo, hi)
    }
}

/// Gradient rows and per-component Hessians of one `f^i` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    /// `m × n`, row `r` is `∇f^{i,r}(x)ᵀ`.
    pub jacobian: Matrix,
    /// `m` symmetric `n × n` matrices.
    pub hessians: Vec<Matrix>,
}

type ComponentFn = dyn Fn(usize, &[f64], &mut [f64]) + Send + Sync;
type JacobianFn = dyn Fn(usize, &[f64], &mut Matrix) + Send + Sync;

/// Problem metadata as emitted by `list-problems`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Number of perturbation constants whose `tan`/`log` argument had to be
    /// clamped into `(δ, π − δ)` when the instance was built.
    pub clamped_constants: usize,
}

/// A set-valued objective with its domain box.
#[derive(Clone)]
pub struct Problem {
    name: String,
    n: usize,
    m: usize,
    p: usize,
    bounds: Bounds,
    eval: Arc<ComponentFn>,
    jacobian: Option<Arc<JacobianFn>>,
    clamped_constants: usize,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("p", &self.p)
            .field("bounds", &self.bounds)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl Problem {
    /// `eval(i, x, out)` writes `f^i(x)` (0-based `i`) into `out` (length `m`).
    pub fn new<F>(name: impl Into<String>, m: usize, p: usize, bounds: Bounds, eval: F) -> Self
    where
        F: Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        assert!(m > 0 && p > 0, "m and p must be positive");
        Problem {
            name: name.into(),
            n: bounds.dim(),
            m,
            p,
            bounds,
            eval: Arc::new(eval),
            jacobian: None,
            clamped_constants: 0,
        }
    }

    /// Attaches an analytic Jacobian `(i, x, out)` with `out` of shape `m × n`.
    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(usize, &[f64], &mut Matrix) + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub(crate) fn with_clamped_constants(mut self, count: usize) -> Self {
        self.clamped_constants = count;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn info(&self) -> ProblemInfo {
        ProblemInfo {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            p: self.p,
            lower: self.bounds.lower.clone(),
            upper: self.bounds.upper.clone(),
            clamped_constants: self.clamped_constants,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.n {
            return Err(ProblemError::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `f^i(x)` without finiteness checks (used inside difference stencils).
    pub(crate) fn eval_raw(&self, i: usize, x: &[f64], out: &mut [f64]) {
        (self.eval)(i, x, out)
    }

    /// `f^i(x)`, 0-based `i`.
    pub fn eval_one(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_dim(x)?;
        assert!(i < self.p, "component index {i} out of range (p = {})", self.p);
        let mut out = vec![0.0; self.m];
        (self.eval)(i, x, &mut out);
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(ProblemError::Domain {
                problem: self.name.clone(),
                index: i,
                x: x.to_vec(),
            })
        }
    }

    /// The `p × m` value matrix whose row `i` is `f^i(x)`.
    pub fn eval_all(&self, x: &[f64]) -> Result<Matrix, ProblemError> {
        self.check_dim(x)?;
        let mut values = Matrix::zeros(self.p, self.m);
        for i in 0..self.p {
            (self.eval)(i, x, values.row_mut(i));
            if !values.row(i).iter().all(|v| v.is_finite()) {
                return Err(ProblemError::Domain {
                    problem: self.name.clone(),
                    index: i,
                    x: x.to_vec(),
                });
            }
        }
        Ok(values)
    }

    /// Jacobian and Hessians of `f^i` at `x` by box-aware central differences
    /// (the analytic Jacobian replaces the innermost difference when present).
    pub fn derivatives(&self, i: usize, x: &[f64]) -> Result<DerivativeBundle, ProblemError> {
        self.check_dim(x)?;
        let bundle = fd::derivatives(self, i, x);
        if bundle.jacobian.is_finite() && bundle.hessians.iter().all(Matrix::is_finite) {
            Ok(bundle)
        } else {
            Err(ProblemError::Domain {
                problem: self.name.clone(),
                index: i,
                x: x.to_vec(),
            })
        }
    }

    /// Jacobian of `f^i` at `x`: analytic when available, else differenced.
    pub fn jacobian(&self, i: usize, x: &[f64]) -> Result<Matrix, ProblemError> {
        self.check_dim(x)?;
        let jac = self
            .analytic_jacobian(i, x)
            .unwrap_or_else(|| fd::fd_jacobian(self, i, x));
        if jac.is_finite() {
            Ok(jac)
        } else {
            Err(ProblemError::Domain {
                problem: self.name.clone(),
                index: i,
                x: x.to_vec(),
            })
        }
    }

    /// Finite-difference Jacobian only (ignores any analytic Jacobian).
    pub fn fd_jacobian(&self, i: usize, x: &[f64]) -> Result<Matrix, ProblemError> {
        self.check_dim(x)?;
        let jac = fd::fd_jacobian(self, i, x);
        if jac.is_finite() {
            Ok(jac)
        } else {
            Err(ProblemError::Domain {
                problem: self.name.clone(),
                index: i,
                x: x.to_vec(),
            })
        }
    }

    pub(crate) fn analytic_jacobian(&self, i: usize, x: &[f64]) -> Option<Matrix> {
        self.jacobian.as_ref().map(|jac| {
            let mut out = Matrix::zeros(self.m, self.n);
            jac(i, x, &mut out);
            out
        })
    }
}
