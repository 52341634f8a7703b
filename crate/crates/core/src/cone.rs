//! Polyhedral ordering cones.
//!
//! A cone is stored through its dual halfspace normals,
//! `K = { y : w_jᵀ y ≥ 0 for all j }`, with every normal rescaled to unit
//! ℓ₁ norm. The scalarization `Δ(y) = max_j w_jᵀ y` is then negative exactly on
//! `int(−K)`, zero on its boundary and positive outside; for the non-negative
//! orthant it is the largest coordinate of `y`, i.e. the oriented distance to
//! `−R^m_+` measured in the ℓ∞ norm.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

/// Default absolute slack for membership and order tests.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("a cone needs at least one dual normal")]
    Empty,
    #[error("dual normal {index} has dimension {got}, expected {expected}")]
    Dimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("dual normal {0} is zero or not finite")]
    DegenerateNormal(usize),
    #[error("cone has empty interior (0 lies in the convex hull of its dual normals)")]
    NotSolid,
    #[error("cone is not pointed (dual normals span only {rank} of {dim} dimensions)")]
    NotPointed { rank: usize, dim: usize },
    #[error("unknown cone preset `{0}` (expected `orthant:<m>`, `k2prime` or a JSON object)")]
    UnknownPreset(String),
    #[error("malformed cone description: {0}")]
    Parse(String),
}

/// Where a vector sits relative to `−K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Position {
    InteriorNegK,
    BoundaryNegK,
    ExteriorNegK,
}

/// Wire format: `{"dual_normals": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub dual_normals: Vec<Vec<f64>>,
}

/// Closed, convex, pointed, solid polyhedral cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeSpec", into = "ConeSpec")]
pub struct Cone {
    normals: Vec<Vec<f64>>,
    tolerance: f64,
}

impl Cone {
    /// Builds a cone from (not necessarily normalized) dual normals, checking
    /// solidity and pointedness.
    pub fn new(dual_normals: Vec<Vec<f64>>) -> Result<Self, ConeError> {
        let dim = dual_normals.first().ok_or(ConeError::Empty)?.len();
        if dim == 0 {
            return Err(ConeError::Dimension {
                index: 0,
                expected: 1,
                got: 0,
            });
        }
        let mut normals = Vec::with_capacity(dual_normals.len());
        for (index, w) in dual_normals.into_iter().enumerate() {
            if w.len() != dim {
                return Err(ConeError::Dimension {
                    index,
                    expected: dim,
                    got: w.len(),
                });
            }
            let l1: f64 = w.iter().map(|v| v.abs()).sum();
            if !(l1.is_finite() && l1 > 0.0) {
                return Err(ConeError::DegenerateNormal(index));
            }
            normals.push(w.iter().map(|v| v / l1).collect::<Vec<_>>());
        }

        // Gordan: some y has w_jᵀy > 0 for all j iff 0 ∉ conv{w_j}.
        let (_, closest) = linalg::min_norm_point(&normals);
        if linalg::norm2(&closest) < 1e-9 {
            return Err(ConeError::NotSolid);
        }
        // {y : Wy ≥ 0, −Wy ≥ 0} = ker W, trivial iff rank W = m.
        let rank = linalg::rank(&normals, 1e-12);
        if rank < dim {
            return Err(ConeError::NotPointed { rank, dim });
        }
        Ok(Cone {
            normals,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    /// The non-negative orthant `R^m_+`.
    pub fn orthant(m: usize) -> Self {
        assert!(m > 0, "orthant dimension must be positive");
        let normals = (0..m)
            .map(|j| (0..m).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
            .collect();
        Cone {
            normals,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// `{ y ∈ R²₊ : y₂ ≤ 3y₁, y₁ ≤ 3y₂ }`, a solid cone strictly inside `R²₊`.
    pub fn k2_prime() -> Self {
        Cone::new(vec![vec![3.0, -1.0], vec![-1.0, 3.0]]).expect("k2prime is a valid cone")
    }

    /// Parses `orthant:<m>`, `k2prime`, or a JSON [`ConeSpec`].
    pub fn from_preset(spec: &str) -> Result<Self, ConeError> {
        let spec = spec.trim();
        if spec.starts_with('{') {
            let raw: ConeSpec =
                serde_json::from_str(spec).map_err(|e| ConeError::Parse(e.to_string()))?;
            return Cone::try_from(raw);
        }
        if spec.eq_ignore_ascii_case("k2prime") {
            return Ok(Cone::k2_prime());
        }
        if let Some(m) = spec.strip_prefix("orthant:") {
            let m: usize = m
                .parse()
                .map_err(|_| ConeError::UnknownPreset(spec.to_string()))?;
            if m == 0 {
                return Err(ConeError::UnknownPreset(spec.to_string()));
            }
            return Ok(Cone::orthant(m));
        }
        Err(ConeError::UnknownPreset(spec.to_string()))
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        assert!(tolerance >= 0.0, "tolerance must be non-negative");
        self.tolerance = tolerance;
        self
    }

    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    /// The ℓ₁-normalized dual normals.
    pub fn normals(&self) -> &[Vec<f64>] {
        &self.normals
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `Δ(y) = max_j w_jᵀ y`.
    pub fn scalarize(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim());
        self.normals
            .iter()
            .map(|w| linalg::dot(w, y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn classify(&self, y: &[f64]) -> Position {
        let d = self.scalarize(y);
        if d < -self.tolerance {
            Position::InteriorNegK
        } else if d.abs() <= self.tolerance {
            Position::BoundaryNegK
        } else {
            Position::ExteriorNegK
        }
    }

    /// `y ⪯_K z`, i.e. `z − y ∈ K` up to the tolerance.
    pub fn leq(&self, y: &[f64], z: &[f64]) -> bool {
        self.normals.iter().all(|w| {
            let s: f64 = w.iter().zip(y.iter().zip(z)).map(|(wi, (a, b))| wi * (b - a)).sum();
            s >= -self.tolerance
        })
    }

    /// `y ≺_K z`, i.e. `z − y ∈ int K` with margin above the tolerance.
    pub fn lt(&self, y: &[f64], z: &[f64]) -> bool {
        self.normals.iter().all(|w| {
            let s: f64 = w.iter().zip(y.iter().zip(z)).map(|(wi, (a, b))| wi * (b - a)).sum();
            s > self.tolerance
        })
    }

    /// Whether `y ∈ K` (up to the tolerance).
    pub fn contains(&self, y: &[f64]) -> bool {
        self.normals
            .iter()
            .all(|w| linalg::dot(w, y) >= -self.tolerance)
    }
}

impl TryFrom<ConeSpec> for Cone {
    type Error = ConeError;

    fn try_from(spec: ConeSpec) -> Result<Self, Self::Error> {
        Cone::new(spec.dual_normals)
    }
}

impl From<Cone> for ConeSpec {
    fn from(c: Cone) -> Self {
        ConeSpec {
            dual_normals: c.normals,
        }
    }
}
