//! Minimal elements of the finite image set `F(x)` and the partition set `P_x`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cone::Cone;
use crate::linalg::{self, Matrix};
use crate::problem::{Problem, ProblemError};

/// Relative ℓ∞ tolerance under which two image vectors count as equal.
pub const DEFAULT_VALUE_TOL: f64 = 1e-8;

/// Largest partition set enumerated before giving up.
pub const DEFAULT_CAP: usize = 4096;

/// One element `a = (a₁, …, a_ω)` of `P_x` (0-based component indices).
pub type PartitionElement = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("partition set has {cardinality} elements, above the cap of {cap}")]
    CapExceeded { cardinality: u128, cap: usize },
}

/// `‖a − b‖_∞ ≤ tol·(1 + max(‖a‖_∞, ‖b‖_∞))`.
pub fn same_value(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = 1.0 + linalg::norm_inf(a).max(linalg::norm_inf(b));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

/// Indices of the K-minimal and weakly K-minimal vectors of `values`.
pub fn minimal_elements<R: AsRef<[f64]>>(values: &[R], cone: &Cone) -> (Vec<usize>, Vec<usize>) {
    minimal_elements_with_tol(values, cone, DEFAULT_VALUE_TOL)
}

pub fn minimal_elements_with_tol<R: AsRef<[f64]>>(
    values: &[R],
    cone: &Cone,
    value_tol: f64,
) -> (Vec<usize>, Vec<usize>) {
    let mut min_idx = Vec::new();
    let mut wmin_idx = Vec::new();
    for (i, vi) in values.iter().enumerate() {
        let vi = vi.as_ref();
        let mut dominated = false;
        let mut strictly = false;
        for vj in values {
            let vj = vj.as_ref();
            if cone.lt(vj, vi) {
                strictly = true;
                dominated = true;
                break;
            }
            if !dominated && cone.leq(vj, vi) && !same_value(vj, vi, value_tol) {
                dominated = true;
            }
        }
        if !strictly {
            wmin_idx.push(i);
            if !dominated {
                min_idx.push(i);
            }
        }
    }
    (min_idx, wmin_idx)
}

/// Weakly minimal values of `F(x)` grouped by equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalStructure {
    /// Distinct weakly minimal vectors `v₁, …, v_ω`.
    pub values: Vec<Vec<f64>>,
    /// `groups[j]` is the active index set `I_{v_j}(x)`, ascending.
    pub groups: Vec<Vec<usize>>,
    pub omega: usize,
    pub min_idx: Vec<usize>,
    pub wmin_idx: Vec<usize>,
    /// `Min = WMin` at this point; a pointwise hint of regularity only.
    pub is_regular_hint: bool,
}

impl MinimalStructure {
    /// Builds the structure from a `p × m` value matrix.
    pub fn from_values(values: &Matrix, cone: &Cone, value_tol: f64) -> Self {
        let rows: Vec<&[f64]> = (0..values.rows()).map(|i| values.row(i)).collect();
        let (min_idx, wmin_idx) = minimal_elements_with_tol(&rows, cone, value_tol);
        let mut reps: Vec<Vec<f64>> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &wmin_idx {
            match reps.iter().position(|r| same_value(r, rows[i], value_tol)) {
                Some(g) => groups[g].push(i),
                None => {
                    reps.push(rows[i].to_vec());
                    groups.push(vec![i]);
                }
            }
        }
        MinimalStructure {
            omega: reps.len(),
            values: reps,
            groups,
            is_regular_hint: min_idx == wmin_idx,
            min_idx,
            wmin_idx,
        }
    }

    /// `|P_x| = Π_j |I_{v_j}|`, saturating.
    pub fn partition_size(&self) -> u128 {
        self.groups
            .iter()
            .fold(1u128, |acc, g| acc.saturating_mul(g.len() as u128))
    }
}

/// Evaluates `F(x)` and builds its [`MinimalStructure`].
pub fn minimal_structure(
    problem: &Problem,
    cone: &Cone,
    x: &[f64],
    value_tol: f64,
) -> Result<MinimalStructure, ProblemError> {
    let values = problem.eval_all(x)?;
    Ok(MinimalStructure::from_values(&values, cone, value_tol))
}

/// Lexicographic iterator over `P_x` (last coordinate varies fastest).
#[derive(Debug, Clone)]
pub struct PartitionIter<'a> {
    groups: &'a [Vec<usize>],
    counters: Vec<usize>,
    done: bool,
}

impl Iterator for PartitionIter<'_> {
    type Item = PartitionElement;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self
            .counters
            .iter()
            .zip(self.groups)
            .map(|(&c, g)| g[c])
            .collect();
        self.done = true;
        for k in (0..self.counters.len()).rev() {
            self.counters[k] += 1;
            if self.counters[k] < self.groups[k].len() {
                self.done = false;
                break;
            }
            self.counters[k] = 0;
        }
        Some(item)
    }
}

/// Enumerates `P_x`, refusing sets larger than `cap`.
pub fn partition_iter(
    structure: &MinimalStructure,
    cap: usize,
) -> Result<PartitionIter<'_>, PartitionError> {
    let cardinality = structure.partition_size();
    if cardinality > cap as u128 {
        return Err(PartitionError::CapExceeded { cardinality, cap });
    }
    Ok(PartitionIter {
        groups: &structure.groups,
        counters: vec![0; structure.groups.len()],
        done: structure.groups.is_empty(),
    })
}
