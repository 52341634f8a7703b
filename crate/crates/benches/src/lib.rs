//! Benchmark fixtures.

use setopt::problem::registry;
use setopt::{Cone, Problem};

/// Problem, cone and an interior point used across the kernel benches.
pub struct Fixture {
    pub problem: Problem,
    pub cone: Cone,
    pub x: Vec<f64>,
}

impl Fixture {
    /// Registry instance at the midpoint of its box, nudged off symmetry.
    pub fn midpoint(id: &str) -> Fixture {
        let problem = registry(id).expect("registered problem");
        let b = problem.bounds();
        let x = b
            .lower
            .iter()
            .zip(&b.upper)
            .enumerate()
            .map(|(i, (l, u))| l + (u - l) * (0.5 + 0.03 * (i as f64 + 1.0)))
            .collect();
        let cone = Cone::orthant(problem.m());
        Fixture { problem, cone, x }
    }
}

/// `k` deterministic points in `R^n` spread around the origin.
pub fn hull_points(k: usize, n: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| (0..n).map(|j| ((i * n + j) as f64 * 1.618_033_988).sin() + 0.1).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_inside_their_box() {
        for id in ["hil_n2_m2", "zdt1_n10_m2", "dgo2_n1_m2"] {
            let f = Fixture::midpoint(id);
            assert!(f.problem.bounds().contains(&f.x), "{id}");
        }
        assert_eq!(hull_points(5, 3).len(), 5);
    }
}
