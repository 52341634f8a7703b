//! Box-aware finite differences.
//!
//! Gradients use step `h_j = ε^{1/3}·max(1, |x_j|)`; Hessians difference the
//! gradient again with the coarser `H_j = ε^{2/9}·max(1, |x_j|)`, i.e. `h^{2/3}`
//! in relative units. Near a face of the box the stencil becomes one-sided
//! (second order), and in boxes thinner than the step it shrinks.

use super::{DerivativeBundle, Problem};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stencil {
    Central(f64),
    Forward(f64),
    Backward(f64),
}

fn stencil(x: f64, lo: f64, hi: f64, h: f64) -> Stencil {
    let room_lo = x - lo;
    let room_hi = hi - x;
    if room_lo >= h && room_hi >= h {
        Stencil::Central(h)
    } else if room_hi >= 2.0 * h {
        Stencil::Forward(h)
    } else if room_lo >= 2.0 * h {
        Stencil::Backward(h)
    } else if room_lo > 0.0 && room_hi > 0.0 {
        Stencil::Central(room_lo.min(room_hi))
    } else if room_hi > room_lo {
        Stencil::Forward(0.5 * room_hi)
    } else {
        Stencil::Backward(0.5 * room_lo)
    }
}

fn grad_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

fn hess_step(x: f64) -> f64 {
    f64::EPSILON.powf(2.0 / 9.0) * x.abs().max(1.0)
}

/// Applies a stencil along coordinate `j` to a vector-valued map `g`,
/// writing the directional derivative into `out`. `g0` is `g(x)`, needed only
/// by the one-sided formulas.
fn difference<G>(x: &[f64], j: usize, st: Stencil, g0: &[f64], g: &mut G, out: &mut [f64])
where
    G: FnMut(&[f64]) -> Vec<f64>,
{
    let mut xs = x.to_vec();
    let at = |xs: &mut Vec<f64>, g: &mut G, off: f64| {
        xs[j] = x[j] + off;
        g(xs)
    };
    match st {
        Stencil::Central(h) => {
            let fp = at(&mut xs, g, h);
            let fm = at(&mut xs, g, -h);
            for (o, (a, b)) in out.iter_mut().zip(fp.iter().zip(&fm)) {
                *o = (a - b) / (2.0 * h);
            }
        }
        Stencil::Forward(h) => {
            let f1 = at(&mut xs, g, h);
            let f2 = at(&mut xs, g, 2.0 * h);
            for (k, o) in out.iter_mut().enumerate() {
                *o = (-3.0 * g0[k] + 4.0 * f1[k] - f2[k]) / (2.0 * h);
            }
        }
        Stencil::Backward(h) => {
            let f1 = at(&mut xs, g, -h);
            let f2 = at(&mut xs, g, -2.0 * h);
            for (k, o) in out.iter_mut().enumerate() {
                *o = (3.0 * g0[k] - 4.0 * f1[k] + f2[k]) / (2.0 * h);
            }
        }
    }
}

pub(super) fn fd_jacobian(problem: &Problem, i: usize, x: &[f64]) -> Matrix {
    let (n, m) = (problem.n(), problem.m());
    let b = problem.bounds();
    let mut f0 = vec![0.0; m];
    problem.eval_raw(i, x, &mut f0);
    let mut eval = |z: &[f64]| {
        let mut out = vec![0.0; m];
        problem.eval_raw(i, z, &mut out);
        out
    };
    let mut jac = Matrix::zeros(m, n);
    let mut col = vec![0.0; m];
    for j in 0..n {
        let st = stencil(x[j], b.lower[j], b.upper[j], grad_step(x[j]));
        difference(x, j, st, &f0, &mut eval, &mut col);
        for (r, v) in col.iter().enumerate() {
            jac.set(r, j, *v);
        }
    }
    jac
}

fn jacobian(problem: &Problem, i: usize, x: &[f64]) -> Matrix {
    problem
        .analytic_jacobian(i, x)
        .unwrap_or_else(|| fd_jacobian(problem, i, x))
}

pub(super) fn derivatives(problem: &Problem, i: usize, x: &[f64]) -> DerivativeBundle {
    let (n, m) = (problem.n(), problem.m());
    let b = problem.bounds();
    let jac0 = jacobian(problem, i, x);
    // Flatten J row-major so the outer difference treats it as a vector.
    let mut flat = |z: &[f64]| jacobian(problem, i, z).as_slice().to_vec();
    let mut hessians = vec![Matrix::zeros(n, n); m];
    let mut col = vec![0.0; m * n];
    for j in 0..n {
        let st = stencil(x[j], b.lower[j], b.upper[j], hess_step(x[j]));
        difference(x, j, st, jac0.as_slice(), &mut flat, &mut col);
        for (r, h) in hessians.iter_mut().enumerate() {
            for k in 0..n {
                h.set(k, j, col[r * n + k]);
            }
        }
    }
    for h in &mut hessians {
        h.symmetrize();
    }
    DerivativeBundle {
        jacobian: jac0,
        hessians,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Bounds;

    #[test]
    fn stencil_adapts_near_faces() {
        assert_eq!(stencil(0.5, 0.0, 1.0, 1e-3), Stencil::Central(1e-3));
        assert_eq!(stencil(0.0, 0.0, 1.0, 1e-3), Stencil::Forward(1e-3));
        assert_eq!(stencil(1.0, 0.0, 1.0, 1e-3), Stencil::Backward(1e-3));
        assert_eq!(stencil(0.5, 0.0, 1.0, 0.75), Stencil::Central(0.5));
    }

    #[test]
    fn quadratic_hessian_from_values_only() {
        // f(x) = ½ xᵀAx with A = [[2,1],[1,4]], no analytic Jacobian.
        let prob = Problem::new("q", 1, 1, Bounds::cube(2, -5.0, 5.0), |_, x, out| {
            out[0] = 0.5 * (2.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 4.0 * x[1] * x[1]);
        });
        for x in [[0.3, -0.7], [5.0, -5.0], [-4.99999, 0.0]] {
            let d = derivatives(&prob, 0, &x);
            let h = &d.hessians[0];
            let want = [[2.0, 1.0], [1.0, 4.0]];
            for r in 0..2 {
                for c in 0..2 {
                    assert!((h.get(r, c) - want[r][c]).abs() < 1e-5, "{x:?}: {h:?}");
                }
            }
            let g = [2.0 * x[0] + x[1], x[0] + 4.0 * x[1]];
            for c in 0..2 {
                assert!((d.jacobian.get(0, c) - g[c]).abs() < 1e-6 * (1.0 + g[c].abs()));
            }
        }
    }

    #[test]
    fn evaluations_stay_in_box() {
        let prob = Problem::new("guard", 1, 1, Bounds::cube(2, 0.0, 1.0), |_, x, out| {
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)), "left box: {x:?}");
            out[0] = x[0].sqrt() + x[1].ln_1p();
        });
        let d = derivatives(&prob, 0, &[0.0, 1.0]);
        assert!(d.jacobian.is_finite());
    }
}
