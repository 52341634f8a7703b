//! The benchmark instances and a few smoke-test plants.
//!
//! Instance ids are `<family>_n<n>_m<m>`. Inside formulas the component index
//! is 1-based (`i = idx + 1`); the `(φ_i, ψ_i)` pairs enumerate the Cartesian
//! product lexicographically, `i − 1 = 10·(j − 1) + (l − 1)`.
//!
//! Reading choices for ambiguous formulas:
//! - DTLZ1 rows are implemented exactly as printed for `m = 4`, including the
//!   `¼` on the third row and the missing `½` on the first two.
//! - DTLZ3's perturbation `sech(φ)·cos(φ₂)` is read as `sech(φ)·cos(ψ)`.
//! - DTLZ5 uses `λ = 1` in its perturbation.
//! - FDSa does not state its `(φ, ψ)` grid; the `π/5` grid of the DTLZ family
//!   is used.
//! - Brown–Dennis has three rows as printed (so `m = 3` despite the `m5` in
//!   its id), keeping `x₁ + ⅗x₃` in the third row and `0.5φ`.
//! - The bracket of Test Instance 5.1 adds the scalar `1 − (i−1)/4` to both
//!   components.
//! - `ln tan(ψ/2)` clamps `ψ` into `(δ, π − δ)` with `δ = 1e-9`; the number of
//!   clamped constants is reported in [`ProblemInfo`](super::ProblemInfo).

use std::f64::consts::PI;

use super::{Bounds, Problem, ProblemError};
use crate::linalg::Matrix;

const DELTA: f64 = 1e-9;

/// All instance ids in canonical order.
pub const IDS: [&str; 22] = [
    "zdt1_n2_m2",
    "zdt1_n5_m2",
    "zdt1_n8_m2",
    "zdt1_n10_m2",
    "zdt4_n10_m2",
    "dtlz1_n6_m4",
    "dtlz3_n5_m4",
    "dtlz5_n3_m3",
    "dtlz5_n5_m3",
    "dtlz5_n7_m5",
    "hil_n2_m2",
    "dgo1_n1_m2",
    "dgo2_n1_m2",
    "jos1a_n5_m2",
    "fdsa_n2_m3",
    "rosenbrock_n4_m3",
    "brown_dennis_n4_m5",
    "trigonometric_n4_m4",
    "das_dennis_n5_m2",
    "ex51_n1_m2",
    "ex53_n2_m2",
    "sphere_n3_m3",
];

pub fn list_ids() -> &'static [&'static str] {
    &IDS
}

/// Looks up an instance by id.
pub fn registry(id: &str) -> Result<Problem, ProblemError> {
    let p = match id {
        "zdt1_n2_m2" => zdt1(id, 2),
        "zdt1_n5_m2" => zdt1(id, 5),
        "zdt1_n8_m2" => zdt1(id, 8),
        "zdt1_n10_m2" => zdt1(id, 10),
        "zdt4_n10_m2" => zdt4(id, 10),
        "dtlz1_n6_m4" => dtlz1(id, 6, 4),
        "dtlz3_n5_m4" => dtlz3(id, 5, 4),
        "dtlz5_n3_m3" => dtlz5(id, 3, 3),
        "dtlz5_n5_m3" => dtlz5(id, 5, 3),
        "dtlz5_n7_m5" => dtlz5(id, 7, 5),
        "hil_n2_m2" => hil(id),
        "dgo1_n1_m2" => dgo1(id),
        "dgo2_n1_m2" => dgo2(id),
        "jos1a_n5_m2" => jos1a(id, 5),
        "fdsa_n2_m3" => fdsa(id, 2),
        "rosenbrock_n4_m3" => rosenbrock(id),
        "brown_dennis_n4_m5" => brown_dennis(id),
        "trigonometric_n4_m4" => trigonometric(id),
        "das_dennis_n5_m2" => das_dennis(id),
        "ex51_n1_m2" => ex51(id),
        "ex53_n2_m2" => ex53(id),
        "sphere_n3_m3" => sphere(id),
        _ => return Err(ProblemError::UnknownId(id.to_string())),
    };
    Ok(p)
}

/// Lexicographic enumeration of `{a_j} × {b_l}`.
fn grid(a: impl Fn(f64) -> f64, b: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(100);
    for j in 1..=10 {
        for l in 1..=10 {
            out.push((a(j as f64), b(l as f64)));
        }
    }
    out
}

fn pi5_grid() -> Vec<(f64, f64)> {
    grid(|j| PI / 5.0 * (j - 1.0), |l| PI / 5.0 * (l - 1.0))
}

fn brown_grid() -> Vec<(f64, f64)> {
    grid(|j| 2.0 * PI / 5.0 * (j - 1.0), |l| 0.01 + 0.098 * (l - 1.0))
}

fn ln_tan_half(psi: f64, clamped: &mut usize) -> f64 {
    let c = psi.clamp(DELTA, PI - DELTA);
    if c != psi {
        *clamped += 1;
    }
    (c / 2.0).tan().ln()
}

/// `f^i(x) = base(x) + shift_i`.
fn additive<B>(name: &str, bounds: Bounds, shifts: Vec<Vec<f64>>, base: B) -> Problem
where
    B: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
{
    let m = shifts[0].len();
    let p = shifts.len();
    Problem::new(name, m, p, bounds, move |i, x, out| {
        base(x, out);
        for (o, s) in out.iter_mut().zip(&shifts[i]) {
            *o += s;
        }
    })
}

fn cos16(i: f64) -> f64 {
    (4.0 * PI * i / 100.0).cos().powi(16)
}

fn zdt1(name: &str, n: usize) -> Problem {
    let shifts = (1..=100)
        .map(|i| {
            let i = i as f64;
            let a = 0.02 + 0.02 * cos16(i);
            let b = 0.15 + 0.15 * cos16(i) * (2.0 * PI * i / 100.0).sin();
            vec![a * (2.0 * PI * i / 100.0).cos(), b]
        })
        .collect();
    additive(name, Bounds::cube(n, 0.0, 1.0), shifts, |x, out| {
        let f1 = x[0];
        let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>();
        out[0] = f1;
        out[1] = g * (1.0 - (f1 / g).sqrt());
    })
}

fn zdt4(name: &str, n: usize) -> Problem {
    let shifts = (1..=100)
        .map(|i| {
            let i = i as f64;
            vec![
                1.0 + cos16(i) * (2.0 * PI * i / 100.0).cos(),
                1.0 + cos16(i) * (2.0 * PI * i / 100.0).sin(),
            ]
        })
        .collect();
    let mut lower = vec![-5.0; n];
    let mut upper = vec![5.0; n];
    lower[0] = 0.01;
    upper[0] = 1.0;
    let bounds = Bounds::new(lower, upper).expect("valid box");
    additive(name, bounds, shifts, move |x, out| {
        let f1 = x[0];
        let g = 1.0
            + 10.0 * (n as f64 - 1.0)
            + x[1..]
                .iter()
                .map(|v| v * v - 10.0 * (4.0 * PI * v).cos())
                .sum::<f64>();
        out[0] = f1;
        out[1] = g * (1.0 - (f1 / g).sqrt());
    })
}

/// Trailing block `x_m` of the DTLZ family, `ℓ = n − m + 1` variables.
fn tail(x: &[f64], m: usize) -> &[f64] {
    &x[m - 1..]
}

fn rastrigin_g(xm: &[f64]) -> f64 {
    let s: f64 = xm
        .iter()
        .map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos())
        .sum();
    100.0 * (xm.len() as f64 + s)
}

/// Standard DTLZ spherical map: row 0 is `R Π cos`, row `r` replaces the
/// last remaining cosine by a sine.
fn spherical(radius: f64, theta: &[f64], out: &mut [f64]) {
    let m = out.len();
    for (r, o) in out.iter_mut().enumerate() {
        let ncos = m - 1 - r;
        let mut v = radius;
        for t in &theta[..ncos] {
            v *= (t * PI / 2.0).cos();
        }
        if r > 0 {
            v *= (theta[ncos] * PI / 2.0).sin();
        }
        *o = v;
    }
}

fn dtlz1(name: &str, n: usize, m: usize) -> Problem {
    assert_eq!(m, 4, "DTLZ1 rows are printed for m = 4");
    let mut clamped = 0;
    let shifts = pi5_grid()
        .into_iter()
        .map(|(phi, psi)| {
            let mut s = vec![0.0; m];
            s[0] = phi.cos() * psi.sin();
            s[1] = phi.sin() * psi.sin();
            s[2] = psi.cos() + ln_tan_half(psi, &mut clamped) + 0.2 * phi;
            s
        })
        .collect();
    additive(name, Bounds::cube(n, 0.0, 1.0), shifts, move |x, out| {
        let r = 1.0 + rastrigin_g(tail(x, m));
        out[0] = r * x[0] * x[1] * x[2];
        out[1] = r * x[0] * x[1] * (1.0 - x[2]);
        out[2] = 0.5 * r * 0.5 * x[0] * (1.0 - x[1]);
        out[3] = 0.5 * (1.0 - x[0]) * r;
    })
    .with_clamped_constants(clamped)
}

fn dtlz3(name: &str, n: usize, m: usize) -> Problem {
    let shifts = pi5_grid()
        .into_iter()
        .map(|(phi, psi)| {
            let mut s = vec![0.0; m];
            let sech = 1.0 / phi.cosh();
            s[0] = sech * psi.cos();
            s[1] = sech * psi.sin();
            s[2] = phi - phi.tanh();
            s
        })
        .collect();
    additive(name, Bounds::cube(n, 0.0, 1.0), shifts, move |x, out| {
        let r = 1.0 + rastrigin_g(tail(x, m));
        spherical(r, &x[..m - 1], out);
    })
}

fn dtlz5(name: &str, n: usize, m: usize) -> Problem {
    const LAMBDA: f64 = 1.0;
    let shifts = pi5_grid()
        .into_iter()
        .map(|(phi, psi)| {
            let mut s = vec![0.0; m];
            s[0] = 5.0 * psi / (2.0 * PI);
            s[1] = LAMBDA * phi.cos() / 10.0;
            s[2] = LAMBDA * phi.sin() / 10.0;
            s
        })
        .collect();
    additive(name, Bounds::cube(n, 0.0, 1.0), shifts, move |x, out| {
        let g: f64 = tail(x, m).iter().map(|v| (v - 0.5).powi(2)).sum();
        let mut theta = Vec::with_capacity(m - 1);
        theta.push(x[0]);
        for v in &x[1..m - 1] {
            theta.push((1.0 + g * v) / (2.0 * (1.0 + g)));
        }
        spherical(1.0 + g, &theta, out);
    })
}

fn hil(name: &str) -> Problem {
    let shifts = (1..=100)
        .map(|i| {
            let i = i as f64;
            let s = (PI * i / 25.0).sin();
            let c = (2.0 * PI * i / 25.0).cos();
            let rho = 10.0 * ((9.0 + s.exp() - s + 2.0 * c * c) / 128.0);
            vec![rho * (PI * i / 50.0).cos(), rho * (PI * i / 50.0).sin()]
        })
        .collect();
    additive(name, Bounds::cube(2, 0.0, 5.0), shifts, |x, out| {
        let xi = (PI / 180.0)
            * (45.0 + 40.0 * (2.0 * PI * x[0]).sin() + 25.0 * (2.0 * PI * x[1]).sin());
        let b = 1.0 + 0.5 * (2.0 * PI * x[0]).cos();
        out[0] = xi.cos() * b;
        out[1] = xi.sin() * b;
    })
}

fn dgo1(name: &str) -> Problem {
    let shifts = (1..=100)
        .map(|i| {
            let t = PI * i as f64 / 50.0;
            vec![(t + t.cos()).sin(), (t + t.sin()).cos()]
        })
        .collect();
    additive(name, Bounds::cube(1, -10.0, 13.0), shifts, |x, out| {
        out[0] = x[0].sin();
        out[1] = (x[0] + 0.7).sin();
    })
}

fn dgo2(name: &str) -> Problem {
    let shifts = (1..=100)
        .map(|i| {
            let t = PI * i as f64 / 50.0;
            vec![(t + t.cos()).sin(), (t + (2.0 * t).sin()).cos()]
        })
        .collect();
    additive(name, Bounds::cube(1, -9.0, 9.0), shifts, |x, out| {
        out[0] = x[0] * x[0];
        out[1] = 9.0 - (81.0 - x[0] * x[0]).sqrt();
    })
}

fn jos1a(name: &str, n: usize) -> Problem {
    let shifts = (1..=100)
        .map(|i| {
            let t = PI * i as f64 / 50.0;
            vec![0.1 * t.cos(), 50.0 * t.sin()]
        })
        .collect();
    additive(name, Bounds::cube(n, -2.0, 2.0), shifts, move |x, out| {
        let nf = n as f64;
        out[0] = x.iter().map(|v| v * v).sum::<f64>() / nf;
        out[1] = x.iter().map(|v| (v - 2.0).powi(2)).sum::<f64>() / nf;
    })
}

fn fdsa(name: &str, n: usize) -> Problem {
    let shifts = pi5_grid()
        .into_iter()
        .map(|(phi, psi)| {
            vec![
                1.0 + phi.cos() * psi.cos(),
                1.0 + phi.cos() * psi.sin(),
                phi.sin(),
            ]
        })
        .collect();
    additive(name, Bounds::cube(n, -2.0, 2.0), shifts, move |x, out| {
        let nf = n as f64;
        let mut g1 = 0.0;
        let mut g3 = 0.0;
        for (k, v) in x.iter().enumerate() {
            let i = k as f64 + 1.0;
            g1 += i * (v - i).powi(4);
            g3 += i * (nf - i + 1.0) * (-v).exp();
        }
        out[0] = g1 / (nf * nf);
        out[1] = (x.iter().sum::<f64>() / nf).exp() + x.iter().map(|v| v * v).sum::<f64>();
        out[2] = g3 / (nf * (nf + 1.0));
    })
}

fn rosenbrock(name: &str) -> Problem {
    const R: f64 = 16.0;
    let shifts = pi5_grid()
        .into_iter()
        .map(|(phi, psi)| {
            let r2 = R * R;
            vec![
                r2 * phi.cos() * psi.cos() * psi.sin(),
                r2 * phi.cos() * psi.sin() * psi.sin(),
                r2 * phi.cos() * psi.sin() * psi.cos().powi(2),
            ]
        })
        .collect();
    additive(name, Bounds::cube(4, -2.0, 2.0), shifts, |x, out| {
        for r in 0..3 {
            out[r] = 100.0 * (x[r + 1] - x[r] * x[r]).powi(2) + (x[r + 1] - 1.0).powi(2);
        }
    })
}

fn brown_dennis(name: &str) -> Problem {
    let mut clamped = 0;
    let shifts = brown_grid()
        .into_iter()
        .map(|(phi, psi)| {
            vec![
                phi.cos() * psi.sin(),
                phi.sin() * psi.sin(),
                psi.cos() + ln_tan_half(psi, &mut clamped) + 0.5 * phi,
            ]
        })
        .collect();
    let bounds = Bounds::new(vec![-25.0, -5.0, -5.0, -1.0], vec![25.0, 5.0, 5.0, 1.0])
        .expect("valid box");
    additive(name, bounds, shifts, |x, out| {
        let tail = |k: f64| (x[2] + x[3] * (k / 5.0).sin() - (k / 5.0).cos()).powi(2);
        out[0] = (x[0] + 0.2 * x[1] - 0.2_f64.exp()).powi(2) + tail(1.0);
        out[1] = (x[0] + 0.4 * x[1] - 0.4_f64.exp()).powi(2) + tail(2.0);
        out[2] = (x[0] + 0.6 * x[2] - 0.6_f64.exp()).powi(2) + tail(3.0);
    })
    .with_clamped_constants(clamped)
}

fn trigonometric(name: &str) -> Problem {
    let mut clamped = 0;
    let shifts = brown_grid()
        .into_iter()
        .map(|(phi, psi)| {
            vec![
                phi.cos() * psi.sin(),
                phi.sin() * psi.sin(),
                psi.cos() + ln_tan_half(psi, &mut clamped) + 0.2 * phi,
                0.0,
            ]
        })
        .collect();
    additive(name, Bounds::cube(4, -1.0, 1.0), shifts, |x, out| {
        let c = |v: f64| 1.0 - v.cos();
        out[0] = (c(x[0]) + c(x[0]) - x[0].sin()).powi(2);
        out[1] = (2.0 - (x[0] + x[1]).cos() + 2.0 * c(x[1]) - x[1].sin()).powi(2);
        out[2] = (3.0 - (x[0] + x[1] + x[2]).cos() + 3.0 * c(x[2]) - x[2].sin()).powi(2);
        out[3] = 4.0 - (x[0] + x[1] + x[2] + x[3]).cos() + 4.0 * c(x[3]) - x[3].sin();
    })
    .with_clamped_constants(clamped)
}

fn das_dennis(name: &str) -> Problem {
    let shifts = (1..=100)
        .map(|i| {
            let t = i as f64 * PI / 50.0;
            let s = t.sin() + t.cos();
            vec![s, s]
        })
        .collect();
    additive(name, Bounds::cube(5, -20.0, 20.0), shifts, |x, out| {
        out[0] = x.iter().map(|v| v * v).sum();
        out[1] = 3.0 * x[0] + 2.0 * x[1] - x[2] / 3.0 + 0.01 * (x[3] - x[4]).powi(3);
    })
}

fn ex51(name: &str) -> Problem {
    Problem::new(name, 2, 5, Bounds::cube(1, 2.0, 10.0), |idx, x, out| {
        let a = idx as f64 / 4.0;
        let c2 = x[0].cos().powi(2);
        out[0] = x[0] + c2 * (a + (1.0 - a));
        out[1] = 0.5 * x[0] * x[0].sin() + c2 * (-a + (1.0 - a));
    })
}

fn ex53(name: &str) -> Problem {
    Problem::new(name, 2, 100, Bounds::cube(2, -20.0, 20.0), |idx, x, out| {
        let t = PI * idx as f64 / 50.0;
        let (x1, x2) = (x[0], x[1]);
        out[0] = (x1 / 2.0).exp() * x2.cos() + x1 * x2.cos() * t.sin()
            - x2 * x2.sin() * t.cos().powi(3);
        out[1] = (x2 / 20.0).exp() * x1.sin()
            + x1 * x2.sin() * t.sin().powi(3)
            + x2 * x2.cos() * t.cos();
    })
}

fn sphere(name: &str) -> Problem {
    let shifts = grid(|j| PI / 10.0 * (j - 1.0), |l| PI / 5.0 * (l - 1.0))
        .into_iter()
        .map(|(phi, psi)| {
            vec![
                phi.cos() / 16.0,
                psi.cos() * phi.sin() / 16.0,
                psi.sin() * phi.sin() / 16.0,
            ]
        })
        .collect();
    additive(name, Bounds::cube(3, 0.0, 1.0), shifts, |x, out| {
        let g = |z: f64| (z - 0.5).powi(2);
        let r = 1.0 + g(x[2]);
        let u = PI * x[0] / 2.0;
        let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let v = PI * (1.0 + 2.0 * g(x[2]) * x[1]) / (4.0 * (1.0 + g(norm)));
        out[0] = r * u.cos() * v.cos();
        out[1] = r * u.cos() * v.sin();
        out[2] = r * u.sin();
    })
}

/// `f(x) = cᵀx`, single component, with analytic Jacobian.
pub fn linear_plant(c: Vec<f64>) -> Problem {
    let n = c.len();
    let c2 = c.clone();
    Problem::new("linear_plant", 1, 1, Bounds::cube(n, -10.0, 10.0), move |_, x, out| {
        out[0] = crate::linalg::dot(&c, x);
    })
    .with_jacobian(move |_, _, jac: &mut Matrix| {
        for (k, v) in c2.iter().enumerate() {
            jac.set(0, k, *v);
        }
    })
}

/// `f(x) = ½ xᵀAx` for a symmetric `A`, single component, analytic Jacobian.
pub fn quadratic_plant(a: Matrix) -> Problem {
    let n = a.rows();
    assert_eq!(n, a.cols(), "A must be square");
    let a2 = a.clone();
    Problem::new("quadratic_plant", 1, 1, Bounds::cube(n, -10.0, 10.0), move |_, x, out| {
        out[0] = 0.5 * a.quad_form(x);
    })
    .with_jacobian(move |_, x, jac: &mut Matrix| {
        let g = a2.mul_vec(x);
        for (k, v) in g.iter().enumerate() {
            jac.set(0, k, *v);
        }
    })
}

/// The Sphere instance's helper `g(x₃) = (x₃ − ½)²` on `[0,1]³`.
pub fn sphere_helper() -> Problem {
    Problem::new("sphere_helper", 1, 1, Bounds::cube(3, 0.0, 1.0), |_, x, out| {
        out[0] = (x[2] - 0.5).powi(2);
    })
    .with_jacobian(|_, x, jac: &mut Matrix| {
        jac.set(0, 0, 0.0);
        jac.set(0, 1, 0.0);
        jac.set(0, 2, 2.0 * (x[2] - 0.5));
    })
}
