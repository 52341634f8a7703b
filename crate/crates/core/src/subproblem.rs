//! Quadratic models, the criticality value `θ(x)` and the min-max trust-region
//! subproblem
//!
//! ```text
//!   min_s φ(s) = max_{j, l} max( w_lᵀ(G_j s + ½ q_j(s)), w_lᵀ G_j s )
//!   s.t. ‖s‖₂ ≤ Ω,  x_L − x ≤ s ≤ x_U − x,
//! ```
//!
//! where `q_j(s) = (sᵀH_{j,r}s)_r`. Each `(j, l)` pair collapses to a piece
//! `(c, Q) = (G_jᵀw_l, Σ_r w_{l,r} H_{j,r})`.
//!
//! The inner problem is nonsmooth and possibly nonconvex, so it is solved by
//! a deterministic multistart: projected normalized subgradient steps with a
//! geometric schedule, then coordinatewise golden-section polishing of the
//! best point. The feasible-point map clips to the box shift and then scales
//! into the ball (not an exact projection; only feasibility is needed).

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::linalg::{self, Matrix};
use crate::partition::{self, MinimalStructure, PartitionElement};
use crate::problem::{DerivativeBundle, Problem, ProblemError};

/// Number of subgradient steps per start.
const STEPS: usize = 200;
const STEP_FACTOR: f64 = 0.7;
/// Linear-branch starts beyond this many pieces keep only the steepest ones.
const MAX_LINEAR_STARTS: usize = 16;
const GOLDEN_SWEEPS: usize = 2;
/// Best multistart results that get the active-set descent.
const LOCAL_STARTS: usize = 4;
const LOCAL_ITERS: usize = 100;
const GOLDEN_ITERS: usize = 40;
/// Candidates whose `t` differs by less than this are tied.
pub const TIE_TOL: f64 = 1e-12;

/// Jacobian and Hessians of one `f^{a_j}`, i.e. the model
/// `m_j(s) = G_j s + ½ q_j(s)` with `m_j(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBlock {
    pub gradient: Matrix,
    pub hessians: Vec<Matrix>,
}

impl ModelBlock {
    pub fn from_bundle(b: &DerivativeBundle) -> Self {
        ModelBlock {
            gradient: b.jacobian.clone(),
            hessians: b.hessians.clone(),
        }
    }

    /// `m_j(s)` as an `m`-vector.
    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        let mut v = self.gradient.mul_vec(s);
        for (o, h) in v.iter_mut().zip(&self.hessians) {
            *o += 0.5 * h.quad_form(s);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    c: Vec<f64>,
    q: Matrix,
}

/// Models for one partition element, flattened into pieces.
#[derive(Debug, Clone)]
pub struct ModelSet {
    pub blocks: Vec<ModelBlock>,
    pieces: Vec<Piece>,
}

impl ModelSet {
    pub fn new(blocks: Vec<ModelBlock>, cone: &Cone) -> Self {
        let mut pieces: Vec<Piece> = Vec::new();
        for b in &blocks {
            let n = b.gradient.cols();
            for w in cone.normals() {
                let c = b.gradient.tr_mul_vec(w);
                let mut q = Matrix::zeros(n, n);
                for (wr, h) in w.iter().zip(&b.hessians) {
                    if *wr == 0.0 {
                        continue;
                    }
                    for r in 0..n {
                        for (o, v) in q.row_mut(r).iter_mut().zip(h.row(r)) {
                            *o += wr * v;
                        }
                    }
                }
                let piece = Piece { c, q };
                // Identical pieces contribute nothing new to the max.
                if !pieces.contains(&piece) {
                    pieces.push(piece);
                }
            }
        }
        ModelSet { blocks, pieces }
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].gradient.cols()
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// `φ(s)`.
    pub fn phi(&self, s: &[f64]) -> f64 {
        self.phi_and_subgradient(s, false).0
    }

    fn phi_and_subgradient(&self, s: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
        let mut best = f64::NEG_INFINITY;
        let mut arg: Option<(usize, bool)> = None;
        for (k, p) in self.pieces.iter().enumerate() {
            let lin = linalg::dot(&p.c, s);
            let quad = lin + 0.5 * p.q.quad_form(s);
            let (v, is_quad) = if quad > lin { (quad, true) } else { (lin, false) };
            if v > best || v.is_nan() {
                best = v;
                arg = Some((k, is_quad));
                if v.is_nan() {
                    break;
                }
            }
        }
        if !want_grad {
            return (best, Vec::new());
        }
        let (k, is_quad) = arg.expect("at least one piece");
        let p = &self.pieces[k];
        let g = if is_quad {
            linalg::add(&p.c, &p.q.mul_vec(s))
        } else {
            p.c.clone()
        };
        (best, g)
    }
}

/// `Δ(−m_j(s))`; positive when the model predicts a decrease.
pub fn predicted_reduction(block: &ModelBlock, cone: &Cone, s: &[f64]) -> f64 {
    let neg: Vec<f64> = block.eval(s).iter().map(|v| -v).collect();
    cone.scalarize(&neg)
}

/// Feasible region of the inner problem: `‖s‖ ≤ Ω` and `lo ≤ s ≤ hi`.
#[derive(Debug, Clone)]
pub struct StepRegion {
    pub radius: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl StepRegion {
    pub fn ball(n: usize, radius: f64) -> Self {
        StepRegion {
            radius,
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    /// Clip to the box shift, then scale into the ball.
    pub fn map(&self, s: &mut [f64]) {
        for ((v, l), h) in s.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(*l, *h);
        }
        let nrm = linalg::norm2(s);
        if nrm > self.radius {
            let f = self.radius / nrm;
            for v in s.iter_mut() {
                *v *= f;
            }
        }
    }

    pub fn contains(&self, s: &[f64], tol: f64) -> bool {
        linalg::norm2(s) <= self.radius + tol
            && s
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }
}

fn fixed_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(8);
    let unit = |k: usize| {
        let mut e = vec![0.0; n];
        e[k % n] = 1.0;
        e
    };
    let ones = vec![1.0 / (n as f64).sqrt(); n];
    let alt: Vec<f64> = (0..n)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (n as f64).sqrt())
        .collect();
    for d in [unit(0), unit(1), ones, alt] {
        dirs.push(linalg::scale(&d, -1.0));
        dirs.push(d);
    }
    dirs
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerResult {
    pub s: Vec<f64>,
    pub t: f64,
    pub iterations: usize,
    pub ok: bool,
}

/// Minimizes `φ` over the step region.
pub fn inner_minimax(models: &ModelSet, region: &StepRegion) -> InnerResult {
    let n = models.dim();
    let zero = vec![0.0; n];
    let fail = |iterations| InnerResult {
        s: zero.clone(),
        t: 0.0,
        iterations,
        ok: false,
    };
    if !models.pieces.iter().all(|p| p.c.iter().all(|v| v.is_finite()) && p.q.is_finite()) {
        return fail(0);
    }
    let omega = region.radius;
    if !(omega > 0.0) {
        return InnerResult {
            s: zero,
            t: 0.0,
            iterations: 0,
            ok: omega == 0.0,
        };
    }

    let mut starts: Vec<Vec<f64>> = vec![zero.clone()];
    let mut by_norm: Vec<(f64, usize)> = models
        .pieces
        .iter()
        .enumerate()
        .map(|(k, p)| (linalg::norm2(&p.c), k))
        .filter(|(nrm, _)| *nrm > 0.0)
        .collect();
    by_norm.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(nrm, k) in by_norm.iter().take(MAX_LINEAR_STARTS) {
        starts.push(linalg::scale(&models.pieces[k].c, -omega / nrm));
    }
    // Steepest common descent direction of the linear branches.
    let cs: Vec<Vec<f64>> = models.pieces.iter().map(|p| p.c.clone()).collect();
    let (_, mn) = linalg::min_norm_point(&cs);
    let mn_norm = linalg::norm2(&mn);
    if mn_norm > 0.0 {
        starts.push(linalg::scale(&mn, -omega / mn_norm));
    }
    for d in fixed_directions(n) {
        starts.push(linalg::scale(&d, omega));
    }
    for s in &mut starts {
        region.map(s);
    }
    starts.dedup();

    let mut iterations = 0;
    // Best point reached from each start.
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::with_capacity(starts.len());
    let min_step = 1e-12 * omega;
    for start in starts {
        let mut s = start;
        let (val, mut g) = models.phi_and_subgradient(&s, true);
        iterations += 1;
        if !val.is_finite() {
            return fail(iterations);
        }
        let mut best = (val, s.clone());
        let mut step = omega / 4.0;
        for _ in 0..STEPS {
            if step < min_step {
                break;
            }
            let gn = linalg::norm2(&g);
            if gn == 0.0 {
                break;
            }
            let mut next: Vec<f64> = s.iter().zip(&g).map(|(v, gi)| v - step * gi / gn).collect();
            region.map(&mut next);
            let (v2, g2) = models.phi_and_subgradient(&next, true);
            iterations += 1;
            if !v2.is_finite() {
                return fail(iterations);
            }
            s = next;
            g = g2;
            if v2 < best.0 {
                best = (v2, s.clone());
            }
            step *= STEP_FACTOR;
        }
        candidates.push(best);
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    candidates.dedup_by(|a, b| a.1 == b.1);

    let mut best_s = zero.clone();
    let mut best_t = 0.0;
    for (v, s) in candidates.into_iter().take(LOCAL_STARTS) {
        let (s, v, it) = local_descent(models, region, s, v);
        iterations += it;
        if !v.is_finite() {
            return fail(iterations);
        }
        if v < best_t {
            best_t = v;
            best_s = s;
        }
    }

    let (s, t, polish_iters) = golden_polish(models, region, best_s, best_t);
    iterations += polish_iters;
    if !t.is_finite() {
        return fail(iterations);
    }
    InnerResult {
        s,
        t,
        iterations,
        ok: true,
    }
}

/// Descent along minus the minimum-norm element of the hull of `δ`-active
/// piece gradients, with projected backtracking; `δ` shrinks whenever no
/// progress is possible at the current level.
fn local_descent(
    models: &ModelSet,
    region: &StepRegion,
    mut s: Vec<f64>,
    mut val: f64,
) -> (Vec<f64>, f64, usize) {
    let mut evals = 0;
    let scale = models
        .pieces
        .iter()
        .map(|p| linalg::norm2(&p.c) * region.radius + 0.5 * p.q.max_abs() * region.radius * region.radius)
        .fold(0.0, f64::max);
    if !(scale > 0.0) {
        return (s, val, evals);
    }
    let mut delta = 1e-2 * scale;
    let mut alpha = region.radius / 4.0;
    for _ in 0..LOCAL_ITERS {
        if delta < 1e-12 * scale {
            break;
        }
        let mut grads: Vec<Vec<f64>> = Vec::new();
        for p in &models.pieces {
            let lin = linalg::dot(&p.c, &s);
            let qs = p.q.mul_vec(&s);
            let quad = lin + 0.5 * linalg::dot(&qs, &s);
            if lin >= val - delta {
                grads.push(p.c.clone());
            }
            if quad >= val - delta {
                grads.push(linalg::add(&p.c, &qs));
            }
        }
        evals += 1;
        let (_, d) = linalg::min_norm_point(&grads);
        let dn = linalg::norm2(&d);
        if dn <= 1e-14 * scale / region.radius {
            delta *= 0.1;
            continue;
        }
        let mut moved = false;
        let mut a = (2.0 * alpha).min(region.radius);
        while a > 1e-12 * region.radius {
            let mut next: Vec<f64> = s.iter().zip(&d).map(|(v, di)| v - a * di / dn).collect();
            region.map(&mut next);
            let v2 = models.phi(&next);
            evals += 1;
            if !v2.is_finite() {
                return (s, v2, evals);
            }
            if v2 < val - 1e-15 * scale {
                s = next;
                val = v2;
                alpha = a;
                moved = true;
                break;
            }
            a *= 0.5;
        }
        if !moved {
            delta *= 0.1;
        }
    }
    (s, val, evals)
}

fn golden_polish(
    models: &ModelSet,
    region: &StepRegion,
    mut s: Vec<f64>,
    mut t: f64,
) -> (Vec<f64>, f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_895;
    let n = s.len();
    let mut evals = 0;
    for _ in 0..GOLDEN_SWEEPS {
        for k in 0..n {
            let others: f64 = s
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, v)| v * v)
                .sum();
            let half = (region.radius * region.radius - others).max(0.0).sqrt();
            let lo = region.lo[k].max(-half);
            let hi = region.hi[k].min(half);
            if !(hi > lo) {
                continue;
            }
            let mut trial = s.clone();
            let mut f = |v: f64, trial: &mut Vec<f64>| {
                trial[k] = v;
                evals += 1;
                models.phi(trial)
            };
            let (mut a, mut b) = (lo, hi);
            let mut c = b - INV_PHI * (b - a);
            let mut d = a + INV_PHI * (b - a);
            let mut fc = f(c, &mut trial);
            let mut fd = f(d, &mut trial);
            for _ in 0..GOLDEN_ITERS {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - INV_PHI * (b - a);
                    fc = f(c, &mut trial);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + INV_PHI * (b - a);
                    fd = f(d, &mut trial);
                }
            }
            let (v, fv) = if fc < fd { (c, fc) } else { (d, fd) };
            if fv < t {
                // Recheck feasibility after rounding; the ball test is exact here.
                let mut cand = s.clone();
                cand[k] = v;
                if region.contains(&cand, 0.0) {
                    let val = models.phi(&cand);
                    if val < t {
                        s = cand;
                        t = val;
                    }
                }
            }
        }
    }
    (s, t, evals)
}

/// The chosen `(a*, s*, t*)` at one iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemSolution {
    pub a_star: PartitionElement,
    pub s_star: Vec<f64>,
    pub t_star: f64,
    pub inner_iterations: usize,
    pub feasible: bool,
}

/// Per-point derivative cache, so rejected steps (same `x`, smaller `Ω`)
/// reuse the models.
#[derive(Debug)]
pub struct DerivativeCache<'p> {
    problem: &'p Problem,
    x: Vec<f64>,
    bundles: Vec<Option<DerivativeBundle>>,
}

impl<'p> DerivativeCache<'p> {
    pub fn new(problem: &'p Problem, x: &[f64]) -> Self {
        DerivativeCache {
            problem,
            x: x.to_vec(),
            bundles: vec![None; problem.p()],
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn get(&mut self, i: usize) -> Result<&DerivativeBundle, ProblemError> {
        if self.bundles[i].is_none() {
            self.bundles[i] = Some(self.problem.derivatives(i, &self.x)?);
        }
        Ok(self.bundles[i].as_ref().expect("filled above"))
    }

    pub fn models(&mut self, a: &[usize], cone: &Cone) -> Result<ModelSet, ProblemError> {
        let mut blocks = Vec::with_capacity(a.len());
        for &i in a {
            blocks.push(ModelBlock::from_bundle(self.get(i)?));
        }
        Ok(ModelSet::new(blocks, cone))
    }
}

/// Solves the inner problem for every `a ∈ P_x` and keeps the smallest `t`
/// (lexicographically first among ties).
pub fn solve_subproblem(
    cache: &mut DerivativeCache<'_>,
    cone: &Cone,
    structure: &MinimalStructure,
    radius: f64,
    cap: usize,
) -> Result<(SubproblemSolution, ModelSet), crate::Error> {
    let (lo, hi) = cache.problem.bounds().shift(&cache.x);
    let region = StepRegion { radius, lo, hi };
    let mut best: Option<(SubproblemSolution, ModelSet)> = None;
    let mut total_iters = 0;
    for a in partition::partition_iter(structure, cap)? {
        let models = cache.models(&a, cone)?;
        let res = inner_minimax(&models, &region);
        total_iters += res.iterations;
        let better = match &best {
            None => true,
            Some((cur, _)) => {
                (res.ok && !cur.feasible) || (res.ok && res.t < cur.t_star - TIE_TOL)
            }
        };
        if better {
            best = Some((
                SubproblemSolution {
                    a_star: a,
                    s_star: res.s,
                    t_star: res.t,
                    inner_iterations: 0,
                    feasible: res.ok,
                },
                models,
            ));
        }
    }
    let (mut sol, models) = best.expect("partition set is never empty");
    sol.inner_iterations = total_iters;
    if !sol.feasible {
        sol.s_star = vec![0.0; cache.x.len()];
        sol.t_star = 0.0;
    }
    Ok((sol, models))
}

/// One-shot `θ(x)` and step at radius `Ω` (builds the structure and models).
pub fn theta_and_step(
    problem: &Problem,
    cone: &Cone,
    x: &[f64],
    radius: f64,
) -> Result<SubproblemSolution, crate::Error> {
    let structure =
        partition::minimal_structure(problem, cone, x, partition::DEFAULT_VALUE_TOL)?;
    let mut cache = DerivativeCache::new(problem, x);
    let (sol, _) = solve_subproblem(&mut cache, cone, &structure, radius, partition::DEFAULT_CAP)?;
    Ok(sol)
}
