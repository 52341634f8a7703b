//! Reference values for the non-monotone ratio tests.
//!
//! All three trust-region drivers share one interface: before the ratio test
//! the driver asks for the reference rows of the active indices `a^k`, after
//! the acceptance decision it reports the value matrix at `x_{k+1}`.

use std::collections::VecDeque;

use crate::linalg::Matrix;

/// Reference bookkeeping for one run.
#[derive(Debug, Clone)]
pub enum Memory {
    /// `ref = F(x_k)`.
    Monotone { current: Matrix },
    Max(MaxMemory),
    Avg(AvgMemory),
}

impl Memory {
    pub fn monotone(f0: Matrix) -> Self {
        Memory::Monotone { current: f0 }
    }

    /// Reference rows `ref_j` for the indices in `a` (the active tuple at `x_k`).
    pub fn reference(&mut self, a: &[usize], f_current: &Matrix) -> Vec<Vec<f64>> {
        match self {
            Memory::Monotone { current } => a.iter().map(|&i| current.row(i).to_vec()).collect(),
            Memory::Max(m) => m.reference(a),
            Memory::Avg(m) => m.reference(a, f_current),
        }
    }

    /// Records the outcome of the iteration; `f_next` is `F(x_{k+1})`.
    pub fn commit(&mut self, accepted: bool, f_next: &Matrix) {
        match self {
            Memory::Monotone { current } => {
                if accepted {
                    *current = f_next.clone();
                }
            }
            Memory::Max(m) => m.commit(accepted, f_next),
            Memory::Avg(m) => m.commit(f_next),
        }
    }

    /// Rows of the reference that the next iteration starts from, for the
    /// indices in `a` (only the averaged reference changes on rejection).
    pub fn snapshot(&self, a: &[usize]) -> Option<Vec<Vec<f64>>> {
        match self {
            Memory::Avg(m) => Some(a.iter().map(|&i| m.c.row(i).to_vec()).collect()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    values: Matrix,
    a: Option<Vec<usize>>,
}

/// Sliding window over the last `N̂ + 1` accepted iterates.
///
/// The reference of row `i` is the componentwise maximum of `f^i` over the
/// newest entries whose recorded tuple equals the current `a^k` (the current
/// iterate always qualifies). An iterate's tuple is the one chosen at it most
/// recently. With `N̂ = 0` the window holds only `x_k`.
#[derive(Debug, Clone)]
pub struct MaxMemory {
    depth: usize,
    window: VecDeque<Entry>,
    /// `N_k`, reported for tracing.
    pub n_k: usize,
}

impl MaxMemory {
    pub fn new(depth: usize, f0: Matrix) -> Self {
        let mut window = VecDeque::with_capacity(depth + 1);
        window.push_back(Entry { values: f0, a: None });
        MaxMemory {
            depth,
            window,
            n_k: 0,
        }
    }

    pub fn reference(&mut self, a: &[usize]) -> Vec<Vec<f64>> {
        let last = self.window.back_mut().expect("window never empty");
        last.a = Some(a.to_vec());
        let mut refs: Vec<Vec<f64>> = a.iter().map(|&i| last.values.row(i).to_vec()).collect();
        for e in self.window.iter().rev().skip(1) {
            if e.a.as_deref() != Some(a) {
                break;
            }
            for (r, &i) in refs.iter_mut().zip(a) {
                for (v, w) in r.iter_mut().zip(e.values.row(i)) {
                    *v = v.max(*w);
                }
            }
        }
        refs
    }

    pub fn commit(&mut self, accepted: bool, f_next: &Matrix) {
        if accepted {
            if self.window.len() == self.depth + 1 {
                self.window.pop_front();
            }
            self.window.push_back(Entry {
                values: f_next.clone(),
                a: None,
            });
        }
        self.n_k = (self.n_k + 1).min(self.depth);
    }
}

/// Weighted running average `C_k` with weight `q_k`.
#[derive(Debug, Clone)]
pub struct AvgMemory {
    mu: f64,
    c: Matrix,
    q: f64,
    streak: bool,
    prev_a: Option<Vec<usize>>,
}

impl AvgMemory {
    pub fn new(mu: f64, f0: Matrix) -> Self {
        AvgMemory {
            mu,
            c: f0,
            q: 1.0,
            streak: true,
            prev_a: None,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// Once the tuple changes the average restarts from `F(x_k)` and stays
    /// equal to the current values from then on.
    pub fn reference(&mut self, a: &[usize], f_current: &Matrix) -> Vec<Vec<f64>> {
        if let Some(prev) = &self.prev_a {
            if self.streak && prev.as_slice() != a {
                self.streak = false;
                self.c = f_current.clone();
                self.q = 1.0;
            }
        }
        self.prev_a = Some(a.to_vec());
        a.iter().map(|&i| self.c.row(i).to_vec()).collect()
    }

    /// Applied on every iteration, accepted or not.
    pub fn commit(&mut self, f_next: &Matrix) {
        if self.streak {
            let q_next = self.mu * self.q + 1.0;
            let wc = self.mu * self.q / q_next;
            let wf = 1.0 / q_next;
            for i in 0..self.c.rows() {
                let fr = f_next.row(i);
                for (c, f) in self.c.row_mut(i).iter_mut().zip(fr) {
                    *c = wc * *c + wf * f;
                }
            }
            self.q = q_next;
        } else {
            self.c = f_next.clone();
            self.q = 1.0;
        }
    }
}
