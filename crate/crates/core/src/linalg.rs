//! Small dense helpers. Dimensions in this crate are tiny (n ≤ 10, m ≤ 5), so
//! plain slices beat pulling in a matrix library.

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ · v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// `vᵀ · self · v` for a square matrix.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(self.rows, self.cols);
        let mut acc = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            acc += vi * dot(self.row(i), v);
        }
        acc
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Replaces a square matrix by `(A + Aᵀ)/2`. The result is exactly
    /// symmetric because both off-diagonal entries get the same rounded sum.
    pub fn symmetrize(&mut self) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Minimum-norm point of the convex hull of `points`.
///
/// Returns `(weights, point)` where `weights` lies in the simplex and
/// `point = Σ weights[i]·points[i]`. Wolfe's active-set method: a finite
/// sequence of affine minimizations over a growing and shrinking corral.
pub fn min_norm_point(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let k = points.len();
    assert!(k > 0, "min_norm_point needs at least one point");
    let d = points[0].len();
    let combine = |idx: &[usize], lam: &[f64]| {
        let mut x = vec![0.0; d];
        for (&i, w) in idx.iter().zip(lam) {
            for (o, v) in x.iter_mut().zip(&points[i]) {
                *o += w * v;
            }
        }
        x
    };
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max);
    if scale == 0.0 || k == 1 {
        let mut w = vec![0.0; k];
        w[0] = 1.0;
        return (w, points[0].clone());
    }
    let tol = 1e-12 * scale;

    let first = (0..k)
        .min_by(|&a, &b| dot(&points[a], &points[a]).total_cmp(&dot(&points[b], &points[b])))
        .expect("k > 0");
    let mut corral = vec![first];
    let mut lam = vec![1.0];
    let mut x = points[first].clone();
    for _ in 0..(50 * k + 100) {
        let xx = dot(&x, &x);
        let (j, xp) = (0..k)
            .map(|j| (j, dot(&x, &points[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("k > 0");
        if xx - xp <= tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lam.push(0.0);
        loop {
            let mu = affine_min_norm(points, &corral);
            if mu.iter().all(|&m| m > 1e-15) {
                lam = mu;
                break;
            }
            // Move towards the affine minimizer until a weight hits zero.
            let theta = lam
                .iter()
                .zip(&mu)
                .filter(|(_, m)| **m <= 1e-15)
                .map(|(l, m)| if l - m > 0.0 { l / (l - m) } else { 0.0 })
                .fold(1.0_f64, f64::min);
            for (l, m) in lam.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let mut keep = lam.iter().map(|l| *l > 1e-15).collect::<Vec<_>>();
            if keep.iter().all(|&b| b) {
                // Guard against a stalled step: drop the smallest weight.
                let (imin, _) = lam
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("corral non-empty");
                keep[imin] = false;
            }
            let mut c2 = Vec::with_capacity(corral.len());
            let mut l2 = Vec::with_capacity(corral.len());
            for ((c, l), kp) in corral.iter().zip(&lam).zip(&keep) {
                if *kp {
                    c2.push(*c);
                    l2.push(*l);
                }
            }
            let total: f64 = l2.iter().sum();
            corral = c2;
            lam = l2.into_iter().map(|l| l / total).collect();
            if corral.len() == 1 {
                break;
            }
        }
        x = combine(&corral, &lam);
    }
    let mut weights = vec![0.0; k];
    for (&i, l) in corral.iter().zip(&lam) {
        weights[i] += l;
    }
    (weights, x)
}

/// Weights `μ` with `Σμ = 1` minimizing `‖Σ μ_i p_i‖` over the affine hull of
/// the corral (bordered Gram system, lightly regularized).
fn affine_min_norm(points: &[Vec<f64>], corral: &[usize]) -> Vec<f64> {
    let c = corral.len();
    if c == 1 {
        return vec![1.0];
    }
    let n = c + 1;
    let mut a = vec![vec![0.0; n + 1]; n];
    let mut trace = 0.0;
    for i in 0..c {
        for j in 0..c {
            a[i][j] = dot(&points[corral[i]], &points[corral[j]]);
        }
        trace += a[i][i];
        a[i][c] = 1.0;
        a[c][i] = 1.0;
    }
    for (i, row) in a.iter_mut().enumerate().take(c) {
        row[i] += 1e-13 * trace.max(f64::MIN_POSITIVE);
    }
    a[c][n] = 1.0;
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
            .expect("non-empty range");
        a.swap(col, piv);
        let pv = a[col][col];
        if pv.abs() < 1e-300 {
            continue;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col] / pv;
                if f != 0.0 {
                    for cc in col..=n {
                        a[r][cc] -= f * a[col][cc];
                    }
                }
            }
        }
    }
    (0..c)
        .map(|i| if a[i][i].abs() < 1e-300 { 0.0 } else { a[i][n] / a[i][i] })
        .collect()
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let nrows = a.len();
    let ncols = a[0].len();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let piv = (r..nrows)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[piv][c].abs() <= tol {
            continue;
        }
        a.swap(r, piv);
        for i in (r + 1)..nrows {
            let f = a[i][c] / a[r][c];
            for j in c..ncols {
                a[i][j] -= f * a[r][j];
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_sums_to_one() {
        let mut v = vec![0.3, -1.0, 2.5, 0.1];
        project_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|&x| x >= 0.0));
        assert_eq!(v, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn min_norm_point_of_segment_through_origin_side() {
        // Segment from (1,1) to (1,-1): closest point is (1,0).
        let (w, p) = min_norm_point(&[vec![1.0, 1.0], vec![1.0, -1.0]]);
        assert!((p[0] - 1.0).abs() < 1e-9 && p[1].abs() < 1e-9, "{p:?}");
        assert!((w[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn min_norm_point_zero_when_hull_contains_origin() {
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let (_, p) = min_norm_point(&pts);
        assert!(norm2(&p) < 1e-7, "{p:?}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(2000))]
        /// Optimality certificate: `xᵀp_j ≥ ‖x‖²` for every point.
        #[test]
        fn min_norm_point_certificate(
            pts in proptest::collection::vec(proptest::collection::vec(-3.0..3.0f64, 3), 1..25),
        ) {
            let (w, x) = min_norm_point(&pts);
            proptest::prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            proptest::prop_assert!(w.iter().all(|&v| v >= 0.0));
            let mut comb = vec![0.0; 3];
            for (wi, p) in w.iter().zip(&pts) {
                for (c, v) in comb.iter_mut().zip(p) {
                    *c += wi * v;
                }
            }
            proptest::prop_assert!(norm_inf(&sub(&comb, &x)) < 1e-9);
            let xx = dot(&x, &x);
            for p in &pts {
                proptest::prop_assert!(dot(&x, p) >= xx - 1e-9, "x = {:?}", x);
            }
        }
    }

    #[test]
    fn rank_detects_dependence() {
        assert_eq!(rank(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1e-12), 1);
        assert_eq!(rank(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], 1e-12), 2);
    }

    #[test]
    fn quad_form_matches_hand_value() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 4.0]]);
        // [1,2] A [1,2]ᵀ = 2 + 2·1·2 + 4·4 = 22
        assert_eq!(a.quad_form(&[1.0, 2.0]), 22.0);
    }
}
