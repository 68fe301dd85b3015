//! The coordinate map `S` on the positive orthant and its inversion.
//!
//! For `x` in the open positive orthant with `t = sum x_i` and
//! `y_j = t - x_j`, the map is
//!
//! ```text
//! S(x)_j = x_j (1 + y_j) / t .
//! ```
//!
//! Its range is the open region `D_n = { s > 0 : sum s_i > 1 and
//! s_j < 1 + sum_{i != j} s_i for every j }`, and `S` is a bijection onto
//! `D_n`. Inversion reduces to a one-dimensional search: with `b = x / t`
//! each coordinate satisfies `t b_i^2 - (1+t) b_i + s_i = 0`, so
//!
//! ```text
//! b_i(t) = (1 + t +- sqrt(Q_i(t))) / (2t),   Q_i(r) = (1+r)^2 - 4 r s_i ,
//! ```
//!
//! and `t` is a root of `sum_i b_i(t) = 1`. At most one coordinate can take
//! the `+` branch (that branch forces `b_i > 1/2`), and only a coordinate
//! with `s_i > 1` can. [`invert_s`] scans every admissible sign pattern over
//! every interval where all discriminants are nonnegative, polishes each
//! candidate with a damped Newton iteration on the full map, and accepts
//! only candidates whose final residual meets the requested tolerance; no
//! monotonicity of the scalar equation is assumed anywhere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default acceptance tolerance for `max_j |S(x)_j - s_j|` in [`invert_s`].
pub const DEFAULT_MAP_RESIDUAL: f64 = 1e-10;

/// Discriminant values in `(DISCRIMINANT_CLAMP, 0)` are rounded up to zero
/// before the square root; they arise from cancellation at the endpoints of
/// the valid `t` intervals.
pub const DISCRIMINANT_CLAMP: f64 = -1e-14;

/// Geometric scan of the unbounded `t` segment stops here; if no candidate
/// root below this bound passes validation, inversion reports failure.
const T_MAX: f64 = 1e9;

const T_MIN: f64 = 1e-9;
const SCAN_POINTS: usize = 256;

/// A point of the open positive orthant, with the derived sums cached.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantPoint {
    x: Vec<f64>,
    t: f64,
    y: Vec<f64>,
}

impl OrthantPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::ZeroRank);
        }
        if !x.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::NotPositive);
        }
        let t: f64 = x.iter().sum();
        let y = x.iter().map(|xi| t - xi).collect();
        Ok(OrthantPoint { x, t, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `t = sum x_i`.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `y_j = t - x_j`.
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `theta_j = 1 + y_j - x_j`; positive exactly when `S(x)` satisfies the
    /// strict range inequalities.
    pub fn theta(&self) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(xi, yi)| 1.0 + yi - xi)
            .collect()
    }
}

/// A candidate value of `S`, i.e. a positive vector to be inverted.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPoint {
    s: Vec<f64>,
}

impl TargetPoint {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::ZeroRank);
        }
        if !s.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::NotPositive);
        }
        Ok(TargetPoint { s })
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.s
    }

    /// Strict membership in the range `D_n`.
    pub fn in_range(&self) -> bool {
        let total: f64 = self.s.iter().sum();
        total > 1.0 && self.s.iter().all(|sj| 2.0 * sj - total < 1.0)
    }

    fn range_violation(&self) -> Option<String> {
        let total: f64 = self.s.iter().sum();
        if total <= 1.0 {
            return Some(format!("sum of entries {total} must exceed 1"));
        }
        for (j, sj) in self.s.iter().enumerate() {
            if 2.0 * sj - total >= 1.0 {
                return Some(format!(
                    "entry {} = {} is not below 1 + sum of the others = {}",
                    j + 1,
                    sj,
                    1.0 + (total - sj)
                ));
            }
        }
        None
    }
}

/// Applies the map `S`.
pub fn apply_s(p: &OrthantPoint) -> TargetPoint {
    let s = p
        .x
        .iter()
        .zip(&p.y)
        .map(|(xi, yi)| xi * (1.0 + yi) / p.t)
        .collect();
    TargetPoint { s }
}

/// The Jacobian `dS_i/dx_j`: diagonal `(y_i^2 + y_i)/t^2`, with every
/// off-diagonal entry of row `i` equal to `(x_i^2 - x_i)/t^2`.
pub fn jacobian(p: &OrthantPoint) -> DMatrix<f64> {
    let n = p.dim();
    let t2 = p.t * p.t;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (p.y[i] * p.y[i] + p.y[i]) / t2
        } else {
            (p.x[i] * p.x[i] - p.x[i]) / t2
        }
    })
}

/// Determinant of the arrow matrix with diagonal `r_i` whose row `i` is
/// constant `p_i` off the diagonal: with `q_i = r_i - p_i`,
///
/// ```text
/// det = prod_i q_i + sum_j p_j prod_{i != j} q_i .
/// ```
pub fn det_arrow(r: &[f64], p: &[f64]) -> Result<f64> {
    if r.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: r.len(), got: p.len() });
    }
    if r.is_empty() {
        return Err(Error::ZeroRank);
    }
    let q: Vec<f64> = r.iter().zip(p).map(|(ri, pi)| ri - pi).collect();
    let mut det: f64 = q.iter().product();
    for j in 0..r.len() {
        let others: f64 = q
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, qi)| qi)
            .product();
        det += p[j] * others;
    }
    Ok(det)
}

/// Builds the arrow matrix described by [`det_arrow`].
pub fn arrow_matrix(r: &[f64], p: &[f64]) -> DMatrix<f64> {
    let n = r.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { r[i] } else { p[i] })
}

/// Jacobian determinant in closed form:
/// `det S'(x) = P / t^(n+1)` with
/// `P = sum_j x_j y_j prod_{i != j} theta_i` and `theta_i = 1 + y_i - x_i`.
/// Positive on the whole orthant.
pub fn det_jacobian(p: &OrthantPoint) -> f64 {
    let n = p.dim();
    let theta = p.theta();
    let mut acc = 0.0;
    for j in 0..n {
        let others: f64 = theta
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, th)| th)
            .product();
        acc += p.x[j] * p.y[j] * others;
    }
    acc / p.t.powi(n as i32 + 1)
}

/// `Q_i` evaluated stably. For `s_i > 1` the factored form over the real
/// roots avoids cancellation at the segment endpoints; otherwise the direct
/// form plus the clamp handles the near-zero case `s_i ~ 1, t ~ 1`.
fn discriminant(t: f64, si: f64, roots: Option<(f64, f64)>) -> f64 {
    let q = match roots {
        Some((lo, hi)) => (t - lo) * (t - hi),
        None => (1.0 + t) * (1.0 + t) - 4.0 * t * si,
    };
    if q < 0.0 && q > DISCRIMINANT_CLAMP {
        0.0
    } else {
        q
    }
}

struct ScalarReduction {
    s: Vec<f64>,
    /// real roots of `Q_i` for the coordinates with `s_i > 1`
    roots: Vec<Option<(f64, f64)>>,
}

impl ScalarReduction {
    fn new(s: &[f64]) -> Self {
        let roots = s
            .iter()
            .map(|&si| {
                if si > 1.0 {
                    let d = 2.0 * (si * si - si).sqrt();
                    Some((2.0 * si - 1.0 - d, 2.0 * si - 1.0 + d))
                } else {
                    None
                }
            })
            .collect();
        ScalarReduction { s: s.to_vec(), roots }
    }

    /// `b(t)` under the sign pattern `plus_at`, or `None` if some
    /// discriminant is genuinely negative.
    fn b_of(&self, t: f64, plus_at: Option<usize>) -> Option<Vec<f64>> {
        let mut b = Vec::with_capacity(self.s.len());
        for (i, &si) in self.s.iter().enumerate() {
            let q = discriminant(t, si, self.roots[i]);
            if q < 0.0 {
                return None;
            }
            let root = q.sqrt();
            if plus_at == Some(i) {
                b.push((1.0 + t + root) / (2.0 * t));
            } else {
                // rationalized minus branch, stable for small s_i
                b.push(2.0 * si / (1.0 + t + root));
            }
        }
        Some(b)
    }

    fn g(&self, t: f64, plus_at: Option<usize>) -> Option<f64> {
        self.b_of(t, plus_at).map(|b| b.iter().sum::<f64>() - 1.0)
    }

    /// Maximal intervals of `t > 0` on which every discriminant is
    /// nonnegative.
    fn segments(&self) -> Vec<(f64, f64)> {
        let mut excluded: Vec<(f64, f64)> = self.roots.iter().flatten().copied().collect();
        excluded.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for iv in excluded {
            match merged.last_mut() {
                Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
                _ => merged.push(iv),
            }
        }
        let mut segments = Vec::new();
        let mut lo = T_MIN;
        for (a, b) in merged {
            if a > lo {
                segments.push((lo, a));
            }
            lo = lo.max(b);
        }
        if lo < T_MAX {
            segments.push((lo, T_MAX));
        }
        segments
    }
}

fn residual_inf(x: &OrthantPoint, s: &[f64]) -> f64 {
    apply_s(x)
        .s
        .iter()
        .zip(s)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Damped Newton iteration on `S(x) = s` using the analytic Jacobian,
/// keeping every coordinate positive and every step residual-decreasing.
fn newton_polish(x0: Vec<f64>, s: &[f64]) -> Option<(OrthantPoint, f64)> {
    let target = 1e-15 * (1.0 + s.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let mut p = OrthantPoint::new(x0).ok()?;
    let mut res = residual_inf(&p, s);
    for _ in 0..60 {
        if res <= target {
            break;
        }
        let rhs = DVector::from_iterator(
            s.len(),
            apply_s(&p).s.iter().zip(s).map(|(a, b)| b - a),
        );
        let delta = match jacobian(&p).lu().solve(&rhs) {
            Some(d) => d,
            None => break,
        };
        let mut eta = 1.0;
        let mut improved = false;
        while eta > 1e-8 {
            let xn: Vec<f64> = p.x.iter().zip(delta.iter()).map(|(xi, di)| xi + eta * di).collect();
            if xn.iter().all(|v| *v > 0.0) {
                if let Ok(pn) = OrthantPoint::new(xn) {
                    let rn = residual_inf(&pn, s);
                    if rn < res {
                        p = pn;
                        res = rn;
                        improved = true;
                        break;
                    }
                }
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Some((p, res))
}

/// Inverts `S`, accepting only a result with
/// `max_j |S(x)_j - s_j| <= tol`.
pub fn invert_s(q: &TargetPoint, tol: f64) -> Result<OrthantPoint> {
    if let Some(reason) = q.range_violation() {
        return Err(Error::OutsideRange { reason });
    }
    let s = &q.s;
    let n = s.len();
    let red = ScalarReduction::new(s);
    let segments = red.segments();

    let mut patterns: Vec<Option<usize>> = vec![None];
    patterns.extend((0..n).filter(|&i| s[i] > 1.0).map(Some));

    let mut best = f64::INFINITY;
    for &pattern in &patterns {
        for &(lo, hi) in &segments {
            let mut candidates: Vec<f64> = Vec::new();
            let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS as f64 - 1.0));
            let mut prev: Option<(f64, f64)> = None;
            for k in 0..SCAN_POINTS {
                // endpoints included exactly: roots can sit on them
                let t = if k == SCAN_POINTS - 1 { hi } else { lo * ratio.powi(k as i32) };
                let g = match red.g(t, pattern) {
                    Some(g) => g,
                    None => {
                        prev = None;
                        continue;
                    }
                };
                if g.abs() < 1e-9 {
                    candidates.push(t);
                }
                if let Some((tp, gp)) = prev {
                    if gp * g < 0.0 {
                        if let Some(t_root) = bisect(&red, pattern, tp, gp, t) {
                            candidates.push(t_root);
                        }
                    }
                }
                prev = Some((t, g));
            }
            for t in candidates {
                let Some(b) = red.b_of(t, pattern) else { continue };
                if !b.iter().all(|v| *v > 0.0) {
                    continue;
                }
                let x0: Vec<f64> = b.iter().map(|bi| t * bi).collect();
                if let Some((p, res)) = newton_polish(x0, s) {
                    if res <= tol {
                        return Ok(p);
                    }
                    best = best.min(res);
                }
            }
        }
    }
    Err(Error::NoConvergence { tol, best })
}

/// Bisection on the scalar equation, driven to relative width `1e-13`.
fn bisect(red: &ScalarReduction, pattern: Option<usize>, mut lo: f64, mut glo: f64, mut hi: f64) -> Option<f64> {
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        let gm = red.g(mid, pattern)?;
        if glo * gm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Closed-form inverse in dimension 2:
/// `x_1 = (s_1 + s_2 - 1)/(1 + s_2 - s_1)` and symmetrically for `x_2`.
pub fn invert_s_dim2(q: &TargetPoint) -> Result<OrthantPoint> {
    if q.dim() != 2 {
        return Err(Error::NotDimensionTwo { got: q.dim() });
    }
    if let Some(reason) = q.range_violation() {
        return Err(Error::OutsideRange { reason });
    }
    let (s1, s2) = (q.s[0], q.s[1]);
    let num = s1 + s2 - 1.0;
    OrthantPoint::new(vec![num / (1.0 + s2 - s1), num / (1.0 + s1 - s2)])
}

/// Residual-minimizing nested grid search over a box, independent of
/// [`invert_s`]; only [`apply_s`] is consulted. Returns the best point and
/// its residual. Refinement never leaves the supplied box.
pub fn grid_search(q: &TargetPoint, lo: &[f64], hi: &[f64], points_per_dim: usize, levels: usize) -> (Vec<f64>, f64) {
    let n = q.dim();
    let outer_lo = lo.to_vec();
    let outer_hi = hi.to_vec();
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    let mut best_x = vec![0.0; n];
    let mut best_r = f64::INFINITY;
    for _ in 0..levels {
        let steps: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) / (points_per_dim as f64 - 1.0))
            .collect();
        let (x, r) = grid_pass(q, &lo, &steps, points_per_dim);
        if r < best_r {
            best_r = r;
            best_x = x;
        }
        // shrink the box around the best point, staying inside the
        // original bounds
        for d in 0..n {
            let half = 1.5 * steps[d];
            lo[d] = (best_x[d] - half).max(outer_lo[d]).max(1e-12);
            hi[d] = (best_x[d] + half).min(outer_hi[d]);
        }
    }
    (best_x, best_r)
}

/// One exhaustive pass over a `points_per_dim^n` grid anchored at `lo` with
/// the given per-axis steps. Returns the best sampled point and its residual.
fn grid_pass(q: &TargetPoint, lo: &[f64], steps: &[f64], points_per_dim: usize) -> (Vec<f64>, f64) {
    let n = q.dim();
    let mut best_x = vec![0.0; n];
    let mut best_r = f64::INFINITY;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx
            .iter()
            .zip(lo.iter().zip(steps))
            .map(|(&k, (a, st))| (a + k as f64 * st).max(1e-12))
            .collect();
        if let Ok(p) = OrthantPoint::new(x.clone()) {
            let r = residual_inf(&p, &q.s);
            if r < best_r {
                best_r = r;
                best_x = x;
            }
        }
        // odometer increment
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < points_per_dim {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == n {
                break;
            }
        }
        if d == n {
            break;
        }
    }
    (best_x, best_r)
}

/// Valley-following grid refinement: repeat a coarse pass over the current
/// box, re-centering it at the best point whenever that point sits near a
/// face (the residual valley continues past the box), and shrinking it only
/// when the best point is interior. The box may wander anywhere in the
/// positive orthant.
fn slide_refine(q: &TargetPoint, center: &[f64], halfwidth: f64) -> (Vec<f64>, f64) {
    const POINTS: usize = 13;
    let n = q.dim();
    let mut half = vec![halfwidth; n];
    let mut lo: Vec<f64> = center.iter().zip(&half).map(|(c, h)| (c - h).max(1e-12)).collect();
    let mut hi: Vec<f64> = center.iter().zip(&half).map(|(c, h)| c + h).collect();
    let mut best_x = center.to_vec();
    let mut best_r = f64::INFINITY;
    for _ in 0..200 {
        let steps: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) / (POINTS as f64 - 1.0))
            .collect();
        let (x, r) = grid_pass(q, &lo, &steps, POINTS);
        if r < best_r {
            best_r = r;
            best_x = x.clone();
        }
        let near_face = (0..n).any(|d| {
            x[d] - lo[d] < 1.001 * steps[d] || hi[d] - x[d] < 1.001 * steps[d]
        });
        if !near_face {
            for d in 0..n {
                half[d] = 1.5 * steps[d];
            }
        }
        for d in 0..n {
            lo[d] = (x[d] - half[d]).max(1e-12);
            hi[d] = x[d] + half[d];
        }
        let scale = 1.0 + best_x.iter().fold(0.0f64, |m, v| m.max(*v));
        if best_r == 0.0 || steps.iter().all(|s| *s < 1e-13 * scale) {
            break;
        }
    }
    (best_x, best_r)
}

/// Brute-force inverse for dimensions up to 3: a dense global scan picks a
/// handful of well-separated candidate cells, each cell is refined by the
/// valley-following grid, and the best refined point wins. The outer box is
/// grown until the optimum stops landing on its boundary.
pub fn oracle_invert_s(q: &TargetPoint) -> Result<OrthantPoint> {
    if q.dim() > 3 {
        return Err(Error::GridDimension { got: q.dim() });
    }
    if let Some(reason) = q.range_violation() {
        return Err(Error::OutsideRange { reason });
    }
    let n = q.dim();
    const GLOBAL_POINTS: usize = 41;
    let mut bound = 2.0 * (1.0 + q.s.iter().sum::<f64>());
    for _ in 0..12 {
        let lo = 1e-3;
        let step = (bound - lo) / (GLOBAL_POINTS as f64 - 1.0);
        // rank every global grid point by residual
        let mut scored: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let x: Vec<f64> = idx.iter().map(|&k| lo + k as f64 * step).collect();
            if let Ok(p) = OrthantPoint::new(x) {
                scored.push((residual_inf(&p, &q.s), idx.clone()));
            }
            let mut d = 0;
            loop {
                idx[d] += 1;
                if idx[d] < GLOBAL_POINTS {
                    break;
                }
                idx[d] = 0;
                d += 1;
                if d == n {
                    break;
                }
            }
            if d == n {
                break;
            }
        }
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite residuals"));
        // keep the best few cells that are pairwise well separated
        let mut seeds: Vec<Vec<usize>> = Vec::new();
        for (_, cell) in &scored {
            let far = seeds.iter().all(|s| {
                s.iter().zip(cell).map(|(a, b)| a.abs_diff(*b)).max().unwrap_or(0) > 2
            });
            if far {
                seeds.push(cell.clone());
                if seeds.len() == 4 {
                    break;
                }
            }
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for seed in seeds {
            let center: Vec<f64> = seed.iter().map(|&k| lo + k as f64 * step).collect();
            let (x, r) = slide_refine(q, &center, 2.0 * step);
            if best.as_ref().is_none_or(|(_, br)| r < *br) {
                best = Some((x, r));
            }
        }
        let (x, _r) = best.expect("at least one candidate cell");
        if x.iter().any(|v| *v > 0.93 * bound) {
            bound *= 2.0;
            continue;
        }
        return OrthantPoint::new(x);
    }
    Err(Error::NoConvergence { tol: 0.0, best: f64::INFINITY })
}
