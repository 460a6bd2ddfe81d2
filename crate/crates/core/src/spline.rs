//! C¹ concatenations of quadratic Bézier segments and their least-squares fit.
//!
//! A spline with `N` segments is stored through its free weights: the first
//! two control points of segment 0 followed by the end point of every
//! segment. The remaining control points follow from the joint constraints
//!
//! ```text
//! w3[i] = w1[i+1]
//! w2[i] - w3[i] = w1[i+1] - w2[i+1]
//! ```
//!
//! and, when the terminal constraint is on, `w2[N-1] = w3[N-1]` removes the
//! last end point from the free set.

use log::warn;
use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled demonstration: `M` points in `D` dimensions with optional timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: DMatrix<f64>,
    timestamps: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(points: Vec<Vec<f64>>, timestamps: Option<Vec<f64>>) -> Result<Self> {
        let m = points.len();
        if m < 3 {
            return Err(Error::domain(format!(
                "trajectory needs at least 3 samples, got {m}"
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::domain("trajectory dimension must be at least 1"));
        }
        for (j, row) in points.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::domain(format!(
                    "sample {j} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain(format!("sample {j} is not finite")));
            }
        }
        if let Some(ts) = &timestamps {
            if ts.len() != m {
                return Err(Error::domain(format!(
                    "{} timestamps for {m} samples",
                    ts.len()
                )));
            }
            if ts.iter().any(|t| !t.is_finite()) {
                return Err(Error::domain("timestamps must be finite"));
            }
            if ts.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::domain("timestamps must be non-decreasing"));
            }
            if ts[0] == ts[m - 1] {
                return Err(Error::Degenerate("all timestamps are equal".into()));
            }
        }
        let points = DMatrix::from_fn(m, dim, |r, c| points[r][c]);
        Ok(Trajectory { points, timestamps })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// `M × D` sample matrix.
    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn point(&self, j: usize) -> Vec<f64> {
        self.points.row(j).iter().copied().collect()
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }
}

/// The three control points of one quadratic Bézier segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentControl {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
}

impl SegmentControl {
    pub fn new(w1: Vec<f64>, w2: Vec<f64>, w3: Vec<f64>) -> Result<Self> {
        let d = w1.len();
        if d == 0 || w2.len() != d || w3.len() != d {
            return Err(Error::domain("control points must share a non-zero dimension"));
        }
        if w1.iter().chain(&w2).chain(&w3).any(|v| !v.is_finite()) {
            return Err(Error::domain("control points must be finite"));
        }
        Ok(SegmentControl { w1, w2, w3 })
    }

    pub fn dim(&self) -> usize {
        self.w1.len()
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        let [b0, b1, b2] = bernstein_weights(t);
        (0..self.dim())
            .map(|k| b0 * self.w1[k] + b1 * self.w2[k] + b2 * self.w3[k])
            .collect()
    }

    pub fn tangent_at(&self, t: f64) -> Vec<f64> {
        let (c1, c2, c3) = (-2.0 * (1.0 - t), 2.0 - 4.0 * t, 2.0 * t);
        (0..self.dim())
            .map(|k| c1 * self.w1[k] + c2 * self.w2[k] + c3 * self.w3[k])
            .collect()
    }
}

#[inline]
pub(crate) fn bernstein_weights(t: f64) -> [f64; 3] {
    let u = 1.0 - t;
    [u * u, 2.0 * u * t, t * t]
}

/// Quadratic Bernstein basis `[(1-t)², 2(1-t)t, t²]`.
pub fn bernstein_row(t: f64) -> Result<[f64; 3]> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("local parameter {t} outside [0, 1]")));
    }
    Ok(bernstein_weights(t))
}

/// Cubic Bernstein basis, used by the cubic-spline comparison family.
pub fn cubic_bernstein_row(t: f64) -> Result<[f64; 4]> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("local parameter {t} outside [0, 1]")));
    }
    let u = 1.0 - t;
    Ok([u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t])
}

/// Number of free weights per dimension.
pub fn free_parameter_count(n_segments: usize, terminal_zero_velocity: bool) -> usize {
    if terminal_zero_velocity {
        n_segments + 1
    } else {
        n_segments + 2
    }
}

/// Expands one dimension of free weights into per-segment control triples.
fn expand_free(free: &[f64], n: usize, terminal: bool) -> Vec<[f64; 3]> {
    debug_assert_eq!(free.len(), free_parameter_count(n, terminal));
    let mut out = Vec::with_capacity(n);
    let (mut w1, mut w2) = (free[0], free[1]);
    for i in 0..n {
        let w3 = if terminal && i == n - 1 { w2 } else { free[2 + i] };
        out.push([w1, w2, w3]);
        let next_w2 = 2.0 * w3 - w2;
        w1 = w3;
        w2 = next_w2;
    }
    out
}

/// Linear map from free weights to stacked segment control points, plus the
/// monomial-to-Bernstein coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSystem {
    n_segments: usize,
    terminal_zero_velocity: bool,
    constraint_map: DMatrix<f64>,
    polynomial_coeffs: Matrix3<f64>,
}

impl BasisSystem {
    pub fn n_segments(&self) -> usize {
        self.n_segments
    }

    pub fn terminal_zero_velocity(&self) -> bool {
        self.terminal_zero_velocity
    }

    /// `3N × K` matrix; row `3i + k` is control point `k` of segment `i`.
    pub fn constraint_map(&self) -> &DMatrix<f64> {
        &self.constraint_map
    }

    /// `B` with `[1, t, t²] · B = bernstein_row(t)`.
    pub fn polynomial_coeffs(&self) -> &Matrix3<f64> {
        &self.polynomial_coeffs
    }

    pub fn n_free(&self) -> usize {
        self.constraint_map.ncols()
    }

    /// Design-matrix row for global parameter `s ∈ [0, N]`.
    pub fn design_row(&self, s: f64) -> Result<Vec<f64>> {
        let (idx, t) = locate(s, self.n_segments)?;
        let mono = [1.0, t, t * t];
        let mut basis = [0.0; 3];
        for (k, b) in basis.iter_mut().enumerate() {
            *b = (0..3).map(|r| mono[r] * self.polynomial_coeffs[(r, k)]).sum();
        }
        Ok((0..self.n_free())
            .map(|c| {
                (0..3)
                    .map(|k| basis[k] * self.constraint_map[(3 * idx + k, c)])
                    .sum()
            })
            .collect())
    }

    /// Design matrix `Φ` for a list of global parameters.
    pub fn design_matrix(&self, params: &[f64]) -> Result<DMatrix<f64>> {
        let mut phi = DMatrix::zeros(params.len(), self.n_free());
        for (j, &s) in params.iter().enumerate() {
            let row = self.design_row(s)?;
            for (c, v) in row.into_iter().enumerate() {
                phi[(j, c)] = v;
            }
        }
        Ok(phi)
    }
}

pub fn build_constraint_map(n_segments: usize, terminal_zero_velocity: bool) -> Result<BasisSystem> {
    if n_segments < 1 {
        return Err(Error::domain("number of segments must be at least 1"));
    }
    let k = free_parameter_count(n_segments, terminal_zero_velocity);
    let mut c = DMatrix::zeros(3 * n_segments, k);
    let mut unit = vec![0.0; k];
    for col in 0..k {
        unit.iter_mut().for_each(|v| *v = 0.0);
        unit[col] = 1.0;
        for (i, tri) in expand_free(&unit, n_segments, terminal_zero_velocity)
            .iter()
            .enumerate()
        {
            for (r, v) in tri.iter().enumerate() {
                c[(3 * i + r, col)] = *v;
            }
        }
    }
    #[rustfmt::skip]
    let b = Matrix3::new(
        1.0, 0.0, 0.0,
        -2.0, 2.0, 0.0,
        1.0, -2.0, 1.0,
    );
    Ok(BasisSystem {
        n_segments,
        terminal_zero_velocity,
        constraint_map: c,
        polynomial_coeffs: b,
    })
}

/// C¹ constraint map for concatenated cubic Bézier segments: `4N × (2N+2)`.
///
/// Free weights are the four control points of segment 0 followed by the
/// last two control points of each later segment.
pub fn cubic_constraint_map(n_segments: usize) -> Result<DMatrix<f64>> {
    if n_segments < 1 {
        return Err(Error::domain("number of segments must be at least 1"));
    }
    let k = 2 * n_segments + 2;
    let mut c = DMatrix::zeros(4 * n_segments, k);
    for col in 0..k {
        let mut free = vec![0.0; k];
        free[col] = 1.0;
        let mut q = [free[0], free[1], free[2], free[3]];
        for i in 0..n_segments {
            if i > 0 {
                q = [q[3], 2.0 * q[3] - q[2], free[2 + 2 * i], free[3 + 2 * i]];
            }
            for (r, v) in q.iter().enumerate() {
                c[(4 * i + r, col)] = *v;
            }
        }
    }
    Ok(c)
}

/// Maps sample times (or uniform spacing) affinely onto `[0, N]`.
pub fn global_parameterize(timestamps: Option<&[f64]>, m: usize, n_segments: usize) -> Result<Vec<f64>> {
    if m < 3 {
        return Err(Error::domain(format!("need at least 3 samples, got {m}")));
    }
    if n_segments < 1 {
        return Err(Error::domain("number of segments must be at least 1"));
    }
    let n = n_segments as f64;
    let uniform = || {
        (0..m)
            .map(|j| {
                if j == m - 1 {
                    n
                } else {
                    n * j as f64 / (m - 1) as f64
                }
            })
            .collect::<Vec<_>>()
    };
    match timestamps {
        None => Ok(uniform()),
        Some(ts) => {
            if ts.len() != m {
                return Err(Error::domain(format!("{} timestamps for {m} samples", ts.len())));
            }
            let (t0, t1) = (ts[0], ts[m - 1]);
            if t0 == t1 {
                return Err(Error::Degenerate("all timestamps are equal".into()));
            }
            if ts.windows(2).any(|w| w[1] == w[0]) {
                warn!("duplicate timestamps found; falling back to uniform parameterization");
                return Ok(uniform());
            }
            let span = t1 - t0;
            Ok(ts
                .iter()
                .enumerate()
                .map(|(j, &t)| if j == m - 1 { n } else { (n * (t - t0) / span).clamp(0.0, n) })
                .collect())
        }
    }
}

/// Splits a global parameter into `(segment, local t)`; `s = N` maps to the
/// last segment at `t = 1`.
pub fn locate(s: f64, n_segments: usize) -> Result<(usize, f64)> {
    let n = n_segments as f64;
    if !(0.0..=n).contains(&s) {
        return Err(Error::domain(format!("global parameter {s} outside [0, {n}]")));
    }
    let idx = (s.floor() as usize).min(n_segments - 1);
    Ok((idx, s - idx as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_segments: usize,
    pub ridge: f64,
    pub terminal_zero_velocity: bool,
}

impl FitConfig {
    pub fn new(n_segments: usize) -> Self {
        FitConfig {
            n_segments,
            ridge: 0.0,
            terminal_zero_velocity: false,
        }
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn with_terminal_zero_velocity(mut self, on: bool) -> Self {
        self.terminal_zero_velocity = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_segments < 1 {
            return Err(Error::domain("number of segments must be at least 1"));
        }
        if !self.ridge.is_finite() || self.ridge < 0.0 {
            return Err(Error::domain(format!("ridge must be finite and >= 0, got {}", self.ridge)));
        }
        Ok(())
    }
}

/// A fitted, immutable quadratic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpline {
    dim: usize,
    terminal_zero_velocity: bool,
    free_weights: DMatrix<f64>,
    segments: Vec<SegmentControl>,
    scale: f64,
}

impl QuadraticSpline {
    /// Builds a spline from a `K × D` free-weight matrix.
    pub fn from_free_weights(free_weights: DMatrix<f64>, terminal_zero_velocity: bool) -> Result<Self> {
        let k = free_weights.nrows();
        let dim = free_weights.ncols();
        if dim == 0 {
            return Err(Error::domain("spline dimension must be at least 1"));
        }
        let min_k = if terminal_zero_velocity { 2 } else { 3 };
        if k < min_k {
            return Err(Error::domain(format!("{k} free weights is too few for one segment")));
        }
        if free_weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("free weights must be finite"));
        }
        let n = if terminal_zero_velocity { k - 1 } else { k - 2 };
        let per_dim: Vec<Vec<[f64; 3]>> = (0..dim)
            .map(|d| {
                let col: Vec<f64> = free_weights.column(d).iter().copied().collect();
                expand_free(&col, n, terminal_zero_velocity)
            })
            .collect();
        let segments = (0..n)
            .map(|i| SegmentControl {
                w1: per_dim.iter().map(|p| p[i][0]).collect(),
                w2: per_dim.iter().map(|p| p[i][1]).collect(),
                w3: per_dim.iter().map(|p| p[i][2]).collect(),
            })
            .collect::<Vec<_>>();
        if segments
            .iter()
            .any(|s| s.w1.iter().chain(&s.w2).chain(&s.w3).any(|v| !v.is_finite()))
        {
            return Err(Error::domain("derived control points overflow"));
        }
        let scale = bbox_diagonal(&segments);
        Ok(QuadraticSpline {
            dim,
            terminal_zero_velocity,
            free_weights,
            segments,
            scale,
        })
    }

    /// Rebuilds a spline from explicit control points, keeping only the free
    /// entries. Returns the spline and the largest constraint violation found
    /// in the supplied segments.
    pub fn from_segments(segments: &[SegmentControl], terminal_zero_velocity: bool) -> Result<(Self, f64)> {
        if segments.is_empty() {
            return Err(Error::domain("a spline needs at least one segment"));
        }
        let dim = segments[0].dim();
        for s in segments {
            SegmentControl::new(s.w1.clone(), s.w2.clone(), s.w3.clone())?;
            if s.dim() != dim {
                return Err(Error::domain("segments disagree on dimension"));
            }
        }
        let n = segments.len();
        let k = free_parameter_count(n, terminal_zero_velocity);
        let mut free = DMatrix::zeros(k, dim);
        for d in 0..dim {
            free[(0, d)] = segments[0].w1[d];
            free[(1, d)] = segments[0].w2[d];
            for i in 0..(k - 2) {
                free[(2 + i, d)] = segments[i].w3[d];
            }
        }
        let violation = constraint_violation(segments, terminal_zero_velocity);
        Ok((Self::from_free_weights(free, terminal_zero_velocity)?, violation))
    }

    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terminal_zero_velocity(&self) -> bool {
        self.terminal_zero_velocity
    }

    pub fn free_weights(&self) -> &DMatrix<f64> {
        &self.free_weights
    }

    pub fn segments(&self) -> &[SegmentControl] {
        &self.segments
    }

    /// Diagonal of the control-point bounding box; the unit for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn start(&self) -> &[f64] {
        &self.segments[0].w1
    }

    pub fn end(&self) -> &[f64] {
        &self.segments[self.segments.len() - 1].w3
    }

    pub fn evaluate(&self, s: f64) -> Result<Vec<f64>> {
        let (i, t) = locate(s, self.n_segments())?;
        Ok(self.segments[i].point_at(t))
    }

    /// Derivative with respect to the global parameter (equal to the local one).
    pub fn derivative(&self, s: f64) -> Result<Vec<f64>> {
        let (i, t) = locate(s, self.n_segments())?;
        Ok(self.segments[i].tangent_at(t))
    }

    /// Samples `count ≥ 2` points uniformly in the global parameter.
    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        let n = self.n_segments() as f64;
        (0..count)
            .map(|j| {
                let s = if j + 1 == count { n } else { n * j as f64 / (count - 1) as f64 };
                self.evaluate(s).expect("sample parameter in range")
            })
            .collect()
    }
}

fn bbox_diagonal(segments: &[SegmentControl]) -> f64 {
    let dim = segments[0].dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for s in segments {
        for p in [&s.w1, &s.w2, &s.w3] {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    lo.iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
}

/// Largest absolute violation of the joint (and optional terminal) constraints.
pub fn constraint_violation(segments: &[SegmentControl], terminal_zero_velocity: bool) -> f64 {
    let mut worst: f64 = 0.0;
    for pair in segments.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        for k in 0..a.dim() {
            worst = worst.max((a.w3[k] - b.w1[k]).abs());
            worst = worst.max(((a.w2[k] - a.w3[k]) - (b.w1[k] - b.w2[k])).abs());
        }
    }
    if terminal_zero_velocity {
        let last = &segments[segments.len() - 1];
        for k in 0..last.dim() {
            worst = worst.max((last.w2[k] - last.w3[k]).abs());
        }
    }
    worst
}

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub spline: QuadraticSpline,
    /// Sum of squared residuals `‖Φw − P‖²`.
    pub residual_sq: f64,
    pub params: Vec<f64>,
}

impl FitResult {
    /// Root-mean-square per-sample Euclidean error.
    pub fn rms_error(&self) -> f64 {
        (self.residual_sq / self.params.len() as f64).sqrt()
    }
}

/// Least-squares solve of `Φ W ≈ P` by SVD, with optional ridge penalty.
pub fn solve_least_squares(phi: &DMatrix<f64>, rhs: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    let (m, k) = phi.shape();
    let (a, b) = if ridge > 0.0 {
        let mut a = DMatrix::zeros(m + k, k);
        a.rows_mut(0, m).copy_from(phi);
        let r = ridge.sqrt();
        for i in 0..k {
            a[(m + i, i)] = r;
        }
        let mut b = DMatrix::zeros(m + k, rhs.ncols());
        b.rows_mut(0, m).copy_from(rhs);
        (a, b)
    } else {
        (phi.clone(), rhs.clone())
    };
    let rows = a.nrows();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = rows.max(k) as f64 * f64::EPSILON * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < k {
        return Err(Error::RankDeficient { rank, cols: k });
    }
    svd.solve(&b, tol).map_err(|e| Error::domain(e.to_string()))
}

pub fn fit(trajectory: &Trajectory, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let m = trajectory.len();
    let basis = build_constraint_map(config.n_segments, config.terminal_zero_velocity)?;
    let k = basis.n_free();
    if m < config.n_segments + 2 || m < k {
        return Err(Error::Underdetermined { samples: m, params: k });
    }
    let params = global_parameterize(trajectory.timestamps(), m, config.n_segments)?;
    let phi = basis.design_matrix(&params)?;
    let w = solve_least_squares(&phi, trajectory.points(), config.ridge)?;
    let residual_sq = (&phi * &w - trajectory.points()).norm_squared();
    let spline = QuadraticSpline::from_free_weights(w, config.terminal_zero_velocity)?;
    Ok(FitResult {
        spline,
        residual_sq,
        params,
    })
}
