//! Exact distance, gradient, projection and phase queries against quadratic
//! splines.
//!
//! For a segment `f(t) = w1 + 2tA + t²B` with `A = w2 - w1` and
//! `B = w1 - 2w2 + w3`, the stationarity condition `(f(t) - x)·f'(t) = 0`
//! is a cubic in `t`. Its roots in `[0, 1]` plus both endpoints are the only
//! candidates for the closest point.

use crate::error::{Error, Result};
use crate::par;
use crate::roots::{roots_in_unit_interval, CubicCoefficients};
use crate::spline::{bernstein_weights, QuadraticSpline, SegmentControl};

/// Relative on-curve tolerance; below `ON_CURVE * scale` the gradient is zero.
pub const ON_CURVE: f64 = 1e-9;

/// Result of a distance query.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldQuery {
    pub distance: f64,
    /// Unit vector pointing away from the curve, or zero on the curve.
    pub gradient: Vec<f64>,
    pub projection: Vec<f64>,
    pub segment_index: usize,
    pub t_local: f64,
    /// `(segment_index + t_local) / N`.
    pub phase: f64,
}

impl FieldQuery {
    /// Global spline parameter of the projection.
    pub fn global_parameter(&self) -> f64 {
        self.segment_index as f64 + self.t_local
    }
}

/// Coefficients of `(f(t) - x)·f'(t)` expanded in powers of `t`.
pub fn cubic_coefficients(seg: &SegmentControl, x: &[f64]) -> CubicCoefficients {
    let (mut bb, mut ab, mut aa, mut mb, mut ma) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..x.len() {
        let a = seg.w2[k] - seg.w1[k];
        let b = seg.w1[k] - 2.0 * seg.w2[k] + seg.w3[k];
        let m = seg.w1[k] - x[k];
        bb += b * b;
        ab += a * b;
        aa += a * a;
        mb += m * b;
        ma += m * a;
    }
    CubicCoefficients::new(2.0 * bb, 6.0 * ab, 2.0 * (2.0 * aa + mb), 2.0 * ma)
}

#[inline]
fn squared_distance_at(seg: &SegmentControl, x: &[f64], t: f64) -> f64 {
    let [b0, b1, b2] = bernstein_weights(t);
    let mut acc = 0.0;
    for k in 0..x.len() {
        let d = b0 * seg.w1[k] + b1 * seg.w2[k] + b2 * seg.w3[k] - x[k];
        acc += d * d;
    }
    acc
}

fn closest_on_segment(seg: &SegmentControl, x: &[f64], roots: &mut Vec<f64>) -> (f64, f64) {
    roots_in_unit_interval(cubic_coefficients(seg, x), roots);
    let mut best_t = 0.0;
    let mut best = squared_distance_at(seg, x, 0.0);
    for &t in roots.iter().chain(std::iter::once(&1.0)) {
        let d2 = squared_distance_at(seg, x, t);
        if d2 < best {
            best = d2;
            best_t = t;
        }
    }
    (best, best_t)
}

/// Minimum distance from `x` to one segment and the local parameter attaining it.
pub fn segment_distance(seg: &SegmentControl, x: &[f64]) -> (f64, f64) {
    let mut roots = Vec::with_capacity(3);
    let (d2, t) = closest_on_segment(seg, x, &mut roots);
    (d2.sqrt(), t)
}

fn check_point(dim: usize, x: &[f64]) {
    assert_eq!(x.len(), dim, "query point has {} coordinates, field has {dim}", x.len());
}

impl QuadraticSpline {
    /// Exact distance query. Exact ties go to the lowest segment index.
    pub fn query(&self, x: &[f64]) -> FieldQuery {
        check_point(self.dim(), x);
        let mut roots = Vec::with_capacity(3);
        let mut best = (f64::INFINITY, 0usize, 0.0f64);
        for (i, seg) in self.segments().iter().enumerate() {
            let (d2, t) = closest_on_segment(seg, x, &mut roots);
            if d2 < best.0 {
                best = (d2, i, t);
            }
        }
        let (_, i, t) = best;
        let projection = self.segments()[i].point_at(t);
        let diff: Vec<f64> = x.iter().zip(&projection).map(|(a, b)| a - b).collect();
        let distance = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        let gradient = if distance >= ON_CURVE * self.scale() && distance > 0.0 {
            diff.iter().map(|v| v / distance).collect()
        } else {
            vec![0.0; x.len()]
        };
        FieldQuery {
            distance,
            gradient,
            projection,
            segment_index: i,
            t_local: t,
            phase: (i as f64 + t) / self.n_segments() as f64,
        }
    }

    /// Per-segment minimum distances, in segment order.
    pub fn segment_distances(&self, x: &[f64]) -> Vec<(f64, f64)> {
        check_point(self.dim(), x);
        self.segments().iter().map(|s| segment_distance(s, x)).collect()
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.query(x).distance
    }
}

/// Union of several splines' distance fields (pointwise minimum).
#[derive(Debug, Clone, PartialEq)]
pub struct UnionField {
    members: Vec<QuadraticSpline>,
}

impl UnionField {
    pub fn new(members: Vec<QuadraticSpline>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::domain("union field needs at least one member"));
        };
        let dim = first.dim();
        if members.iter().any(|m| m.dim() != dim) {
            return Err(Error::domain("union members disagree on dimension"));
        }
        Ok(UnionField { members })
    }

    pub fn members(&self) -> &[QuadraticSpline] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Query of the nearest member and its index; exact ties go to the lowest index.
    pub fn query(&self, x: &[f64]) -> (FieldQuery, usize) {
        let mut best: Option<(FieldQuery, usize)> = None;
        for (m, spline) in self.members.iter().enumerate() {
            let q = spline.query(x);
            if best.as_ref().is_none_or(|(b, _)| q.distance < b.distance) {
                best = Some((q, m));
            }
        }
        best.expect("non-empty union")
    }
}

/// Anything that can answer closest-point queries: a single spline or a union.
pub trait DistanceField: Sync {
    fn dim(&self) -> usize;

    /// Unit for relative tolerances.
    fn scale(&self) -> f64;

    /// Query plus the spline that owns the projection.
    fn locate(&self, x: &[f64]) -> (FieldQuery, &QuadraticSpline);

    fn query_point(&self, x: &[f64]) -> FieldQuery {
        self.locate(x).0
    }

    /// Every spline making up the field.
    fn splines(&self) -> &[QuadraticSpline];

    /// True when every spline of the field ends with zero velocity.
    fn has_terminal_equilibrium(&self) -> bool {
        self.splines().iter().all(|s| s.terminal_zero_velocity())
    }
}

impl DistanceField for QuadraticSpline {
    fn dim(&self) -> usize {
        QuadraticSpline::dim(self)
    }

    fn scale(&self) -> f64 {
        QuadraticSpline::scale(self)
    }

    fn locate(&self, x: &[f64]) -> (FieldQuery, &QuadraticSpline) {
        (self.query(x), self)
    }

    fn splines(&self) -> &[QuadraticSpline] {
        std::slice::from_ref(self)
    }
}

impl DistanceField for UnionField {
    fn dim(&self) -> usize {
        UnionField::dim(self)
    }

    fn scale(&self) -> f64 {
        self.members.iter().map(|m| m.scale()).fold(0.0, f64::max)
    }

    fn locate(&self, x: &[f64]) -> (FieldQuery, &QuadraticSpline) {
        let (q, m) = self.query(x);
        (q, &self.members[m])
    }

    fn splines(&self) -> &[QuadraticSpline] {
        &self.members
    }
}

/// Queries many points; parallel when the `parallel` feature is on.
pub fn batch_query<F: DistanceField + ?Sized>(field: &F, points: &[Vec<f64>]) -> Vec<FieldQuery> {
    par::map(points, |x| field.query_point(x))
}

/// Single-threaded reference path for [`batch_query`].
pub fn batch_query_sequential<F: DistanceField + ?Sized>(field: &F, points: &[Vec<f64>]) -> Vec<FieldQuery> {
    points.iter().map(|x| field.query_point(x)).collect()
}

/// Nearest-sample approximation of a spline's distance field.
#[derive(Debug, Clone)]
pub struct SampledField {
    dim: usize,
    samples: Vec<f64>,
}

impl SampledField {
    /// `count ≥ 2` samples uniform in the global parameter.
    pub fn new(spline: &QuadraticSpline, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::domain(format!("need at least 2 samples, got {count}")));
        }
        let samples = spline.sample(count).into_iter().flatten().collect();
        Ok(SampledField {
            dim: spline.dim(),
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distance to the nearest sample and the unit direction away from it.
    pub fn query(&self, x: &[f64]) -> (f64, Vec<f64>) {
        check_point(self.dim, x);
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for (j, p) in self.samples.chunks_exact(self.dim).enumerate() {
            let d2: f64 = p.iter().zip(x).map(|(a, b)| (b - a) * (b - a)).sum();
            if d2 < best {
                best = d2;
                best_j = j;
            }
        }
        let p = &self.samples[best_j * self.dim..(best_j + 1) * self.dim];
        let d = best.sqrt();
        let grad = if d > 0.0 {
            x.iter().zip(p).map(|(a, b)| (a - b) / d).collect()
        } else {
            vec![0.0; self.dim]
        };
        (d, grad)
    }
}

/// Brute-force nearest-sample distance and gradient from `count` uniform samples.
pub fn numerical_baseline_query(spline: &QuadraticSpline, x: &[f64], count: usize) -> Result<(f64, Vec<f64>)> {
    Ok(SampledField::new(spline, count)?.query(x))
}
