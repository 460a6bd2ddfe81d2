//! Real roots of `a3 t³ + a2 t² + a1 t + a0` restricted to `[0, 1]`.
//!
//! Closed form (trigonometric for three real roots, Cardano otherwise),
//! followed by Newton polishing against the original coefficients and a
//! back-substitution check. Leading coefficients that are negligible relative
//! to the others drop the degree.

use std::f64::consts::PI;

/// Relative size below which a leading coefficient is treated as zero.
pub const DEGENERACY: f64 = 1e-12;
/// Roots closer than this are merged.
pub const DEDUP: f64 = 1e-10;
/// Back-substitution acceptance, relative to the largest coefficient.
pub const RESIDUAL: f64 = 1e-7;
/// Roots this far outside `[0, 1]` are clamped in rather than dropped.
const EDGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl CubicCoefficients {
    pub fn new(a3: f64, a2: f64, a1: f64, a0: f64) -> Self {
        CubicCoefficients { a3, a2, a1, a0 }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        ((self.a3 * t + self.a2) * t + self.a1) * t + self.a0
    }

    #[inline]
    pub fn slope(&self, t: f64) -> f64 {
        (3.0 * self.a3 * t + 2.0 * self.a2) * t + self.a1
    }

    pub fn max_abs(&self) -> f64 {
        self.a3.abs().max(self.a2.abs()).max(self.a1.abs()).max(self.a0.abs())
    }
}

/// All real roots in `[0, 1]`, ascending and deduplicated.
pub fn solve_cubic_in_unit_interval(c: CubicCoefficients) -> Vec<f64> {
    let mut out = Vec::with_capacity(3);
    roots_in_unit_interval(c, &mut out);
    out
}

/// Allocation-free variant: clears `out` and fills it with the roots.
pub fn roots_in_unit_interval(c: CubicCoefficients, out: &mut Vec<f64>) {
    out.clear();
    let scale = c.max_abs();
    if scale == 0.0 || !scale.is_finite() {
        return;
    }
    let mut raw = [0.0f64; 3];
    let count = if c.a3.abs() >= DEGENERACY * scale {
        let n = cubic_roots(c.a3, c.a2, c.a1, c.a0, &mut raw);
        if n == 1 && raw[0].is_finite() && raw[0] != 0.0 {
            // A tiny a3 pushes one root far away and the discriminant loses
            // its sign; the other two come back from the deflated quadratic.
            let [q2, q1, q0] = deflate(c, raw[0]);
            let mut rest = [0.0f64; 3];
            let m = if q2 != 0.0 { quadratic_roots(q2, q1, q0, &mut rest) } else { 0 };
            raw[1..1 + m].copy_from_slice(&rest[..m]);
            1 + m
        } else {
            n
        }
    } else if c.a2.abs() >= DEGENERACY * scale {
        quadratic_roots(c.a2, c.a1, c.a0, &mut raw)
    } else if c.a1.abs() >= DEGENERACY * scale {
        raw[0] = -c.a0 / c.a1;
        1
    } else {
        0
    };

    for &r in &raw[..count] {
        if !r.is_finite() {
            continue;
        }
        let mut t = polish(c, r);
        if !(-EDGE_SLACK..=1.0 + EDGE_SLACK).contains(&t) {
            continue;
        }
        t = t.clamp(0.0, 1.0);
        if c.eval(t).abs() > RESIDUAL * scale {
            continue;
        }
        out.push(t);
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| (*a - *b).abs() <= DEDUP);
}

fn polish(c: CubicCoefficients, mut t: f64) -> f64 {
    let mut f = c.eval(t);
    for _ in 0..4 {
        if f == 0.0 {
            break;
        }
        let df = c.slope(t);
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let next = t - f / df;
        let fnext = c.eval(next);
        if !(fnext.abs() < f.abs()) {
            break;
        }
        t = next;
        f = fnext;
    }
    t
}

/// Quotient of `p(t) / (t - r)`; backward recurrence for `|r| > 1` keeps it stable.
fn deflate(c: CubicCoefficients, r: f64) -> [f64; 3] {
    if r.abs() > 1.0 {
        let q0 = -c.a0 / r;
        let q1 = (q0 - c.a1) / r;
        let q2 = (q1 - c.a2) / r;
        [q2, q1, q0]
    } else {
        let q2 = c.a3;
        let q1 = c.a2 + r * q2;
        let q0 = c.a1 + r * q1;
        [q2, q1, q0]
    }
}

/// Numerically stable real roots of `a t² + b t + c` (`a ≠ 0`).
fn quadratic_roots(a: f64, b: f64, c: f64, out: &mut [f64; 3]) -> usize {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        // Near-tangent case: keep the vertex if it is (nearly) a root.
        let v = -b / (2.0 * a);
        let scale = a.abs().max(b.abs()).max(c.abs());
        let val = (a * v + b) * v + c;
        if val.abs() <= RESIDUAL * scale {
            out[0] = v;
            return 1;
        }
        return 0;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        // b = 0 and c = 0
        out[0] = 0.0;
        return 1;
    }
    out[0] = q / a;
    out[1] = c / q;
    2
}

fn cubic_roots(a3: f64, a2: f64, a1: f64, a0: f64, out: &mut [f64; 3]) -> usize {
    let b = a2 / a3;
    let c = a1 / a3;
    let d = a0 / a3;
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-half_q - half_q.signum() * sq).cbrt();
        let y = if u == 0.0 { 0.0 } else { u - third_p / u };
        out[0] = y - shift;
        1
    } else if p == 0.0 {
        out[0] = -shift;
        1
    } else {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift;
        }
        3
    }
}
