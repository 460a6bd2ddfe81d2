//! Deterministic demonstration shapes and random test data.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spline::{fit, FitConfig, QuadraticSpline, Trajectory};

/// Handwriting-style S: one full sine period traversed top to bottom, unit height.
pub fn s_shape(samples: usize) -> Trajectory {
    let pts = (0..samples)
        .map(|j| {
            let u = j as f64 / (samples - 1) as f64;
            vec![0.4 * (2.0 * PI * u).sin(), 1.0 - u]
        })
        .collect();
    Trajectory::new(pts, None).expect("valid S shape")
}

/// L: down the left edge, rounded corner, along the bottom. Sampled by arc length.
pub fn l_shape(samples: usize) -> Trajectory {
    let r = 0.2;
    let leg = 1.0 - r;
    let arc = 0.5 * PI * r;
    let total = 2.0 * leg + arc;
    let pts = (0..samples)
        .map(|j| {
            let a = total * j as f64 / (samples - 1) as f64;
            if a <= leg {
                vec![0.0, 1.0 - a]
            } else if a <= leg + arc {
                let phi = (a - leg) / r;
                vec![r - r * phi.cos(), r - r * phi.sin()]
            } else {
                vec![r + (a - leg - arc), 0.0]
            }
        })
        .collect();
    Trajectory::new(pts, None).expect("valid L shape")
}

/// Fits a demonstration with the terminal zero-velocity constraint on.
pub fn fit_for_dynamics(traj: &Trajectory, n_segments: usize) -> QuadraticSpline {
    fit(traj, &FitConfig::new(n_segments).with_terminal_zero_velocity(true))
        .expect("demo shape fits")
        .spline
}

/// Smooth random planar curves built from a few low-frequency harmonics.
pub fn random_smooth_curves(count: usize, samples: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let harmonics: Vec<[f64; 5]> = (1..=4)
                .map(|h| {
                    let amp = 10.0 / h as f64;
                    [
                        rng.gen_range(-amp..amp),
                        rng.gen_range(-amp..amp),
                        rng.gen_range(0.0..2.0 * PI),
                        rng.gen_range(0.0..2.0 * PI),
                        h as f64 * rng.gen_range(0.6..1.2),
                    ]
                })
                .collect();
            let pts = (0..samples)
                .map(|j| {
                    let u = j as f64 / (samples - 1) as f64;
                    let mut p = vec![0.0, 0.0];
                    for [ax, ay, px, py, f] in &harmonics {
                        p[0] += ax * (PI * f * u + px).sin();
                        p[1] += ay * (PI * f * u + py).cos();
                    }
                    p
                })
                .collect();
            Trajectory::new(pts, None).expect("finite curve")
        })
        .collect()
}

/// Random spline whose control points follow a random walk.
pub fn random_spline(rng: &mut impl Rng, n_segments: usize, dim: usize, terminal: bool) -> QuadraticSpline {
    let k = if terminal { n_segments + 1 } else { n_segments + 2 };
    let mut free = DMatrix::zeros(k, dim);
    for d in 0..dim {
        let mut pos = rng.gen_range(-1.0..1.0);
        for r in 0..k {
            pos += rng.gen_range(-1.0..1.0);
            free[(r, d)] = pos;
        }
    }
    QuadraticSpline::from_free_weights(free, terminal).expect("finite random spline")
}

/// Uniform random points in the spline's control-point box, grown by `margin`
/// times the scale on every side.
pub fn random_points_around(rng: &mut impl Rng, spline: &QuadraticSpline, count: usize, margin: f64) -> Vec<Vec<f64>> {
    let dim = spline.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for s in spline.segments() {
        for p in [&s.w1, &s.w2, &s.w3] {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    let pad = margin * spline.scale();
    (0..count)
        .map(|_| (0..dim).map(|k| rng.gen_range(lo[k] - pad..=hi[k] + pad)).collect())
        .collect()
}
