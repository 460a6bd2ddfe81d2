use serde::{Deserialize, Serialize};

use crate::distance::SampledField;
use crate::error::{Error, Result};
use crate::spline::QuadraticSpline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientStudyConfig {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    /// Number of probe points along the segment `start → end` (at least 2).
    pub n_probe: usize,
    /// Sample count of the nearest-sample field.
    pub k_numerical: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientStudy {
    pub n_probe: usize,
    pub k_numerical: usize,
    /// Largest angle between gradients at consecutive probes, in degrees.
    pub analytic_max_jump_deg: f64,
    pub numerical_max_jump_deg: f64,
    /// Largest angle between analytic and numerical gradient at the same probe.
    pub max_disagreement_deg: f64,
    pub analytic_jumps_deg: Vec<f64>,
    pub numerical_jumps_deg: Vec<f64>,
}

fn angle_deg(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let c: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    Some(c.clamp(-1.0, 1.0).acos().to_degrees())
}

fn max_or_zero(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Samples analytic and nearest-sample gradients along a probe line and
/// reports the largest direction change between neighbouring probes.
pub fn gradient_instability_study(spline: &QuadraticSpline, config: &GradientStudyConfig) -> Result<GradientStudy> {
    let d = spline.dim();
    if config.start.len() != d || config.end.len() != d {
        return Err(Error::domain("probe endpoints must match the spline dimension"));
    }
    if config.n_probe < 2 {
        return Err(Error::domain("need at least 2 probe points"));
    }
    let sampled = SampledField::new(spline, config.k_numerical)?;
    let probes: Vec<Vec<f64>> = (0..config.n_probe)
        .map(|j| {
            let u = j as f64 / (config.n_probe - 1) as f64;
            config
                .start
                .iter()
                .zip(&config.end)
                .map(|(a, b)| a + u * (b - a))
                .collect()
        })
        .collect();
    let analytic: Vec<Vec<f64>> = crate::par::map(&probes, |x| spline.query(x).gradient);
    let numerical: Vec<Vec<f64>> = crate::par::map(&probes, |x| sampled.query(x).1);

    let jumps = |g: &[Vec<f64>]| -> Vec<f64> { g.windows(2).filter_map(|w| angle_deg(&w[0], &w[1])).collect() };
    let analytic_jumps_deg = jumps(&analytic);
    let numerical_jumps_deg = jumps(&numerical);
    let disagreement: Vec<f64> = analytic
        .iter()
        .zip(&numerical)
        .filter_map(|(a, b)| angle_deg(a, b))
        .collect();
    Ok(GradientStudy {
        n_probe: config.n_probe,
        k_numerical: config.k_numerical,
        analytic_max_jump_deg: max_or_zero(&analytic_jumps_deg),
        numerical_max_jump_deg: max_or_zero(&numerical_jumps_deg),
        max_disagreement_deg: max_or_zero(&disagreement),
        analytic_jumps_deg,
        numerical_jumps_deg,
    })
}
