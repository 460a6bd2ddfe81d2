//! Autonomous dynamical system driven by a spline distance field.
//!
//! The velocity at `x` blends attraction down the distance gradient with
//! motion along the curve at the projection:
//!
//! ```text
//! v(x) = -alpha * grad d(x) + beta * f'(s*(x)),   beta = 1 / (1 + lambda d),  alpha = 1 - beta
//! ```
//!
//! The phase `s*` is re-estimated from scratch at every evaluation, so the
//! system has no memory and is time independent.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceField;
use crate::error::{Error, Result};

/// Rollouts whose distance exceeds this multiple of the field scale are aborted.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Integrator::Euler),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(Error::domain(format!("unknown integrator {other:?} (euler|rk4)"))),
        }
    }
}

/// Which terms of the vector field are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    #[default]
    Full,
    /// Tangential term removed (`beta` forced to zero, `alpha` kept).
    AttractionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub lambda: f64,
    pub step_size: f64,
    pub integrator: Integrator,
    pub max_steps: usize,
    pub convergence_distance: f64,
    pub convergence_speed: f64,
    /// Optional cap on the velocity norm; off by default.
    pub max_speed: Option<f64>,
    pub mode: FieldMode,
}

impl DynamicsConfig {
    /// Defaults scaled to a field: `h = 0.01 * scale / max(1, peak tangent speed)`,
    /// convergence thresholds at `1e-3 * scale`.
    pub fn for_field<F: DistanceField + ?Sized>(field: &F, lambda: f64) -> Self {
        let scale = field.scale().max(f64::MIN_POSITIVE);
        let speed = peak_tangent_speed(field);
        DynamicsConfig {
            lambda,
            step_size: 0.01 * scale / speed.max(1.0),
            integrator: Integrator::Euler,
            max_steps: 10_000,
            convergence_distance: 1e-3 * scale,
            convergence_speed: 1e-3 * scale,
            max_speed: None,
            mode: FieldMode::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::domain(format!("step size must be positive, got {}", self.step_size)));
        }
        if self.max_steps < 1 {
            return Err(Error::domain("max_steps must be at least 1"));
        }
        if !(self.convergence_distance >= 0.0 && self.convergence_speed >= 0.0) {
            return Err(Error::domain("convergence thresholds must be non-negative"));
        }
        if let Some(cap) = self.max_speed {
            if !(cap > 0.0) {
                return Err(Error::domain("max_speed must be positive"));
            }
        }
        Ok(())
    }
}

/// Upper bound on `‖f'‖` over all splines of a field (control-polygon bound).
pub fn peak_tangent_speed<F: DistanceField + ?Sized>(field: &F) -> f64 {
    // f'(t) is a convex combination of 2(w2 - w1) and 2(w3 - w2).
    let mut peak: f64 = 0.0;
    for seg in field.splines().iter().flat_map(|s| s.segments()) {
        let a: f64 = seg.w1.iter().zip(&seg.w2).map(|(p, q)| (q - p) * (q - p)).sum();
        let b: f64 = seg.w2.iter().zip(&seg.w3).map(|(p, q)| (q - p) * (q - p)).sum();
        peak = peak.max(2.0 * a.sqrt()).max(2.0 * b.sqrt());
    }
    peak
}

/// Inverse-barrier gains `(alpha, beta)`.
pub fn gains(distance: f64, lambda: f64) -> (f64, f64) {
    let beta = 1.0 / (1.0 + lambda * distance);
    (1.0 - beta, beta)
}

/// `V(x) = d(x)² / 2`.
pub fn lyapunov_value<F: DistanceField + ?Sized>(field: &F, x: &[f64]) -> f64 {
    let d = field.query_point(x).distance;
    0.5 * d * d
}

/// One evaluation of the vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub velocity: Vec<f64>,
    pub distance: f64,
    pub phase: f64,
}

impl FieldSample {
    pub fn speed(&self) -> f64 {
        norm(&self.velocity)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// History of a rollout; index 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RolloutTrace {
    pub states: Vec<Vec<f64>>,
    pub distances: Vec<f64>,
    pub lyapunov: Vec<f64>,
    pub phases: Vec<f64>,
    pub converged: bool,
    pub steps_taken: usize,
}

impl RolloutTrace {
    fn record(&mut self, x: &[f64], sample: &FieldSample) {
        self.states.push(x.to_vec());
        self.distances.push(sample.distance);
        self.lyapunov.push(0.5 * sample.distance * sample.distance);
        self.phases.push(sample.phase);
    }

    pub fn final_state(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.as_slice())
    }

    pub fn final_distance(&self) -> Option<f64> {
        self.distances.last().copied()
    }

    /// Mean distance over a fixed horizon of `horizon` recorded states; a
    /// trace that stopped early is padded with its last distance.
    pub fn mean_distance_over(&self, horizon: usize) -> f64 {
        if self.distances.is_empty() || horizon == 0 {
            return 0.0;
        }
        let last = *self.distances.last().unwrap();
        let sum: f64 = (0..horizon)
            .map(|k| self.distances.get(k).copied().unwrap_or(last))
            .sum();
        sum / horizon as f64
    }
}

/// The dynamical system bound to a field and a configuration.
pub struct DynamicalSystem<'a, F: DistanceField + ?Sized> {
    field: &'a F,
    config: DynamicsConfig,
}

impl<'a, F: DistanceField + ?Sized> DynamicalSystem<'a, F> {
    pub fn new(field: &'a F, config: DynamicsConfig) -> Result<Self> {
        config.validate()?;
        if !field.has_terminal_equilibrium() {
            warn!("field has no terminal zero-velocity constraint; the endpoint is not an equilibrium");
        }
        Ok(DynamicalSystem { field, config })
    }

    /// Same as [`new`](Self::new) without the equilibrium warning.
    pub(crate) fn quiet(field: &'a F, config: DynamicsConfig) -> Result<Self> {
        config.validate()?;
        Ok(DynamicalSystem { field, config })
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.config
    }

    pub fn field(&self) -> &F {
        self.field
    }

    pub fn set_lambda(&mut self, lambda: f64) -> Result<()> {
        let mut next = self.config;
        next.lambda = lambda;
        next.validate()?;
        self.config = next;
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> FieldSample {
        let (q, spline) = self.field.locate(x);
        let (alpha, mut beta) = gains(q.distance, self.config.lambda);
        if self.config.mode == FieldMode::AttractionOnly {
            beta = 0.0;
        }
        let tangent = spline.segments()[q.segment_index].tangent_at(q.t_local);
        let mut velocity: Vec<f64> = q
            .gradient
            .iter()
            .zip(&tangent)
            .map(|(g, t)| -alpha * g + beta * t)
            .collect();
        if let Some(cap) = self.config.max_speed {
            let s = norm(&velocity);
            if s > cap {
                velocity.iter_mut().for_each(|v| *v *= cap / s);
            }
        }
        FieldSample {
            velocity,
            distance: q.distance,
            phase: q.phase,
        }
    }

    pub fn velocity(&self, x: &[f64]) -> Vec<f64> {
        self.evaluate(x).velocity
    }

    fn advance_from(&self, x: &[f64], k1: &[f64], step: usize) -> Result<Vec<f64>> {
        let h = self.config.step_size;
        let next: Vec<f64> = match self.config.integrator {
            Integrator::Euler => x.iter().zip(k1).map(|(a, v)| a + h * v).collect(),
            Integrator::Rk4 => {
                let shifted = |k: &[f64], c: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, v)| a + c * v).collect() };
                let k2 = self.velocity(&shifted(k1, 0.5 * h));
                let k3 = self.velocity(&shifted(&k2, 0.5 * h));
                let k4 = self.velocity(&shifted(&k3, h));
                (0..x.len())
                    .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                step,
                message: "non-finite state".into(),
            });
        }
        Ok(next)
    }

    /// One integration step from `x`.
    pub fn step(&self, x: &[f64]) -> Result<Vec<f64>> {
        let k1 = self.velocity(x);
        if k1.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                step: 0,
                message: "non-finite velocity".into(),
            });
        }
        self.advance_from(x, &k1, 0)
    }

    pub fn lyapunov_value(&self, x: &[f64]) -> f64 {
        lyapunov_value(self.field, x)
    }

    /// Starts an incremental rollout at `x0`.
    pub fn start(&self, x0: &[f64]) -> Result<Rollout<'_, 'a, F>> {
        if x0.len() != self.field.dim() {
            return Err(Error::domain(format!(
                "start point has {} coordinates, field has {}",
                x0.len(),
                self.field.dim()
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("start point must be finite"));
        }
        let sample = self.evaluate(x0);
        let mut trace = RolloutTrace::default();
        trace.record(x0, &sample);
        let mut r = Rollout {
            system: self,
            x: x0.to_vec(),
            sample,
            trace,
        };
        r.update_converged();
        Ok(r)
    }

    /// Integrates from `x0` until convergence or `max_steps`.
    pub fn rollout(&self, x0: &[f64]) -> Result<RolloutTrace> {
        self.rollout_with_perturbations(x0, &[])
    }

    /// Like [`rollout`](Self::rollout), adding `delta` to the state just before
    /// step `k` for every `(k, delta)` pair. Convergence is not declared before
    /// the last scheduled perturbation has been applied.
    pub fn rollout_with_perturbations(&self, x0: &[f64], perturbations: &[(usize, Vec<f64>)]) -> Result<RolloutTrace> {
        let mut run = self.start(x0)?;
        let last_kick = perturbations.iter().map(|(k, _)| *k).max();
        while run.trace.steps_taken < self.config.max_steps {
            let k = run.trace.steps_taken;
            for (_, delta) in perturbations.iter().filter(|(at, _)| *at == k) {
                run.perturb(delta)?;
            }
            let pending = last_kick.is_some_and(|l| l > k);
            if run.trace.converged && !pending {
                break;
            }
            run.advance()?;
        }
        Ok(run.into_trace())
    }
}

/// An in-progress rollout that can be stepped and perturbed.
pub struct Rollout<'s, 'a, F: DistanceField + ?Sized> {
    system: &'s DynamicalSystem<'a, F>,
    x: Vec<f64>,
    sample: FieldSample,
    trace: RolloutTrace,
}

impl<F: DistanceField + ?Sized> Rollout<'_, '_, F> {
    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn sample(&self) -> &FieldSample {
        &self.sample
    }

    pub fn trace(&self) -> &RolloutTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RolloutTrace {
        self.trace
    }

    fn update_converged(&mut self) {
        let c = &self.system.config;
        self.trace.converged = self.sample.distance < c.convergence_distance && self.sample.speed() < c.convergence_speed;
    }

    /// Displaces the current state; the latest trace entry is replaced so the
    /// trace reflects the state the next step starts from.
    pub fn perturb(&mut self, delta: &[f64]) -> Result<&[f64]> {
        if delta.len() != self.x.len() || delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("perturbation must be a finite vector of the field dimension"));
        }
        if delta.iter().all(|v| *v == 0.0) {
            return Ok(&self.x);
        }
        for (a, d) in self.x.iter_mut().zip(delta) {
            *a += d;
        }
        self.sample = self.system.evaluate(&self.x);
        let t = &mut self.trace;
        t.states.pop();
        t.distances.pop();
        t.lyapunov.pop();
        t.phases.pop();
        t.record(&self.x, &self.sample);
        self.update_converged();
        Ok(&self.x)
    }

    /// Takes one step and records it.
    pub fn advance(&mut self) -> Result<&[f64]> {
        let step = self.trace.steps_taken + 1;
        if self.sample.velocity.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                step,
                message: "non-finite velocity".into(),
            });
        }
        let next = self.system.advance_from(&self.x, &self.sample.velocity, step)?;
        self.x = next;
        self.sample = self.system.evaluate(&self.x);
        self.trace.record(&self.x, &self.sample);
        self.trace.steps_taken = step;
        self.update_converged();
        let limit = DIVERGENCE_FACTOR * self.system.field.scale();
        if self.sample.distance > limit {
            return Err(Error::Divergence {
                step,
                distance: self.sample.distance,
                limit,
                trace: Box::new(self.trace.clone()),
            });
        }
        Ok(&self.x)
    }
}
