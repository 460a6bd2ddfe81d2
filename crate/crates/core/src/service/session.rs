use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::protocol::{codes, ClientMessage, ServerMessage};
use crate::distance::DistanceField;
use crate::dynamics::{DynamicalSystem, DynamicsConfig, DIVERGENCE_FACTOR};
use crate::error::Error;
use crate::io::{export_field_grid, load_field, parse_field, FieldModel, GridSpec};

const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone)]
enum Pending {
    Perturb(Vec<f64>),
    SetState(Vec<f64>),
    SetLambda(f64),
}

#[derive(Debug, Clone)]
struct Run {
    x: Vec<f64>,
    config: DynamicsConfig,
    running: bool,
    tick: u64,
    pending: Vec<Pending>,
}

/// One client's simulation. Messages are applied between clock ticks; state
/// changes they request land on the next tick, so the emitted stream depends
/// only on the model and the clock index at which each message arrived.
pub struct Session {
    field: Option<Arc<FieldModel>>,
    run: Option<Run>,
    clock: u64,
}

/// A client message stamped with the session clock at which it arrived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub at: u64,
    pub message: ClientMessage,
}

impl Session {
    pub fn new(field: Option<Arc<FieldModel>>) -> Self {
        Session {
            field,
            run: None,
            clock: 0,
        }
    }

    /// Clock ticks elapsed, running or not.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn state(&self) -> Option<&[f64]> {
        self.run.as_ref().map(|r| r.x.as_slice())
    }

    pub fn is_running(&self) -> bool {
        self.run.as_ref().is_some_and(|r| r.running)
    }

    /// Parses and handles one wire line. Malformed input yields an error
    /// message and leaves the session untouched.
    pub fn handle_line(&mut self, line: &str) -> (Option<ClientMessage>, Vec<ServerMessage>) {
        match serde_json::from_str::<ClientMessage>(line) {
            Ok(msg) => {
                let out = self.handle(&msg);
                (Some(msg), out)
            }
            Err(e) => (None, vec![ServerMessage::error(codes::MALFORMED, e.to_string())]),
        }
    }

    pub fn handle(&mut self, msg: &ClientMessage) -> Vec<ServerMessage> {
        let ack = || vec![ServerMessage::Ack { of: msg.kind().into() }];
        match msg {
            ClientMessage::Load { model } => match load_model_value(model) {
                Ok(field) => {
                    self.field = Some(Arc::new(field));
                    self.run = None;
                    ack()
                }
                Err(e) => vec![ServerMessage::error(codes::INVALID, e.to_string())],
            },
            ClientMessage::Start { x0, lambda, step_size } => {
                let Some(field) = self.field.clone() else {
                    return vec![ServerMessage::error(codes::NO_MODEL, "load a model first")];
                };
                let mut config = DynamicsConfig::for_field(field.as_ref(), lambda.unwrap_or(DEFAULT_LAMBDA));
                if let Some(h) = step_size {
                    config.step_size = *h;
                }
                if let Err(e) = config.validate() {
                    return vec![ServerMessage::error(codes::INVALID, e.to_string())];
                }
                if let Err(e) = check_vector(field.as_ref(), x0) {
                    return vec![ServerMessage::error(codes::INVALID, e)];
                }
                let run = Run {
                    x: x0.clone(),
                    config,
                    running: true,
                    tick: 0,
                    pending: Vec::new(),
                };
                let first = state_message(field.as_ref(), &run);
                self.run = Some(run);
                vec![ServerMessage::Ack { of: "start".into() }, first]
            }
            ClientMessage::Pause | ClientMessage::Resume => match self.run.as_mut() {
                Some(run) => {
                    run.running = matches!(msg, ClientMessage::Resume);
                    ack()
                }
                None => no_session(msg),
            },
            ClientMessage::Perturb { delta } | ClientMessage::SetState { x: delta } => {
                let (Some(field), Some(run)) = (self.field.as_ref(), self.run.as_mut()) else {
                    return no_session(msg);
                };
                if let Err(e) = check_vector(field.as_ref(), delta) {
                    return vec![ServerMessage::error(codes::INVALID, e)];
                }
                run.pending.push(match msg {
                    ClientMessage::Perturb { .. } => Pending::Perturb(delta.clone()),
                    _ => Pending::SetState(delta.clone()),
                });
                ack()
            }
            ClientMessage::SetLambda { lambda } => {
                let Some(run) = self.run.as_mut() else {
                    return no_session(msg);
                };
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return vec![ServerMessage::error(codes::INVALID, format!("lambda must be positive, got {lambda}"))];
                }
                run.pending.push(Pending::SetLambda(*lambda));
                ack()
            }
            ClientMessage::Grid {
                bounds,
                resolution,
                slice,
            } => {
                let Some(field) = self.field.as_ref() else {
                    return vec![ServerMessage::error(codes::NO_MODEL, "load a model first")];
                };
                let spec = GridSpec {
                    bounds: *bounds,
                    resolution: *resolution,
                    slice: slice.clone(),
                };
                match export_field_grid(field.as_ref(), &spec) {
                    Ok(rows) => vec![ServerMessage::GridData {
                        bounds: *bounds,
                        resolution: *resolution,
                        rows,
                    }],
                    Err(e) => vec![ServerMessage::error(codes::INVALID, e.to_string())],
                }
            }
        }
    }

    /// Advances the clock; a running session applies pending inputs, takes
    /// one integration step and reports the new state.
    pub fn tick(&mut self) -> Vec<ServerMessage> {
        self.clock += 1;
        let (Some(field), Some(run)) = (self.field.as_ref(), self.run.as_mut()) else {
            return Vec::new();
        };
        if !run.running {
            return Vec::new();
        }
        for p in run.pending.drain(..) {
            match p {
                Pending::Perturb(d) => run.x.iter_mut().zip(&d).for_each(|(a, b)| *a += b),
                Pending::SetState(x) => run.x = x,
                Pending::SetLambda(l) => run.config.lambda = l,
            }
        }
        let system = DynamicalSystem::quiet(field.as_ref(), run.config).expect("validated config");
        match system.step(&run.x) {
            Ok(next) => run.x = next,
            Err(e) => {
                run.running = false;
                return vec![ServerMessage::error(codes::DIVERGED, e.to_string())];
            }
        }
        run.tick += 1;
        let state = state_message(field.as_ref(), run);
        let limit = DIVERGENCE_FACTOR * field.scale();
        if let ServerMessage::State { distance, .. } = &state {
            if *distance > limit {
                run.running = false;
                return vec![
                    state.clone(),
                    ServerMessage::error(codes::DIVERGED, format!("distance {distance} exceeds {limit}; paused")),
                ];
            }
        }
        vec![state]
    }
}

fn no_session(msg: &ClientMessage) -> Vec<ServerMessage> {
    vec![ServerMessage::error(
        codes::NO_SESSION,
        format!("`{}` needs a started session", msg.kind()),
    )]
}

fn check_vector(field: &FieldModel, v: &[f64]) -> Result<(), String> {
    if v.len() != field.dim() {
        return Err(format!("expected {} coordinates, got {}", field.dim(), v.len()));
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err("coordinates must be finite".into());
    }
    Ok(())
}

fn load_model_value(model: &Value) -> Result<FieldModel, Error> {
    match model {
        Value::String(path) => Ok(load_field(Path::new(path))?.field),
        Value::Object(_) => Ok(parse_field(&model.to_string())?.field),
        _ => Err(Error::domain("model must be a document object or a file path")),
    }
}

fn state_message(field: &FieldModel, run: &Run) -> ServerMessage {
    let system = DynamicalSystem::quiet(field, run.config).expect("validated config");
    let sample = system.evaluate(&run.x);
    ServerMessage::State {
        tick: run.tick,
        x: run.x.clone(),
        distance: sample.distance,
        phase: sample.phase,
        velocity: sample.velocity,
        lyapunov: 0.5 * sample.distance * sample.distance,
    }
}

/// Plays a recorded script against a fresh session for `ticks` clock ticks
/// and returns every message the session emitted, in order.
pub fn replay(field: Option<Arc<FieldModel>>, script: &[ScriptEntry], ticks: u64) -> Vec<ServerMessage> {
    let mut session = Session::new(field);
    let mut out = Vec::new();
    let mut next = 0;
    for _ in 0..ticks {
        while next < script.len() && script[next].at <= session.clock() {
            out.extend(session.handle(&script[next].message));
            next += 1;
        }
        out.extend(session.tick());
    }
    out
}
