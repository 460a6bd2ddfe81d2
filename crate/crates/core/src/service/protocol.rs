use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::{GridRow, Slice};

/// Messages a client may send, one JSON object per line, tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    /// `model` is either an inline model document or a path on the server.
    Load { model: Value },
    Start {
        x0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step_size: Option<f64>,
    },
    Pause,
    Resume,
    Perturb { delta: Vec<f64> },
    SetLambda { lambda: f64 },
    SetState { x: Vec<f64> },
    Grid {
        bounds: [f64; 4],
        resolution: (usize, usize),
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slice: Option<Slice>,
    },
}

impl ClientMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ClientMessage::Load { .. } => "load",
            ClientMessage::Start { .. } => "start",
            ClientMessage::Pause => "pause",
            ClientMessage::Resume => "resume",
            ClientMessage::Perturb { .. } => "perturb",
            ClientMessage::SetLambda { .. } => "set_lambda",
            ClientMessage::SetState { .. } => "set_state",
            ClientMessage::Grid { .. } => "grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State {
        tick: u64,
        x: Vec<f64>,
        distance: f64,
        phase: f64,
        velocity: Vec<f64>,
        lyapunov: f64,
    },
    GridData {
        bounds: [f64; 4],
        resolution: (usize, usize),
        rows: Vec<GridRow>,
    },
    Ack {
        of: String,
    },
    Error {
        code: String,
        message: String,
    },
}

impl ServerMessage {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("server message serializes")
    }

    pub fn is_state(&self) -> bool {
        matches!(self, ServerMessage::State { .. })
    }
}

/// Error codes sent in `error` messages.
pub mod codes {
    pub const MALFORMED: &str = "malformed";
    pub const NO_MODEL: &str = "no-model";
    pub const NO_SESSION: &str = "no-session";
    pub const INVALID: &str = "invalid";
    pub const DIVERGED: &str = "diverged";
}
