//! Streaming simulation endpoint: live rollouts that clients can perturb and
//! retune while they run.

pub mod protocol;
mod server;
mod session;

pub use protocol::{codes, ClientMessage, ServerMessage};
pub use server::{ServeOptions, Server, Transport, DEFAULT_PORT, DEFAULT_RATE};
pub use session::{replay, ScriptEntry, Session};
