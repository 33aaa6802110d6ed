//! Newline-delimited JSON protocol for driving environments from other
//! processes.
//!
//! Each request is one JSON object with a `cmd` field; each gets exactly
//! one response line. Requests:
//!
//! | cmd | fields | response |
//! |---|---|---|
//! | `hello` | | `protocol`, `actions` |
//! | `reset` | `template`, `seed`, `episode`, `mode`, `drop`, `max_steps`, `room_size`, `graph` (all optional) | `episode`, `obs` |
//! | `step` | `action` (integer code) | `obs`, `reward`, `done`, `truncated`, `events` |
//! | `observe` | | `obs` |
//! | `close` | | |
//!
//! In sketch mode `reset` and `step` also carry `goal`: the encoding of the
//! current sketch goal, or null once the sketch is finished. In bonus mode
//! `reward` includes +1 per intermediate goal event.
//!
//! Failures are `{"ok":false,"error":CODE}` with codes `parse`,
//! `unknown-cmd`, `no-episode`, `episode-over`, `bad-action` and
//! `bad-request` (the last also carries a `message`). A failed request
//! leaves the session and its environment unchanged.

mod net;
mod session;

use thiserror::Error;

pub use net::{serve_stdio, Server, ServerHandle, TraceSink, DEFAULT_PORT};
pub use session::{Session, SessionDefaults, PROTOCOL_VERSION};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
