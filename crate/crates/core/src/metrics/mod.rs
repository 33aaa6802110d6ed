//! Goal events, episode traces and the evaluation statistics built on them.

mod events;
mod stats;
mod summary;
mod trace;

use thiserror::Error;

pub use events::{detect_events, EventKind, GoalEvent};
pub use stats::{pearson, spearman};
pub use summary::{summarize, GoalStat, MetricsSummary, SummaryAccumulator};
pub use trace::{read_traces, write_trace, EpisodeTrace, GoalFailure, StepRecord, TRACE_EXTENSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("inconsistent snapshots: {0}")]
    Inconsistent(String),
    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}
