//! Random-walk exploration complexity of goal-dependency graphs.
//!
//! The dependency graph is expanded into an [`AugmentedGraph`] whose
//! states pair the set of opened doors with the walker's location. Each
//! step the walker stays put with `stay_prob`, jumps back to the root with
//! `restart_prob`, and otherwise follows one of its outgoing advance edges
//! chosen uniformly. Hitting times of the exit are computed three ways:
//! first-step analysis on the absorbing chain (authoritative), the grounded
//! Laplacian system on the symmetrized advance graph, and Monte Carlo.

mod augment;
mod hitting;
pub mod linalg;
mod monte_carlo;
mod table;

use thiserror::Error;

pub use augment::{augment, AugmentedGraph, Place, WalkState};
pub use hitting::{
    expected_reachable, grounded_laplacian_solve, grounded_solve, hitting_time_absorbing,
    hitting_time_absorbing_counted, transition_matrix, HittingTimeReport, Method, TransitionMatrix,
};
pub use monte_carlo::{hitting_time_mc, hitting_time_mc_counted, MC_BLOCK_WALKS, MC_STEP_CAP};
pub use table::{analyze_graph, ht_table, AnalysisRow, HtRow, McSettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("invalid walk parameters: {0}")]
    InvalidParams(String),
    #[error("augmented graph construction: {0}")]
    Construction(String),
    #[error("singular linear system ({0})")]
    Singular(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("walk exceeded {cap} steps without absorbing (block {block})")]
    StepCap { cap: u64, block: u64 },
}

/// How a hitting time counts steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepCounting {
    /// Every application of the transition matrix is one time unit,
    /// including steps that stay in place.
    #[default]
    EveryStep,
    /// Only steps that change state are counted.
    MovesOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    stay_prob: f64,
    advance_prob: f64,
    restart_prob: f64,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            stay_prob: 0.80,
            advance_prob: 0.19,
            restart_prob: 0.01,
        }
    }
}

impl WalkParams {
    pub fn new(stay_prob: f64, advance_prob: f64, restart_prob: f64) -> Result<Self, WalkError> {
        for (name, p) in [
            ("stay", stay_prob),
            ("advance", advance_prob),
            ("restart", restart_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(WalkError::InvalidParams(format!(
                    "{name} probability {p} outside [0, 1]"
                )));
            }
        }
        if advance_prob <= 0.0 {
            return Err(WalkError::InvalidParams(
                "advance probability must be positive".into(),
            ));
        }
        let total = stay_prob + advance_prob + restart_prob;
        if (total - 1.0).abs() > 1e-12 {
            return Err(WalkError::InvalidParams(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            stay_prob,
            advance_prob,
            restart_prob,
        })
    }

    /// Fixes the restart probability and puts the remaining mass on staying.
    pub fn with_advance(advance_prob: f64, restart_prob: f64) -> Result<Self, WalkError> {
        Self::new(
            1.0 - advance_prob - restart_prob,
            advance_prob,
            restart_prob,
        )
    }

    pub fn stay_prob(&self) -> f64 {
        self.stay_prob
    }

    pub fn advance_prob(&self) -> f64 {
        self.advance_prob
    }

    pub fn restart_prob(&self) -> f64 {
        self.restart_prob
    }
}
