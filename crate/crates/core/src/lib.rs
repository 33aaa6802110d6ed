//! EscapeRoom exploration-complexity toolkit.
//!
//! * [`graph`]: goal-dependency graphs, the seven shipped templates, and the
//!   `.goalgraph.json` format.
//! * [`walk`]: the augmented random-walk graph and its hitting times
//!   (absorbing-chain solve, grounded Laplacian solve, Monte Carlo).
//! * [`env`]: the procedurally generated EscapeRoom gridworld.
//! * [`metrics`]: goal events, episode traces and summary statistics.
//! * [`agents`]: scripted policies, the DFS meta-controller, and the
//!   hierarchical and flat control loops.
//! * [`server`]: newline-delimited JSON protocol for external learners.

pub mod agents;
pub mod env;
pub mod graph;
pub mod metrics;
pub mod rng;
pub mod server;
pub mod walk;
