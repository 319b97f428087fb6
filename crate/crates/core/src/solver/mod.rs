//! Generic online POMCP: UCT search over action/observation histories,
//! random rollouts below the tree frontier, and a rejection-sampling particle
//! filter for the belief. Nothing in here knows about grids or objects.

mod belief;
mod config;
mod model;
mod planner;
mod tree;

pub use belief::{update_belief, Belief};
pub use config::PomdpConfig;
pub use model::{GenerativeModel, StepOutcome};
pub use planner::{rollout, simulate, Planner};
pub use tree::{ucb1_select, ActionNode, HistoryNode, NodeId, SearchTree};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("belief has no particles")]
    EmptyBelief,
    #[error("no legal action from the sampled state")]
    NoLegalActions,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}
