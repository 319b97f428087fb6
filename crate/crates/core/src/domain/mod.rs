//! The active-search POMDP: grid world, pose graph, candidate cells,
//! visibility, and the step/reward model the planner simulates.

mod graph;
mod grid;
mod model;
mod visibility;

pub use graph::{build_pose_graph, legal_actions, Action, Pose, PoseGraph, PoseId};
pub use grid::{CandidateId, CandidateSet, Cell, GridMap};
pub use model::{sample_layout, AvsModel, AvsState, AvsStep, AvsWorld, ObjectLayout, PoseSet, RewardConfig};
pub use visibility::{bearing_offset, build_visibility_matrix, trace_line, visibility, VisConfig, VisibilityMatrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("grid is {width}x{height} but has {cells} cells")]
    DimensionMismatch { width: usize, height: usize, cells: usize },
    #[error("grid has no empty cell")]
    NoEmptyCell,
    #[error("grid has no candidate cell")]
    NoCandidateCell,
    #[error("heading count must be at least 1")]
    NoHeadings,
    #[error("invalid visibility config: {0}")]
    InvalidVisConfig(String),
    #[error("invalid reward config: {0}")]
    InvalidRewardConfig(String),
    #[error("pose ({x}, {y}, {theta}) is not a valid pose")]
    InvalidPose { x: usize, y: usize, theta: usize },
    #[error("action {action:?} is not feasible from pose {pose:?}")]
    InfeasibleAction { pose: Pose, action: Action },
    #[error("cannot place {objects} distinct objects on {candidates} candidate cells")]
    TooManyObjects { objects: usize, candidates: usize },
    #[error("a layout needs at least one object")]
    NoObjects,
    #[error("invalid object layout: {0}")]
    InvalidLayout(String),
}
