//! Episode orchestration, baselines, metrics, batch runs and the exact
//! oracle for small problems.

mod bench;
mod calibrate;
mod episode;
mod metrics;
pub mod oracle;
pub mod toy;

pub use bench::{
    build_worlds, episode_seed, median, plan_step_times, reference_solver, run_bench, run_bench_on, summarize,
    sweep_degradation, Axis, BenchConfig, EpisodeRecord, RunMatrix, SweepRow, DEFAULT_RATIOS,
};
pub use calibrate::{calibrate_realistic, expected_precision, sight_counts, SightCounts};
pub use episode::{
    random_walk_policy, run_episode, run_episode_traced, EpisodeConfig, EpisodeResult, FailureKind, Phase, Policy,
    StepTrace,
};
pub use metrics::{asppl_ratio, compute_metrics, MetricsSummary};
pub use oracle::{expectimax_oracle, ExplicitModel, OracleError, OracleResult, Outcome};

use thiserror::Error;

use crate::domain::DomainError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("no episodes to summarize")]
    NoEpisodes,
}
