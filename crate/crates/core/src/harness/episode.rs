use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::docking::{distances_from, Docking, DockingConfig, DockingError};
use crate::domain::{Action, AvsModel, AvsWorld, ObjectLayout, Pose, PoseGraph, PoseId};
use crate::perception::{observe, Detection, DetectorProfile};
use crate::solver::{Planner, PomdpConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    Pomp,
    /// POMP exploration, docking toward the first estimate without replanning.
    PartialPomp,
    RandomWalk,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Pomp => "pomp",
            Policy::PartialPomp => "partial-pomp",
            Policy::RandomWalk => "random",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pomp" => Ok(Policy::Pomp),
            "partial-pomp" => Ok(Policy::PartialPomp),
            "random" => Ok(Policy::RandomWalk),
            _ => Err(format!("unknown policy {s:?} (expected pomp, partial-pomp or random)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureKind {
    None,
    MoveBudget,
    NoVantagePoint,
    Unreachable,
    /// Docking finished away from every ground-truth destination.
    WrongDestination,
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::None => "none",
            FailureKind::MoveBudget => "move_budget",
            FailureKind::NoVantagePoint => "no_vantage_point",
            FailureKind::Unreachable => "unreachable",
            FailureKind::WrongDestination => "wrong_destination",
        })
    }
}

impl From<DockingError> for FailureKind {
    fn from(e: DockingError) -> Self {
        match e {
            DockingError::NoVantagePoint(_) => FailureKind::NoVantagePoint,
            DockingError::Unreachable { .. } => FailureKind::Unreachable,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub policy: Policy,
    pub detector: DetectorProfile,
    /// `seed` is ignored; the planner stream derives from the episode seed.
    pub solver: PomdpConfig,
    pub docking: DockingConfig,
    pub seed: u64,
    pub start: PoseId,
    /// Index into the layout's objects.
    pub target: usize,
    /// Record wall-clock planning time per step in the trace.
    pub time_planning: bool,
}

impl EpisodeConfig {
    pub fn new(policy: Policy, start: PoseId, target: usize, seed: u64) -> Self {
        Self {
            policy,
            detector: DetectorProfile::PERFECT,
            solver: PomdpConfig::default(),
            docking: DockingConfig::default(),
            seed,
            start,
            target,
            time_planning: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Exploration,
    Docking,
}

/// One executed action.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub phase: Phase,
    /// 1-based step count across both phases.
    pub step: usize,
    pub action: Action,
    /// Pose after the action.
    pub pose: Pose,
    pub detection: Detection,
    pub plan_time: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub success: bool,
    /// Actions taken in both phases.
    pub path_length: usize,
    pub exploration_length: usize,
    pub trajectory: Vec<PoseId>,
    pub failure_kind: FailureKind,
    /// Whether exploration ended with a detection (true or false).
    pub detected: bool,
    /// Fewest actions from the start to any ground-truth destination.
    pub shortest_length: Option<u32>,
}

/// Uniform choice among the feasible actions at `pose`.
pub fn random_walk_policy<R: Rng + ?Sized>(pose: PoseId, graph: &PoseGraph, rng: &mut R) -> Action {
    let mut actions = Vec::with_capacity(4);
    graph.legal_actions_into(pose, &mut actions);
    actions[rng.gen_range(0..actions.len())]
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn run_episode(
    cfg: &EpisodeConfig,
    world: &AvsWorld,
    layout: &ObjectLayout,
) -> Result<EpisodeResult, HarnessError> {
    run_episode_traced(cfg, world, layout, &mut |_| {})
}

/// Exploration until the first detection or the move budget, then docking
/// until the plan is exhausted. `trace` sees every executed action.
pub fn run_episode_traced(
    cfg: &EpisodeConfig,
    world: &AvsWorld,
    layout: &ObjectLayout,
    trace: &mut dyn FnMut(&StepTrace),
) -> Result<EpisodeResult, HarnessError> {
    if cfg.start.index() >= world.graph.len() {
        return Err(HarnessError::Config(format!("start pose {:?} is not in the pose graph", cfg.start)));
    }
    if cfg.target >= layout.placements.len() {
        return Err(HarnessError::Config(format!(
            "target {} but only {} objects",
            cfg.target,
            layout.placements.len()
        )));
    }
    layout.validate(world.candidates.len())?;
    cfg.detector.validate().map_err(HarnessError::Config)?;
    let solver = PomdpConfig { seed: cfg.seed, ..cfg.solver };
    solver.validate()?;

    let layout = layout.with_target(cfg.target);
    let true_target = layout.target_cell();
    let docking = Docking { graph: &world.graph, vis: &world.vis, candidates: &world.candidates, cfg: cfg.docking };
    let destinations = docking.ground_truth_destinations(true_target);
    let from_start = distances_from(&world.graph, cfg.start);
    let shortest_length = destinations.iter().filter_map(|p| from_start[p.index()]).min();

    let mut sensor_rng = stream(cfg.seed, 1);
    let mut walk_rng = stream(cfg.seed, 2);
    let mut state = world.initial_state(cfg.start, layout.clone());
    let mut trajectory = vec![cfg.start];
    let mut step = 0;
    let budget = world.rewards.move_budget;

    let finish = |trajectory: Vec<PoseId>, exploration_length, detected, failure_kind: FailureKind| {
        let success = failure_kind == FailureKind::None;
        Ok(EpisodeResult {
            success,
            path_length: trajectory.len() - 1,
            exploration_length,
            trajectory,
            failure_kind,
            detected,
            shortest_length,
        })
    };

    // Exploration.
    let mut detection = observe(&world.candidates, cfg.start, &layout, &world.vis, &cfg.detector, &mut sensor_rng);
    if !detection.detected {
        let model = AvsModel::new(world, &layout);
        let mut planner = match cfg.policy {
            Policy::RandomWalk => None,
            _ => Some(Planner::new(&model, solver)?),
        };
        let mut belief = match planner.as_mut() {
            Some(p) => {
                let n = solver.min_particles;
                Some(model.initial_belief(&state, n, p.rng()))
            }
            None => None,
        };
        loop {
            if state.steps_taken >= budget {
                return finish(trajectory, step, false, FailureKind::MoveBudget);
            }
            let clock = cfg.time_planning.then(std::time::Instant::now);
            let action = match (planner.as_mut(), belief.as_ref()) {
                (Some(p), Some(b)) => p.plan(b)?,
                _ => random_walk_policy(state.pose, &world.graph, &mut walk_rng),
            };
            let plan_time = clock.map(|c| c.elapsed());
            world.step(&mut state, action)?;
            step += 1;
            trajectory.push(state.pose);
            detection = observe(&world.candidates, state.pose, &layout, &world.vis, &cfg.detector, &mut sensor_rng);
            trace(&StepTrace {
                phase: Phase::Exploration,
                step,
                action,
                pose: world.graph.pose(state.pose),
                detection,
                plan_time,
            });
            if detection.detected {
                break;
            }
            if let (Some(p), Some(b)) = (planner.as_mut(), belief.as_mut()) {
                *b = p.advance(b, action, 0);
            }
        }
    }
    let exploration_length = step;

    // Docking.
    let estimate = detection.estimated_cell.expect("a detection names a cell");
    let mut plan = match docking.plan(state.pose, estimate) {
        Ok(p) => p,
        Err(e) => return finish(trajectory, exploration_length, true, e.into()),
    };
    let cap = 2 * world.graph.len();
    let mut fresh = Detection::NONE;
    let mut docking_steps = 0;
    loop {
        let input = if cfg.policy == Policy::PartialPomp { Detection::NONE } else { fresh };
        let (action, next) = match docking.approach_step(&plan, &input) {
            Ok(r) => r,
            Err(e) => return finish(trajectory, exploration_length, true, e.into()),
        };
        plan = next;
        let Some(action) = action else { break };
        if docking_steps >= cap {
            return finish(trajectory, exploration_length, true, FailureKind::MoveBudget);
        }
        let pose = world.graph.successor(state.pose, action).expect("docking paths follow graph edges");
        state.pose = pose;
        docking_steps += 1;
        step += 1;
        trajectory.push(pose);
        fresh = observe(&world.candidates, pose, &layout, &world.vis, &cfg.detector, &mut sensor_rng);
        trace(&StepTrace {
            phase: Phase::Docking,
            step,
            action,
            pose: world.graph.pose(pose),
            detection: fresh,
            plan_time: None,
        });
    }
    let kind = if destinations.contains(&state.pose) { FailureKind::None } else { FailureKind::WrongDestination };
    finish(trajectory, exploration_length, true, kind)
}
