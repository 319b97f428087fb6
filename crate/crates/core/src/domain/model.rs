use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand::Rng;

use super::{
    build_pose_graph, build_visibility_matrix, Action, CandidateId, CandidateSet, DomainError, GridMap, PoseGraph,
    PoseId, VisConfig, VisibilityMatrix,
};
use crate::solver::{Belief, GenerativeModel, StepOutcome};

/// Reward scheme and exploration budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    pub r_find: f64,
    pub r_step: f64,
    /// Added on top of `r_step` when the agent lands on a visited pose.
    pub r_revisit: f64,
    pub move_budget: usize,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { r_find: 100.0, r_step: -1.0, r_revisit: -25.0, move_budget: 200 }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.r_revisit < self.r_step && self.r_step < 0.0 && 0.0 < self.r_find) {
            return Err(DomainError::InvalidRewardConfig("need r_revisit < r_step < 0 < r_find".into()));
        }
        if self.move_budget == 0 {
            return Err(DomainError::InvalidRewardConfig("move_budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// Where each object sits, and which one is searched for.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectLayout {
    pub placements: Vec<CandidateId>,
    pub target: usize,
}

impl ObjectLayout {
    pub fn new(placements: Vec<CandidateId>, target: usize, candidates: usize) -> Result<Self, DomainError> {
        let layout = Self { placements, target };
        layout.validate(candidates)?;
        Ok(layout)
    }

    pub fn validate(&self, candidates: usize) -> Result<(), DomainError> {
        if self.placements.is_empty() {
            return Err(DomainError::NoObjects);
        }
        if self.target >= self.placements.len() {
            return Err(DomainError::InvalidLayout(format!(
                "target {} but only {} objects",
                self.target,
                self.placements.len()
            )));
        }
        for (i, p) in self.placements.iter().enumerate() {
            if p.index() >= candidates {
                return Err(DomainError::InvalidLayout(format!("object {i} on unknown candidate {}", p.0)));
            }
            if self.placements[..i].contains(p) {
                return Err(DomainError::InvalidLayout(format!("object {i} shares candidate {}", p.0)));
            }
        }
        Ok(())
    }

    pub fn target_cell(&self) -> CandidateId {
        self.placements[self.target]
    }

    /// Non-target objects in index order.
    pub fn distractors(&self) -> impl Iterator<Item = (usize, CandidateId)> + '_ {
        self.placements.iter().copied().enumerate().filter(move |&(i, _)| i != self.target)
    }

    pub fn with_target(&self, target: usize) -> Self {
        Self { placements: self.placements.clone(), target }
    }
}

/// Uniform draw of `m` distinct candidate cells; object 0 is the target.
pub fn sample_layout<R: Rng + ?Sized>(
    candidates: &CandidateSet,
    m: usize,
    rng: &mut R,
) -> Result<ObjectLayout, DomainError> {
    if m == 0 {
        return Err(DomainError::NoObjects);
    }
    if m > candidates.len() {
        return Err(DomainError::TooManyObjects { objects: m, candidates: candidates.len() });
    }
    let placements = index::sample(rng, candidates.len(), m).into_iter().map(|i| CandidateId(i as u32)).collect();
    Ok(ObjectLayout { placements, target: 0 })
}

/// Set of visited pose indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PoseSet(FixedBitSet);

impl PoseSet {
    pub fn with_capacity(poses: usize) -> Self {
        Self(FixedBitSet::with_capacity(poses))
    }

    pub fn contains(&self, p: PoseId) -> bool {
        self.0.contains(p.index())
    }

    pub fn insert(&mut self, p: PoseId) {
        self.0.insert(p.index());
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = PoseId> + '_ {
        self.0.ones().map(|i| PoseId(i as u32))
    }
}

/// Hidden POMDP state. Everything but the layout is observable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AvsState {
    pub pose: PoseId,
    pub layout: ObjectLayout,
    pub visited: PoseSet,
    pub steps_taken: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvsStep {
    /// 1 iff the target is visible from the new pose.
    pub observation: u8,
    pub reward: f64,
    pub terminal: bool,
    /// Terminal because the move budget ran out.
    pub budget_exhausted: bool,
}

/// Immutable world model shared by every episode on one map.
#[derive(Debug, Clone)]
pub struct AvsWorld {
    pub map: GridMap,
    pub graph: PoseGraph,
    pub candidates: CandidateSet,
    pub vis: VisibilityMatrix,
    pub vis_cfg: VisConfig,
    pub rewards: RewardConfig,
}

impl AvsWorld {
    pub fn new(map: GridMap, headings: usize, vis_cfg: VisConfig, rewards: RewardConfig) -> Result<Self, DomainError> {
        map.validate_for_search()?;
        vis_cfg.validate()?;
        rewards.validate()?;
        let graph = build_pose_graph(&map, headings)?;
        let candidates = CandidateSet::from_map(&map);
        let vis = build_visibility_matrix(&map, &graph, &candidates, &vis_cfg);
        Ok(Self { map, graph, candidates, vis, vis_cfg, rewards })
    }

    pub fn initial_state(&self, start: PoseId, layout: ObjectLayout) -> AvsState {
        let mut visited = PoseSet::with_capacity(self.graph.len());
        visited.insert(start);
        AvsState { pose: start, layout, visited, steps_taken: 0 }
    }

    pub fn sees_target(&self, state: &AvsState) -> bool {
        self.vis.get(state.pose, state.layout.target_cell())
    }

    /// Moves along the pose-graph edge for `action` and scores the result.
    pub fn step(&self, state: &mut AvsState, action: Action) -> Result<AvsStep, DomainError> {
        let next = self
            .graph
            .successor(state.pose, action)
            .ok_or(DomainError::InfeasibleAction { pose: self.graph.pose(state.pose), action })?;
        let revisit = state.visited.contains(next);
        state.pose = next;
        state.visited.insert(next);
        state.steps_taken += 1;
        if self.vis.get(next, state.layout.target_cell()) {
            return Ok(AvsStep {
                observation: 1,
                reward: self.rewards.r_find,
                terminal: true,
                budget_exhausted: false,
            });
        }
        let mut reward = self.rewards.r_step;
        if revisit {
            reward += self.rewards.r_revisit;
        }
        let out_of_moves = state.steps_taken >= self.rewards.move_budget;
        Ok(AvsStep { observation: 0, reward, terminal: out_of_moves, budget_exhausted: out_of_moves })
    }
}

/// The world seen from one episode: distractor placements are known scenery,
/// only the target cell is hidden.
#[derive(Debug, Clone)]
pub struct AvsModel<'w> {
    world: &'w AvsWorld,
    template: ObjectLayout,
    /// Cells the target may occupy: every candidate not holding a distractor.
    support: Vec<CandidateId>,
}

impl<'w> AvsModel<'w> {
    pub fn new(world: &'w AvsWorld, layout: &ObjectLayout) -> Self {
        let occupied: Vec<_> = layout.distractors().map(|(_, c)| c).collect();
        let support = world.candidates.iter().map(|(c, _)| c).filter(|c| !occupied.contains(c)).collect();
        Self { world, template: layout.clone(), support }
    }

    pub fn world(&self) -> &'w AvsWorld {
        self.world
    }

    pub fn support(&self) -> &[CandidateId] {
        &self.support
    }

    fn with_target(&self, reference: &AvsState, cell: CandidateId) -> AvsState {
        let mut s = reference.clone();
        s.layout.placements.clone_from(&self.template.placements);
        s.layout.target = self.template.target;
        s.layout.placements[self.template.target] = cell;
        s
    }

    /// Candidate cells no visited pose can see.
    pub fn unexcluded(&self, state: &AvsState) -> Vec<CandidateId> {
        let words = self.world.vis.row(state.pose).len();
        let mut seen = vec![0u64; words];
        for p in state.visited.iter() {
            for (acc, w) in seen.iter_mut().zip(self.world.vis.row(p)) {
                *acc |= w;
            }
        }
        self.support.iter().copied().filter(|c| seen[c.index() / 64] >> (c.index() % 64) & 1 == 0).collect()
    }

    /// Belief after the (negative) glance at the start pose.
    pub fn initial_belief<R: Rng + ?Sized>(&self, start: &AvsState, particles: usize, rng: &mut R) -> Belief<AvsState> {
        let mut p = self.sample_consistent(start, Action::RotateCw, 0, particles, rng);
        while p.len() < particles {
            p.push(self.sample_prior(start, rng));
        }
        Belief::new(p).expect("at least one particle")
    }
}

impl GenerativeModel for AvsModel<'_> {
    type State = AvsState;
    type Action = Action;
    type Observation = u8;

    fn legal_actions(&self, state: &AvsState, out: &mut Vec<Action>) {
        self.world.graph.legal_actions_into(state.pose, out);
    }

    fn step<R: Rng + ?Sized>(&self, state: &mut AvsState, action: Action, _rng: &mut R) -> StepOutcome<u8> {
        let s = self.world.step(state, action).expect("planner stepped an infeasible action");
        StepOutcome { observation: s.observation, reward: s.reward, terminal: s.terminal }
    }

    fn is_terminal(&self, state: &AvsState) -> bool {
        state.steps_taken >= self.world.rewards.move_budget || self.world.sees_target(state)
    }

    fn reward_bounds(&self) -> (f64, f64) {
        let r = &self.world.rewards;
        (r.r_step + r.r_revisit, r.r_find)
    }

    fn sample_consistent<R: Rng + ?Sized>(
        &self,
        reference: &AvsState,
        _action: Action,
        observation: u8,
        count: usize,
        rng: &mut R,
    ) -> Vec<AvsState> {
        let vis = &self.world.vis;
        let pool: Vec<CandidateId> = if observation == 1 {
            self.support.iter().copied().filter(|&c| vis.get(reference.pose, c)).collect()
        } else {
            let history = self.unexcluded(reference);
            if history.is_empty() {
                self.support.iter().copied().filter(|&c| !vis.get(reference.pose, c)).collect()
            } else {
                history
            }
        };
        if pool.is_empty() {
            return Vec::new();
        }
        (0..count).map(|_| self.with_target(reference, pool[rng.gen_range(0..pool.len())])).collect()
    }

    fn sample_prior<R: Rng + ?Sized>(&self, reference: &AvsState, rng: &mut R) -> AvsState {
        self.with_target(reference, self.support[rng.gen_range(0..self.support.len())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Pose;
    use crate::solver::{update_belief, PomdpConfig};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn corridor() -> AvsWorld {
        // two rooms joined by a corridor, candidates on the far walls
        let map = GridMap::from_rows(&["#########", "C...#...C", "C.......C", "#########"]).unwrap();
        AvsWorld::new(map, 4, VisConfig { fov: 90.0, max_range: 3.0 }, RewardConfig::default()).unwrap()
    }

    fn id(w: &AvsWorld, x: usize, y: usize, t: usize) -> PoseId {
        w.graph.id_of(Pose::new(x, y, t)).unwrap()
    }

    #[test]
    fn step_rewards() {
        let w = corridor();
        // target at (8, 1)
        let target = w.candidates.id_of(8, 1).unwrap();
        let layout = ObjectLayout::new(vec![target], 0, w.candidates.len()).unwrap();
        let mut s = w.initial_state(id(&w, 4, 2, 0), layout);

        let out = w.step(&mut s, Action::Forward).unwrap();
        assert_eq!((out.observation, out.reward, out.terminal), (0, -1.0, false));

        let out = w.step(&mut s, Action::Backward).unwrap();
        assert_eq!(out.reward, -26.0);
        assert!(!out.terminal);

        s.pose = id(&w, 6, 2, 0);
        let out = w.step(&mut s, Action::Forward).unwrap();
        assert_eq!((out.observation, out.reward, out.terminal), (1, 100.0, true));
    }

    #[test]
    fn infeasible_action() {
        let w = corridor();
        let layout = ObjectLayout::new(vec![CandidateId(0)], 0, w.candidates.len()).unwrap();
        let mut s = w.initial_state(id(&w, 1, 1, 1), layout);
        assert!(matches!(w.step(&mut s, Action::Forward), Err(DomainError::InfeasibleAction { .. })));
    }

    #[test]
    fn budget_terminates() {
        let mut w = corridor();
        w.rewards.move_budget = 2;
        let layout = ObjectLayout::new(vec![CandidateId(0)], 0, w.candidates.len()).unwrap();
        let mut s = w.initial_state(id(&w, 5, 2, 1), layout);
        assert!(!w.step(&mut s, Action::RotateCw).unwrap().terminal);
        let out = w.step(&mut s, Action::RotateCw).unwrap();
        assert!(out.terminal && out.budget_exhausted);
    }

    #[test]
    fn layout_sampling() {
        let w = corridor();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = sample_layout(&w.candidates, 4, &mut rng).unwrap();
        let mut p = l.placements.clone();
        p.sort();
        assert_eq!(p, (0..4).map(CandidateId).collect::<Vec<_>>());
        assert_eq!(sample_layout(&w.candidates, 0, &mut rng), Err(DomainError::NoObjects));
        assert!(matches!(sample_layout(&w.candidates, 5, &mut rng), Err(DomainError::TooManyObjects { .. })));
    }

    #[test]
    fn layout_sampling_is_uniform() {
        let map = GridMap::from_rows(&["CCCCC", "....."]).unwrap();
        let cands = CandidateSet::from_map(&map);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            counts[sample_layout(&cands, 1, &mut rng).unwrap().placements[0].index()] += 1;
        }
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 2000.0).powi(2) / 2000.0).sum();
        // chi-square, 4 dof, p = 0.001
        assert!(chi2 < 18.47, "{counts:?}");
        assert!(counts.iter().all(|&c| c.abs_diff(2000) <= 150), "{counts:?}");
    }

    #[test]
    fn layout_validation() {
        assert!(ObjectLayout::new(vec![CandidateId(1), CandidateId(1)], 0, 4).is_err());
        assert!(ObjectLayout::new(vec![CandidateId(7)], 0, 4).is_err());
        assert!(ObjectLayout::new(vec![CandidateId(1)], 1, 4).is_err());
    }

    #[test]
    fn positive_observation_reinvigorates_from_visible_cells() {
        let w = corridor();
        let layout = ObjectLayout::new(vec![CandidateId(1), CandidateId(0)], 0, w.candidates.len()).unwrap();
        let model = AvsModel::new(&w, &layout);
        let start = w.initial_state(id(&w, 5, 2, 1), layout.clone());
        // every particle says the target is behind the agent on the left
        let left = w.candidates.id_of(0, 2).unwrap();
        let b = Belief::new(vec![model.with_target(&start, left); 20]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = PomdpConfig { min_particles: 20, ..Default::default() };
        // turning clockwise faces east; (8, 1) and (8, 2) are in view
        let out = update_belief(&b, Action::RotateCw, 1, &model, &cfg, &mut rng);
        assert_eq!(out.len(), 20);
        let east = w.graph.successor(start.pose, Action::RotateCw).unwrap();
        let oracle: Vec<_> = w
            .candidates
            .iter()
            .filter(|&(c, cell)| {
                c != CandidateId(0) && crate::domain::visibility(&w.map, w.graph.pose(east), 4, cell, &w.vis_cfg)
            })
            .map(|(c, _)| c)
            .collect();
        assert!(!oracle.is_empty());
        for p in out.particles() {
            assert!(oracle.contains(&p.layout.target_cell()));
            assert_eq!(p.pose, east);
        }
    }

    #[test]
    fn unique_consistent_placement_collapses() {
        let map = GridMap::from_rows(&["C.C"]).unwrap();
        let w = AvsWorld::new(map, 4, VisConfig { fov: 90.0, max_range: 3.0 }, RewardConfig::default()).unwrap();
        let layout = ObjectLayout::new(vec![CandidateId(0)], 0, 2).unwrap();
        let model = AvsModel::new(&w, &layout);
        let start = w.initial_state(id(&w, 1, 0, 1), layout);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = model.initial_belief(&start, 50, &mut rng);
        let cfg = PomdpConfig { min_particles: 50, ..Default::default() };
        // facing west sees (0, 0); a negative glance leaves only (2, 0)
        let out = update_belief(&b, Action::RotateCcw, 0, &model, &cfg, &mut rng);
        assert!(out.particles().iter().all(|p| p.layout.target_cell() == CandidateId(1)));
    }

    proptest! {
        #[test]
        fn observation_matches_matrix(seed in 0u64..1000, steps in 1usize..30) {
            let w = corridor();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layout = sample_layout(&w.candidates, 2, &mut rng).unwrap();
            let start = PoseId(rng.gen_range(0..w.graph.len() as u32));
            let mut s = w.initial_state(start, layout);
            let mut total = 0.0;
            let mut actions = Vec::new();
            for _ in 0..steps {
                w.graph.legal_actions_into(s.pose, &mut actions);
                let a = actions[rng.gen_range(0..actions.len())];
                let out = w.step(&mut s, a).unwrap();
                prop_assert_eq!(out.observation == 1, w.vis.get(s.pose, s.layout.target_cell()));
                prop_assert!(s.visited.contains(s.pose));
                total += out.reward;
                if out.terminal { break; }
            }
            prop_assert!(total <= w.rewards.r_find);
        }
    }
}
