use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{ucb1_select, ActionNode, NodeId, SearchTree};
use super::{update_belief, Belief, GenerativeModel, PomdpConfig, SolverError};

/// Discounted return of a uniformly random policy from `state`, starting at
/// absolute `depth`. Stops on a terminal step or at the horizon.
pub fn rollout<M, R>(state: &mut M::State, depth: usize, model: &M, cfg: &PomdpConfig, rng: &mut R) -> f64
where
    M: GenerativeModel,
    R: Rng + ?Sized,
{
    let mut actions = Vec::new();
    rollout_with(state, depth, model, cfg, rng, &mut actions)
}

fn rollout_with<M, R>(
    state: &mut M::State,
    mut depth: usize,
    model: &M,
    cfg: &PomdpConfig,
    rng: &mut R,
    actions: &mut Vec<M::Action>,
) -> f64
where
    M: GenerativeModel,
    R: Rng + ?Sized,
{
    if model.is_terminal(state) {
        return 0.0;
    }
    let mut total = 0.0;
    let mut discount = 1.0;
    while cfg.within_horizon(depth) {
        model.legal_actions(state, actions);
        if actions.is_empty() {
            break;
        }
        let a = actions[rng.gen_range(0..actions.len())];
        let out = model.step(state, a, rng);
        total += discount * out.reward;
        if out.terminal {
            break;
        }
        discount *= cfg.gamma;
        depth += 1;
    }
    total
}

/// One POMCP simulation from `node`, which must hold the history that
/// `state` was sampled for. Returns the discounted return and backs it up
/// through every node on the way.
pub fn simulate<M, R>(
    state: &mut M::State,
    tree: &mut SearchTree<M::Action, M::Observation>,
    node: NodeId,
    depth: usize,
    model: &M,
    cfg: &PomdpConfig,
    rng: &mut R,
) -> f64
where
    M: GenerativeModel,
    R: Rng + ?Sized,
{
    let mut actions = Vec::new();
    simulate_with(state, tree, node, depth, model, cfg, rng, &mut actions)
}

#[allow(clippy::too_many_arguments)]
fn simulate_with<M, R>(
    state: &mut M::State,
    tree: &mut SearchTree<M::Action, M::Observation>,
    node: NodeId,
    depth: usize,
    model: &M,
    cfg: &PomdpConfig,
    rng: &mut R,
    actions: &mut Vec<M::Action>,
) -> f64
where
    M: GenerativeModel,
    R: Rng + ?Sized,
{
    if model.is_terminal(state) {
        tree.node_mut(node).record(0.0);
        return 0.0;
    }
    if !cfg.within_horizon(depth) {
        // Nothing left to earn; rollout at the cap is zero by construction.
        let ret = rollout_with(state, depth, model, cfg, rng, actions);
        tree.node_mut(node).record(ret);
        return ret;
    }
    if !tree.node(node).is_expanded() {
        model.legal_actions(state, actions);
        let n = tree.node_mut(node);
        n.actions =
            actions.iter().map(|&action| ActionNode { action, visits: 0, value: 0.0, children: Vec::new() }).collect();
        n.expanded = true;
        let ret = rollout_with(state, depth, model, cfg, rng, actions);
        tree.node_mut(node).record(ret);
        return ret;
    }
    if tree.node(node).actions.is_empty() {
        tree.node_mut(node).record(0.0);
        return 0.0;
    }

    let ai = ucb1_select(tree.node(node), cfg.ucb_c);
    let action = tree.node(node).actions[ai].action;
    let out = model.step(state, action, rng);
    let mut ret = out.reward;
    if !out.terminal {
        let child = match tree.node(node).actions[ai].child(&out.observation) {
            Some(c) => c,
            None => {
                let c = tree.push();
                tree.node_mut(node).actions[ai].children.push((out.observation, c));
                c
            }
        };
        ret += cfg.gamma * simulate_with(state, tree, child, depth + 1, model, cfg, rng, actions);
    }

    let n = tree.node_mut(node);
    let a = &mut n.actions[ai];
    a.visits += 1;
    a.value += (ret - a.value) / f64::from(a.visits);
    n.record(ret);
    ret
}

/// Online planner: owns the search tree for the current history and the RNG
/// stream that drives simulations and belief updates.
pub struct Planner<'m, M: GenerativeModel> {
    model: &'m M,
    cfg: PomdpConfig,
    tree: SearchTree<M::Action, M::Observation>,
    rng: ChaCha8Rng,
    actions: Vec<M::Action>,
}

impl<'m, M: GenerativeModel> Planner<'m, M> {
    pub fn new(model: &'m M, cfg: PomdpConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self { model, cfg, tree: SearchTree::new(), rng, actions: Vec::new() })
    }

    pub fn config(&self) -> &PomdpConfig {
        &self.cfg
    }

    pub fn tree(&self) -> &SearchTree<M::Action, M::Observation> {
        &self.tree
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Runs exactly `n_sim` simulations from particles drawn uniformly from
    /// `belief` and returns the most visited root action (lowest index on
    /// ties).
    pub fn plan(&mut self, belief: &Belief<M::State>) -> Result<M::Action, SolverError> {
        if belief.is_empty() {
            return Err(SolverError::EmptyBelief);
        }
        for _ in 0..self.cfg.n_sim {
            let mut s = belief.sample(&mut self.rng).clone();
            simulate_with(
                &mut s,
                &mut self.tree,
                NodeId::ROOT,
                0,
                self.model,
                &self.cfg,
                &mut self.rng,
                &mut self.actions,
            );
        }
        self.best_action(belief)
    }

    fn best_action(&mut self, belief: &Belief<M::State>) -> Result<M::Action, SolverError> {
        let root = self.tree.root();
        if root.actions.is_empty() {
            // Every simulation hit a terminal particle or the root was never
            // expanded; fall back on the first legal action.
            let s = &belief.particles()[0];
            self.model.legal_actions(s, &mut self.actions);
            return self.actions.first().copied().ok_or(SolverError::NoLegalActions);
        }
        let mut best = 0;
        for (i, a) in root.actions.iter().enumerate() {
            if a.visits > root.actions[best].visits {
                best = i;
            }
        }
        Ok(root.actions[best].action)
    }

    /// Mean return estimate of `action` at the root, if it was expanded.
    pub fn root_value(&self, action: M::Action) -> Option<f64> {
        self.tree.root().actions.iter().find(|a| a.action == action).map(|a| a.value)
    }

    /// Commits to `(action, observation)`: re-roots the tree and filters the
    /// belief.
    pub fn advance(
        &mut self,
        belief: &Belief<M::State>,
        action: M::Action,
        observation: M::Observation,
    ) -> Belief<M::State> {
        self.tree = self.tree.prune(&action, &observation);
        update_belief(belief, action, observation, self.model, &self.cfg, &mut self.rng)
    }

    /// Drops all search statistics.
    pub fn reset_tree(&mut self) {
        self.tree = SearchTree::new();
    }
}
