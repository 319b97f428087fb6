//! Exact finite-horizon expectimax over the belief MDP, used to grade the
//! sampling planner on small problems.

use std::fmt::Debug;

use thiserror::Error;

use crate::domain::{Action, AvsModel, AvsState};
use crate::solver::GenerativeModel;

/// Refuse searches that would evaluate more leaves than this.
pub const MAX_LEAF_EVALUATIONS: u64 = 10_000_000;

const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("expectimax needs more than {MAX_LEAF_EVALUATIONS} leaf evaluations")]
    TooLarge,
    #[error("belief is empty or has no probability mass")]
    EmptyBelief,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<S, O> {
    pub prob: f64,
    pub next: S,
    pub observation: O,
    pub reward: f64,
    pub terminal: bool,
}

/// A POMDP with enumerable one-step dynamics.
pub trait ExplicitModel {
    type State: Clone + PartialEq;
    type Action: Copy + PartialEq + Debug;
    type Observation: Copy + PartialEq + Debug;

    /// Actions available under a belief; every support state must share them.
    fn actions(&self, state: &Self::State) -> Vec<Self::Action>;

    fn outcomes(&self, state: &Self::State, action: Self::Action) -> Vec<Outcome<Self::State, Self::Observation>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<A> {
    pub value: f64,
    /// Every action within 1e-9 of the best value. All actions at horizon 0.
    pub optimal: Vec<A>,
    pub q_values: Vec<(A, f64)>,
}

struct Search<'a, M: ExplicitModel> {
    model: &'a M,
    gamma: f64,
    leaves: u64,
}

type Dist<S> = Vec<(S, f64)>;
type ActionValues<M> = Vec<(<M as ExplicitModel>::Action, f64)>;

fn add_mass<S: PartialEq>(dist: &mut Dist<S>, s: S, p: f64) {
    match dist.iter_mut().find(|(t, _)| *t == s) {
        Some((_, q)) => *q += p,
        None => dist.push((s, p)),
    }
}

impl<M: ExplicitModel> Search<'_, M> {
    fn q(&mut self, belief: &Dist<M::State>, action: M::Action, horizon: usize) -> Result<f64, OracleError> {
        let mut immediate = 0.0;
        let mut branches: Vec<(M::Observation, f64, Dist<M::State>)> = Vec::new();
        for (s, p) in belief {
            for o in self.model.outcomes(s, action) {
                self.leaves += 1;
                if self.leaves > MAX_LEAF_EVALUATIONS {
                    return Err(OracleError::TooLarge);
                }
                let w = p * o.prob;
                immediate += w * o.reward;
                let idx = match branches.iter().position(|(obs, _, _)| *obs == o.observation) {
                    Some(i) => i,
                    None => {
                        branches.push((o.observation, 0.0, Vec::new()));
                        branches.len() - 1
                    }
                };
                if !o.terminal {
                    branches[idx].1 += w;
                    add_mass(&mut branches[idx].2, o.next, w);
                }
            }
        }
        let mut future = 0.0;
        if horizon > 1 {
            for (_, mass, mut dist) in branches {
                if mass <= 0.0 {
                    continue;
                }
                for (_, q) in dist.iter_mut() {
                    *q /= mass;
                }
                future += mass * self.value(&dist, horizon - 1)?.0;
            }
        }
        Ok(immediate + self.gamma * future)
    }

    fn value(&mut self, belief: &Dist<M::State>, horizon: usize) -> Result<(f64, ActionValues<M>), OracleError> {
        if horizon == 0 {
            return Ok((0.0, Vec::new()));
        }
        let actions = self.model.actions(&belief[0].0);
        if actions.is_empty() {
            return Ok((0.0, Vec::new()));
        }
        let mut qs = Vec::with_capacity(actions.len());
        let mut best = f64::NEG_INFINITY;
        for a in actions {
            let q = self.q(belief, a, horizon)?;
            best = best.max(q);
            qs.push((a, q));
        }
        Ok((best, qs))
    }
}

/// Exhaustive backup of `belief` (state, probability) to `horizon` steps.
pub fn expectimax_oracle<M: ExplicitModel>(
    model: &M,
    belief: &[(M::State, f64)],
    horizon: usize,
    gamma: f64,
) -> Result<OracleResult<M::Action>, OracleError> {
    let mut dist: Dist<M::State> = Vec::new();
    let mut total = 0.0;
    for (s, p) in belief {
        if *p > 0.0 {
            add_mass(&mut dist, s.clone(), *p);
            total += p;
        }
    }
    if dist.is_empty() {
        return Err(OracleError::EmptyBelief);
    }
    for (_, p) in dist.iter_mut() {
        *p /= total;
    }
    if horizon == 0 {
        let all = model.actions(&dist[0].0);
        return Ok(OracleResult { value: 0.0, q_values: all.iter().map(|&a| (a, 0.0)).collect(), optimal: all });
    }
    let mut search = Search { model, gamma, leaves: 0 };
    let (value, q_values) = search.value(&dist, horizon)?;
    let optimal = q_values.iter().filter(|(_, q)| (value - q).abs() <= TIE_EPS).map(|&(a, _)| a).collect();
    Ok(OracleResult { value, optimal, q_values })
}

/// The search model is deterministic given the hidden placement.
impl ExplicitModel for AvsModel<'_> {
    type State = AvsState;
    type Action = Action;
    type Observation = u8;

    fn actions(&self, state: &AvsState) -> Vec<Action> {
        let mut out = Vec::new();
        GenerativeModel::legal_actions(self, state, &mut out);
        out
    }

    fn outcomes(&self, state: &AvsState, action: Action) -> Vec<Outcome<AvsState, u8>> {
        if self.is_terminal(state) {
            return vec![Outcome { prob: 1.0, next: state.clone(), observation: 0, reward: 0.0, terminal: true }];
        }
        let mut next = state.clone();
        let step = self.world().step(&mut next, action).expect("oracle expanded an infeasible action");
        vec![Outcome { prob: 1.0, next, observation: step.observation, reward: step.reward, terminal: step.terminal }]
    }
}
