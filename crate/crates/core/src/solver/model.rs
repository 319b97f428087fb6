use rand::Rng;

/// Result of pushing one action through the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<O> {
    pub observation: O,
    pub reward: f64,
    pub terminal: bool,
}

/// Black-box simulator of a POMDP `(S, A, O, T, Z, R, gamma)`.
///
/// `step` samples the transition, observation and reward in one call and is
/// deterministic for a given RNG stream. Legal actions must be a function of
/// the observable part of the state: every particle reachable under one
/// history has to offer the same action list, in the same order.
pub trait GenerativeModel {
    type State: Clone;
    type Action: Copy + PartialEq + std::fmt::Debug;
    type Observation: Copy + PartialEq + std::fmt::Debug;

    /// Clears `out` and fills it with the actions available in `state`.
    fn legal_actions(&self, state: &Self::State, out: &mut Vec<Self::Action>);

    /// Advances `state` in place.
    fn step<R: Rng + ?Sized>(
        &self,
        state: &mut Self::State,
        action: Self::Action,
        rng: &mut R,
    ) -> StepOutcome<Self::Observation>;

    fn is_terminal(&self, _state: &Self::State) -> bool {
        false
    }

    /// Smallest and largest one-step reward the model can emit.
    fn reward_bounds(&self) -> (f64, f64);

    /// Draws up to `count` fresh states from the prior that would have
    /// produced `observation` after `action`. `reference` is a successor of
    /// some old particle and carries the observable part of the state.
    /// Returns fewer states (possibly none) when the observation is
    /// inconsistent with the whole prior.
    fn sample_consistent<R: Rng + ?Sized>(
        &self,
        reference: &Self::State,
        action: Self::Action,
        observation: Self::Observation,
        count: usize,
        rng: &mut R,
    ) -> Vec<Self::State>;

    /// Unconditional draw from the prior, keeping the observable part of
    /// `reference`.
    fn sample_prior<R: Rng + ?Sized>(&self, reference: &Self::State, rng: &mut R) -> Self::State;
}
