use super::SolverError;

/// Knobs for one planner instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PomdpConfig {
    /// Discount factor, `0 <= gamma < 1`.
    pub gamma: f64,
    /// Simulations per planning step.
    pub n_sim: usize,
    /// UCB1 exploration constant, in reward units.
    pub ucb_c: f64,
    /// Hard cap on simulation depth (tree descent plus rollout).
    pub max_depth: usize,
    /// Belief size after every update; reinvigoration tops up to this.
    pub min_particles: usize,
    /// Simulations stop once `gamma^depth` falls below this.
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for PomdpConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            n_sim: 4096,
            // half of the default find reward
            ucb_c: 50.0,
            max_depth: 60,
            min_particles: 500,
            epsilon: 0.01,
            seed: 0,
        }
    }
}

impl PomdpConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if self.n_sim == 0 {
            return bad("n_sim must be at least 1");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if self.min_particles == 0 {
            return bad("min_particles must be at least 1");
        }
        if self.ucb_c.is_nan() || self.ucb_c < 0.0 {
            return bad("ucb_c must be non-negative");
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad("epsilon must be non-negative");
        }
        Ok(())
    }

    /// True when a simulation at `depth` is still worth expanding.
    pub(crate) fn within_horizon(&self, depth: usize) -> bool {
        depth < self.max_depth && self.gamma.powi(depth as i32) >= self.epsilon
    }
}
