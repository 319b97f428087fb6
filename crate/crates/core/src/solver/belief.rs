use rand::Rng;

use super::{GenerativeModel, PomdpConfig, SolverError};

/// Unweighted particle approximation of the belief.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief<S> {
    particles: Vec<S>,
}

impl<S> Belief<S> {
    pub fn new(particles: Vec<S>) -> Result<Self, SolverError> {
        if particles.is_empty() {
            return Err(SolverError::EmptyBelief);
        }
        Ok(Self { particles })
    }

    pub fn particles(&self) -> &[S] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &S {
        &self.particles[rng.gen_range(0..self.particles.len())]
    }

    pub fn into_particles(self) -> Vec<S> {
        self.particles
    }
}

/// Rejection-filter the belief through `(action, observation)`.
///
/// Old particles are stepped in systematic order from a random offset, so a
/// single pass touches each of them once before any is repeated: a particle
/// whose simulated observation matches is never lost to resampling noise.
/// After `10 * min_particles` attempts the remainder is filled from the
/// model's prior, conditioned on the observation when the model can do so.
/// The result always holds exactly `cfg.min_particles` particles.
pub fn update_belief<M, R>(
    belief: &Belief<M::State>,
    action: M::Action,
    observation: M::Observation,
    model: &M,
    cfg: &PomdpConfig,
    rng: &mut R,
) -> Belief<M::State>
where
    M: GenerativeModel,
    R: Rng + ?Sized,
{
    let target = cfg.min_particles.max(1);
    let max_attempts = 10 * target;
    let old = belief.particles();
    let offset = rng.gen_range(0..old.len());

    let mut accepted = Vec::with_capacity(target);
    let mut reference: Option<M::State> = None;
    for attempt in 0..max_attempts {
        if accepted.len() >= target {
            break;
        }
        let mut s = old[(offset + attempt) % old.len()].clone();
        let out = model.step(&mut s, action, rng);
        if out.observation == observation {
            accepted.push(s);
        } else if reference.is_none() {
            reference = Some(s);
        }
    }

    if accepted.len() < target {
        let reference = match (accepted.first(), reference) {
            (Some(s), _) => s.clone(),
            (None, Some(s)) => s,
            (None, None) => unreachable!("at least one attempt is always made"),
        };
        let missing = target - accepted.len();
        let fresh = model.sample_consistent(&reference, action, observation, missing, rng);
        accepted.extend(fresh.into_iter().take(missing));
        while accepted.len() < target {
            accepted.push(model.sample_prior(&reference, rng));
        }
    }

    Belief { particles: accepted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::StepOutcome;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Hidden value in 0..4; observation is `value % 2` after any action.
    struct Parity;

    impl GenerativeModel for Parity {
        type State = u32;
        type Action = ();
        type Observation = u32;

        fn legal_actions(&self, _: &u32, out: &mut Vec<()>) {
            out.clear();
            out.push(());
        }

        fn step<R: Rng + ?Sized>(&self, s: &mut u32, _: (), _: &mut R) -> StepOutcome<u32> {
            StepOutcome { observation: *s % 2, reward: 0.0, terminal: false }
        }

        fn reward_bounds(&self) -> (f64, f64) {
            (0.0, 0.0)
        }

        fn sample_consistent<R: Rng + ?Sized>(&self, _: &u32, _: (), o: u32, n: usize, rng: &mut R) -> Vec<u32> {
            (0..n).map(|_| 2 * rng.gen_range(0..2) + o).collect()
        }

        fn sample_prior<R: Rng + ?Sized>(&self, _: &u32, rng: &mut R) -> u32 {
            rng.gen_range(0..4)
        }
    }

    fn cfg(n: usize) -> PomdpConfig {
        PomdpConfig { min_particles: n, ..Default::default() }
    }

    #[test]
    fn consistent_observation_preserves_particles() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = Belief::new(vec![0, 2, 2, 0]).unwrap();
        let out = update_belief(&b, (), 0, &Parity, &cfg(4), &mut rng);
        let mut p = out.into_particles();
        p.sort();
        assert_eq!(p, vec![0, 0, 2, 2]);
    }

    #[test]
    fn filters_inconsistent_particles() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = Belief::new(vec![0, 1, 2, 3]).unwrap();
        let out = update_belief(&b, (), 1, &Parity, &cfg(8), &mut rng);
        assert_eq!(out.len(), 8);
        assert!(out.particles().iter().all(|p| p % 2 == 1));
        assert!(out.particles().contains(&1) && out.particles().contains(&3));
    }

    #[test]
    fn reinvigorates_when_depleted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = Belief::new(vec![0, 2]).unwrap();
        let out = update_belief(&b, (), 1, &Parity, &cfg(16), &mut rng);
        assert_eq!(out.len(), 16);
        assert!(out.particles().iter().all(|p| p % 2 == 1));
    }

    #[test]
    fn empty_belief_is_rejected() {
        assert_eq!(Belief::<u32>::new(vec![]), Err(SolverError::EmptyBelief));
    }
}
