//! Small POMDPs with exact solutions, used to check the planner against the
//! expectimax oracle.

use rand::Rng;

use super::oracle::{expectimax_oracle, ExplicitModel, OracleError, Outcome};
use crate::domain::{Action, AvsModel, AvsState, AvsWorld, GridMap, ObjectLayout, Pose, RewardConfig, VisConfig};
use crate::solver::{Belief, GenerativeModel, Planner, PomdpConfig, StepOutcome};

/// Tabular POMDP with two observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPomdp {
    pub name: &'static str,
    /// `transition[s][a][s2]`
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `observe[a][s2]`: probability of observation 1 after landing in `s2`.
    pub observe: Vec<Vec<f64>>,
    /// `reward[s][a]`
    pub reward: Vec<Vec<f64>>,
    /// Landing in a terminal state ends the episode.
    pub terminal: Vec<bool>,
    pub initial: Vec<f64>,
}

impl TabularPomdp {
    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn actions(&self) -> usize {
        self.reward[0].len()
    }

    fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.iter().rposition(|&p| p > 0.0).expect("distribution has mass")
    }

    pub fn initial_belief(&self) -> Vec<(usize, f64)> {
        self.initial.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect()
    }
}

impl GenerativeModel for TabularPomdp {
    type State = usize;
    type Action = usize;
    type Observation = u8;

    fn legal_actions(&self, _: &usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend(0..self.actions());
    }

    fn step<R: Rng + ?Sized>(&self, state: &mut usize, action: usize, rng: &mut R) -> StepOutcome<u8> {
        let reward = self.reward[*state][action];
        let next = Self::draw(&self.transition[*state][action], rng);
        let observation = u8::from(rng.gen::<f64>() < self.observe[action][next]);
        *state = next;
        StepOutcome { observation, reward, terminal: self.terminal[next] }
    }

    fn is_terminal(&self, state: &usize) -> bool {
        self.terminal[*state]
    }

    fn reward_bounds(&self) -> (f64, f64) {
        let all = self.reward.iter().flatten();
        (all.clone().copied().fold(f64::INFINITY, f64::min), all.copied().fold(f64::NEG_INFINITY, f64::max))
    }

    fn sample_consistent<R: Rng + ?Sized>(
        &self,
        _reference: &usize,
        action: usize,
        observation: u8,
        count: usize,
        rng: &mut R,
    ) -> Vec<usize> {
        let weights: Vec<f64> = self.observe[action]
            .iter()
            .zip(&self.terminal)
            .map(|(&p1, &t)| {
                if t {
                    0.0
                } else if observation == 1 {
                    p1
                } else {
                    1.0 - p1
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Vec::new();
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        (0..count).map(|_| Self::draw(&probs, rng)).collect()
    }

    fn sample_prior<R: Rng + ?Sized>(&self, _reference: &usize, rng: &mut R) -> usize {
        Self::draw(&self.initial, rng)
    }
}

impl ExplicitModel for TabularPomdp {
    type State = usize;
    type Action = usize;
    type Observation = u8;

    fn actions(&self, _: &usize) -> Vec<usize> {
        (0..TabularPomdp::actions(self)).collect()
    }

    fn outcomes(&self, s: &usize, a: usize) -> Vec<Outcome<usize, u8>> {
        let mut out = Vec::new();
        for (next, &pt) in self.transition[*s][a].iter().enumerate() {
            if pt <= 0.0 {
                continue;
            }
            let p1 = self.observe[a][next];
            for (observation, po) in [(0u8, 1.0 - p1), (1u8, p1)] {
                if po > 0.0 {
                    out.push(Outcome {
                        prob: pt * po,
                        next,
                        observation,
                        reward: self.reward[*s][a],
                        terminal: self.terminal[next],
                    });
                }
            }
        }
        out
    }
}

/// Tiger: listen (noisy) or open a door. Opening ends the episode.
pub fn tiger() -> TabularPomdp {
    // states: 0 tiger-left, 1 tiger-right, 2 done; actions: listen, open-left, open-right
    let stay = |s: usize| {
        let mut v = vec![0.0; 3];
        v[s] = 1.0;
        v
    };
    TabularPomdp {
        name: "tiger",
        transition: vec![
            vec![stay(0), stay(2), stay(2)],
            vec![stay(1), stay(2), stay(2)],
            vec![stay(2), stay(2), stay(2)],
        ],
        observe: vec![vec![0.15, 0.85, 0.0], vec![0.0; 3], vec![0.0; 3]],
        reward: vec![vec![-1.0, -100.0, 10.0], vec![-1.0, 10.0, -100.0], vec![0.0, 0.0, 0.0]],
        terminal: vec![false, false, true],
        initial: vec![0.5, 0.5, 0.0],
    }
}

/// Bet on a machine of unknown quality after optional noisy tests.
pub fn gamble() -> TabularPomdp {
    // states: 0 good, 1 bad, 2 done; actions: test, play, walk away
    TabularPomdp {
        name: "gamble",
        transition: vec![
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 0.0, 1.0]; 3],
        ],
        observe: vec![vec![0.9, 0.1, 0.0], vec![0.0; 3], vec![0.0; 3]],
        reward: vec![vec![-1.0, 20.0, 2.0], vec![-1.0, -30.0, 2.0], vec![0.0; 3]],
        terminal: vec![false, false, true],
        initial: vec![0.4, 0.6, 0.0],
    }
}

/// Three-cell line with slippery moves; only the right end pays.
pub fn slippery_line() -> TabularPomdp {
    // actions: left, right, claim (30 at the right end, -10 elsewhere; ends)
    let n = 3;
    let mut transition = vec![vec![vec![0.0; n + 1]; 3]; n + 1];
    let mut reward = vec![vec![0.0; 3]; n + 1];
    for s in 0..n {
        let l = s.saturating_sub(1);
        let r = (s + 1).min(n - 1);
        transition[s][0][l] += 0.8;
        transition[s][0][s] += 0.2;
        transition[s][1][r] += 0.8;
        transition[s][1][s] += 0.2;
        transition[s][2][n] = 1.0;
        reward[s] = vec![-1.0, -1.0, if s == n - 1 { 30.0 } else { -10.0 }];
    }
    transition[n] = vec![vec![0.0, 0.0, 0.0, 1.0]; 3];
    let beacon: Vec<f64> = (0..=n)
        .map(|s| {
            if s == n - 1 {
                0.9
            } else if s == n {
                0.0
            } else {
                0.1
            }
        })
        .collect();
    TabularPomdp {
        name: "slippery-line",
        transition,
        observe: vec![beacon.clone(), beacon, vec![0.0; n + 1]],
        reward,
        terminal: vec![false, false, false, true],
        // state n is the absorbing "claimed" state
        initial: vec![0.5, 0.5, 0.0, 0.0],
    }
}

/// Pick the better of two noisy arms; sampling costs.
pub fn two_arms() -> TabularPomdp {
    // states: 0 left-better, 1 right-better, 2 done; actions: probe, take-left, take-right
    TabularPomdp {
        name: "two-arms",
        transition: vec![
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0.0, 0.0, 1.0]; 3],
        ],
        observe: vec![vec![0.25, 0.75, 0.0], vec![0.0; 3], vec![0.0; 3]],
        reward: vec![vec![-2.0, 40.0, 5.0], vec![-2.0, 5.0, 40.0], vec![0.0; 3]],
        terminal: vec![false, false, true],
        initial: vec![0.7, 0.3, 0.0],
    }
}

/// A single dominant action: action 0 ends with a large reward, action 1
/// costs a step and leads to a dead end.
pub fn dominant() -> TabularPomdp {
    TabularPomdp {
        name: "dominant",
        transition: vec![
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0]],
            vec![vec![0.0, 0.0, 1.0]; 2],
        ],
        observe: vec![vec![0.0; 3], vec![0.0; 3]],
        reward: vec![vec![100.0, -1.0], vec![-1.0, -1.0], vec![0.0, 0.0]],
        terminal: vec![false, false, true],
        initial: vec![1.0, 0.0, 0.0],
    }
}

/// The smallest search problem: one free cell between two candidate cells,
/// eight headings and a 60 degree cone. The agent starts facing north-east,
/// one rotation from looking east and three from looking west.
pub struct CorridorToy {
    pub world: AvsWorld,
    pub layout: ObjectLayout,
    pub start: Pose,
}

impl CorridorToy {
    pub fn new() -> Self {
        let map = GridMap::from_rows(&["C.C"]).expect("static map");
        let world = AvsWorld::new(map, 8, VisConfig { fov: 60.0, max_range: 3.0 }, RewardConfig::default())
            .expect("static world");
        let layout = ObjectLayout::new(vec![crate::domain::CandidateId(0)], 0, 2).expect("static layout");
        Self { world, layout, start: Pose::new(1, 0, 1) }
    }

    pub fn model(&self) -> AvsModel<'_> {
        AvsModel::new(&self.world, &self.layout)
    }

    /// Uniform over the two cells.
    pub fn initial_belief(&self) -> Vec<(AvsState, f64)> {
        let start = self.world.graph.id_of(self.start).expect("start is free");
        (0..2u32)
            .map(|c| {
                let layout = ObjectLayout::new(vec![crate::domain::CandidateId(c)], 0, 2).expect("valid");
                (self.world.initial_state(start, layout), 0.5)
            })
            .collect()
    }
}

impl Default for CorridorToy {
    fn default() -> Self {
        Self::new()
    }
}

/// Planner settings shared by the toy checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToySettings {
    pub horizon: usize,
    pub gamma: f64,
    pub ucb_c: f64,
}

pub struct ToyInstance {
    pub name: &'static str,
    pub settings: ToySettings,
    pub kind: ToyKind,
}

#[allow(clippy::large_enum_variant)]
pub enum ToyKind {
    Tabular(TabularPomdp),
    Corridor(CorridorToy),
}

/// Outcome of one seeded planner run on a toy instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyTrial {
    pub matched: bool,
    pub root_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyReport {
    pub name: &'static str,
    pub oracle_value: f64,
    pub trials: usize,
    pub matches: usize,
    pub mean_root_value: f64,
}

impl ToyReport {
    pub fn match_rate(&self) -> f64 {
        self.matches as f64 / self.trials as f64
    }

    pub fn value_error(&self) -> f64 {
        ((self.mean_root_value - self.oracle_value) / self.oracle_value).abs()
    }
}

fn particles<S: Clone>(dist: &[(S, f64)], n: usize) -> Belief<S> {
    // deterministic proportional allocation keeps trials comparable
    let mut out = Vec::with_capacity(n);
    for (s, p) in dist {
        let k = (p * n as f64).round() as usize;
        out.extend(std::iter::repeat_n(s.clone(), k));
    }
    if out.is_empty() {
        out.push(dist[0].0.clone());
    }
    Belief::new(out).expect("non-empty")
}

fn trial<M>(
    model: &M,
    dist: &[(M::State, f64)],
    settings: ToySettings,
    n_sim: usize,
    seed: u64,
    optimal: &[M::Action],
) -> ToyTrial
where
    M: GenerativeModel,
{
    let cfg = PomdpConfig {
        gamma: settings.gamma,
        n_sim,
        ucb_c: settings.ucb_c,
        max_depth: settings.horizon,
        min_particles: 1000,
        epsilon: 0.0,
        seed,
    };
    let belief = particles(dist, 1000);
    let mut planner = Planner::new(model, cfg).expect("valid toy config");
    let action = planner.plan(&belief).expect("non-empty belief");
    ToyTrial { matched: optimal.contains(&action), root_value: planner.root_value(action).unwrap_or(0.0) }
}

impl ToyInstance {
    /// Oracle value and optimal action indices.
    pub fn oracle(&self) -> Result<(f64, Vec<usize>), OracleError> {
        let s = self.settings;
        match &self.kind {
            ToyKind::Tabular(m) => {
                let r = expectimax_oracle(m, &m.initial_belief(), s.horizon, s.gamma)?;
                Ok((r.value, r.optimal))
            }
            ToyKind::Corridor(c) => {
                let r = expectimax_oracle(&c.model(), &c.initial_belief(), s.horizon, s.gamma)?;
                Ok((r.value, r.optimal.iter().map(|a| a.index()).collect()))
            }
        }
    }

    pub fn run_trial(&self, n_sim: usize, seed: u64, optimal: &[usize]) -> ToyTrial {
        match &self.kind {
            ToyKind::Tabular(m) => trial(m, &m.initial_belief(), self.settings, n_sim, seed, optimal),
            ToyKind::Corridor(c) => {
                let opt: Vec<Action> = optimal.iter().map(|&i| Action::ALL[i]).collect();
                trial(&c.model(), &c.initial_belief(), self.settings, n_sim, seed, &opt)
            }
        }
    }

    /// `trials` seeded runs (seeds `seed..seed + trials`).
    pub fn evaluate(&self, n_sim: usize, trials: usize, seed: u64) -> Result<ToyReport, OracleError> {
        let (oracle_value, optimal) = self.oracle()?;
        let mut matches = 0;
        let mut value_sum = 0.0;
        for t in 0..trials {
            let r = self.run_trial(n_sim, seed + t as u64, &optimal);
            matches += usize::from(r.matched);
            value_sum += r.root_value;
        }
        Ok(ToyReport { name: self.name, oracle_value, trials, matches, mean_root_value: value_sum / trials as f64 })
    }
}

/// The shipped suite: five tabular problems and the corridor search.
pub fn toy_suite() -> Vec<ToyInstance> {
    let tab = |m: TabularPomdp, horizon, ucb_c| ToyInstance {
        name: m.name,
        settings: ToySettings { horizon, gamma: 0.95, ucb_c },
        kind: ToyKind::Tabular(m),
    };
    vec![
        tab(tiger(), 4, 80.0),
        tab(gamble(), 3, 20.0),
        tab(slippery_line(), 6, 40.0),
        tab(two_arms(), 3, 40.0),
        tab(dominant(), 2, 100.0),
        ToyInstance {
            name: "corridor",
            settings: ToySettings { horizon: 6, gamma: 0.95, ucb_c: 110.0 },
            kind: ToyKind::Corridor(CorridorToy::new()),
        },
    ]
}
