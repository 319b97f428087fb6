use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    compute_metrics, run_episode, run_episode_traced, EpisodeConfig, EpisodeResult, HarnessError, MetricsSummary,
    Policy,
};
use crate::docking::DockingConfig;
use crate::domain::AvsWorld;
use crate::perception::DetectorProfile;
use crate::scenario::Scenario;
use crate::solver::PomdpConfig;

/// Episodes per map: the first `targets` objects, each from the first
/// `starts` start poses, repeated `repeats` times with fresh seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunMatrix {
    pub targets: usize,
    pub starts: usize,
    pub repeats: usize,
}

impl Default for RunMatrix {
    fn default() -> Self {
        Self { targets: 5, starts: 20, repeats: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub policy: Policy,
    pub detector: DetectorProfile,
    pub solver: PomdpConfig,
    pub docking: DockingConfig,
    pub matrix: RunMatrix,
    pub seed: u64,
}

impl BenchConfig {
    pub fn new(policy: Policy, seed: u64) -> Self {
        Self {
            policy,
            detector: DetectorProfile::PERFECT,
            solver: PomdpConfig::default(),
            docking: DockingConfig::default(),
            matrix: RunMatrix::default(),
            seed,
        }
    }

    /// [`BenchConfig::new`] with [`reference_solver`] settings.
    pub fn reference(policy: Policy, seed: u64) -> Self {
        Self { solver: reference_solver(), ..Self::new(policy, seed) }
    }
}

/// Planner settings for reference-suite runs. A shorter horizon and a larger
/// exploration constant than the solver defaults: long uniform rollouts on
/// these maps are dominated by revisit penalties.
pub fn reference_solver() -> PomdpConfig {
    PomdpConfig { max_depth: 40, ucb_c: 200.0, ..PomdpConfig::default() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub scenario: String,
    pub policy: Policy,
    pub target: usize,
    pub start: String,
    pub seed: u64,
    pub result: EpisodeResult,
}

/// Seed of the `index`-th episode under `master`: the first word of its own
/// ChaCha stream.
pub fn episode_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

struct Job {
    map: usize,
    target: usize,
    start: usize,
    seed: u64,
}

fn jobs(suite: &[Scenario], matrix: &RunMatrix, master: u64) -> Vec<Job> {
    let mut out = Vec::new();
    for (map, s) in suite.iter().enumerate() {
        for target in 0..matrix.targets.min(s.objects.len()) {
            for start in 0..matrix.starts.min(s.starts.len()) {
                for _ in 0..matrix.repeats {
                    let seed = episode_seed(master, out.len() as u64);
                    out.push(Job { map, target, start, seed });
                }
            }
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn map_jobs<T: Send, F: Fn(&Job) -> T + Sync + Send>(jobs: &[Job], f: F) -> Vec<T> {
    use rayon::prelude::*;
    jobs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<T, F: Fn(&Job) -> T>(jobs: &[Job], f: F) -> Vec<T> {
    jobs.iter().map(f).collect()
}

pub fn build_worlds(suite: &[Scenario]) -> Result<Vec<AvsWorld>, HarnessError> {
    suite.iter().map(|s| s.world().map_err(HarnessError::from)).collect()
}

fn episode_config(cfg: &BenchConfig, world: &AvsWorld, scenario: &Scenario, job: &Job) -> EpisodeConfig {
    let start = world.graph.id_of(scenario.starts[job.start].1).expect("start poses are validated");
    EpisodeConfig {
        policy: cfg.policy,
        detector: cfg.detector,
        solver: cfg.solver,
        docking: cfg.docking,
        seed: job.seed,
        start,
        target: job.target,
        time_planning: false,
    }
}

/// Runs the whole matrix. Records come back in matrix order whatever the
/// degree of parallelism.
pub fn run_bench(suite: &[Scenario], cfg: &BenchConfig) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let worlds = build_worlds(suite)?;
    run_bench_on(suite, &worlds, cfg)
}

/// [`run_bench`] with prebuilt worlds (one per scenario).
pub fn run_bench_on(
    suite: &[Scenario],
    worlds: &[AvsWorld],
    cfg: &BenchConfig,
) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let jobs = jobs(suite, &cfg.matrix, cfg.seed);
    let results = map_jobs(&jobs, |job| {
        let (s, w) = (&suite[job.map], &worlds[job.map]);
        run_episode(&episode_config(cfg, w, s, job), w, &s.layout()).map(|result| EpisodeRecord {
            scenario: s.label(),
            policy: cfg.policy,
            target: job.target,
            start: s.starts[job.start].0.clone(),
            seed: job.seed,
            result,
        })
    });
    results.into_iter().collect()
}

pub fn summarize(records: &[EpisodeRecord]) -> Result<MetricsSummary, HarnessError> {
    let results: Vec<EpisodeResult> = records.iter().map(|r| r.result.clone()).collect();
    compute_metrics(&results)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Miss,
    FalsePositive,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Miss => "miss",
            Axis::FalsePositive => "fp",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "miss" => Ok(Axis::Miss),
            "fp" => Ok(Axis::FalsePositive),
            _ => Err(format!("unknown axis {s:?} (expected miss or fp)")),
        }
    }
}

pub const DEFAULT_RATIOS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: Axis,
    pub ratio: f64,
    pub metrics: MetricsSummary,
}

/// The full matrix at each ratio on `axis`, the other rate held at zero.
/// Every ratio reuses the same episode seeds, so rows differ only through
/// the detector.
pub fn sweep_degradation(
    suite: &[Scenario],
    base: &BenchConfig,
    axis: Axis,
    ratios: &[f64],
) -> Result<Vec<SweepRow>, HarnessError> {
    let worlds = build_worlds(suite)?;
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(HarnessError::Config(format!("ratio {ratio} outside [0, 1]")));
        }
        let detector = match axis {
            Axis::Miss => DetectorProfile { miss_rate: ratio, fp_rate: 0.0, ..base.detector },
            Axis::FalsePositive => DetectorProfile { miss_rate: 0.0, fp_rate: ratio, ..base.detector },
        };
        let cfg = BenchConfig { detector, ..base.clone() };
        let records = run_bench_on(suite, &worlds, &cfg)?;
        rows.push(SweepRow { axis, ratio, metrics: summarize(&records)? });
    }
    Ok(rows)
}

/// Wall-clock planning time of every exploration step over `episodes`
/// matrix entries of the first scenario.
pub fn plan_step_times(scenario: &Scenario, cfg: &BenchConfig, episodes: usize) -> Result<Vec<Duration>, HarnessError> {
    let world = scenario.world()?;
    let suite = std::slice::from_ref(scenario);
    let mut times = Vec::new();
    for job in jobs(suite, &cfg.matrix, cfg.seed).iter().take(episodes) {
        let mut ecfg = episode_config(cfg, &world, scenario, job);
        ecfg.time_planning = true;
        run_episode_traced(&ecfg, &world, &scenario.layout(), &mut |s| times.extend(s.plan_time))?;
    }
    Ok(times)
}

pub fn median(times: &mut [Duration]) -> Option<Duration> {
    if times.is_empty() {
        return None;
    }
    times.sort_unstable();
    Some(times[times.len() / 2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, Difficulty, GeneratorSpec};

    fn tiny_suite() -> Vec<Scenario> {
        (0..2)
            .map(|seed| {
                let mut spec = GeneratorSpec::new(Difficulty::Easy, 8, 8, 4, 2, seed);
                spec.starts = 3;
                generate_scenario(&spec).unwrap()
            })
            .collect()
    }

    fn quick(policy: Policy) -> BenchConfig {
        let mut cfg = BenchConfig::new(policy, 42);
        cfg.solver.n_sim = 64;
        cfg.solver.min_particles = 50;
        cfg.matrix = RunMatrix { targets: 2, starts: 3, repeats: 2 };
        cfg
    }

    #[test]
    fn matrix_shape_and_order() {
        let suite = tiny_suite();
        let records = run_bench(&suite, &quick(Policy::RandomWalk)).unwrap();
        assert_eq!(records.len(), 2 * 2 * 3 * 2);
        assert_eq!(records[0].scenario, suite[0].label());
        assert_eq!((records[0].target, records[0].start.as_str()), (0, "s0"));
        assert_eq!(records[1].start, "s0");
        assert_eq!(records[2].start, "s1");
        assert_ne!(records[0].seed, records[1].seed);
    }

    #[test]
    fn bench_is_a_pure_function_of_its_inputs() {
        let suite = tiny_suite();
        let a = run_bench(&suite, &quick(Policy::Pomp)).unwrap();
        let b = run_bench(&suite, &quick(Policy::Pomp)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_are_distinct_streams() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| episode_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(episode_seed(7, 3), episode_seed(7, 3));
        assert_ne!(episode_seed(7, 3), episode_seed(8, 3));
    }

    #[test]
    fn zero_ratio_equals_clean_bench() {
        let suite = tiny_suite();
        let cfg = quick(Policy::Pomp);
        let clean = summarize(&run_bench(&suite, &cfg).unwrap()).unwrap();
        let rows = sweep_degradation(&suite, &cfg, Axis::Miss, &[0.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].metrics, clean);
    }

    #[test]
    fn certain_misses_never_succeed() {
        let suite = tiny_suite();
        let rows = sweep_degradation(&suite, &quick(Policy::RandomWalk), Axis::Miss, &[1.0]).unwrap();
        assert_eq!(rows[0].metrics.sr, 0.0);
        assert!(sweep_degradation(&suite, &quick(Policy::RandomWalk), Axis::Miss, &[1.5]).is_err());
    }

    #[test]
    fn timing_collects_exploration_steps() {
        let suite = tiny_suite();
        let mut times = plan_step_times(&suite[0], &quick(Policy::Pomp), 2).unwrap();
        let m = median(&mut times);
        assert_eq!(m.is_some(), !times.is_empty());
        assert_eq!(median(&mut []), None);
    }
}
