//! `pomp` command-line front end.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use output::{episodes_csv, summary_csv, sweep_csv, EPISODE_HEADER, SUMMARY_HEADER, SWEEP_HEADER};

use crate::harness::toy::toy_suite;
use crate::harness::{
    median, plan_step_times, run_bench, run_episode_traced, summarize, sweep_degradation, Axis, BenchConfig,
    EpisodeConfig, Phase, Policy, StepTrace, DEFAULT_RATIOS,
};
use crate::perception::DetectionSource;
use crate::scenario::{
    generate_scenario, parse_scenario, reference_suite, serialize_scenario, Difficulty, GeneratorSpec, Scenario,
};

/// Toy-suite thresholds checked by `oracle-check`.
pub const ORACLE_MATCH_RATE: f64 = 0.95;
pub const ORACLE_VALUE_ERROR: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(name = "pomp", version, about = "Active object search with an online POMCP planner")]
struct Cli {
    /// Master seed for generation and episodes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for written artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// pomp, partial-pomp or random.
    #[arg(long, global = true)]
    policy: Option<Policy>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write generated scenario files.
    Gen {
        /// easy, medium or hard; picks the preset size and clutter.
        #[arg(long, default_value = "easy")]
        difficulty: Difficulty,
        /// Number of maps, seeded seed, seed + 1, ...
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Overrides the preset map width, walls included.
        #[arg(long)]
        width: Option<usize>,
        /// Overrides the preset map height, walls included.
        #[arg(long)]
        height: Option<usize>,
        /// Overrides the number of candidate cells.
        #[arg(long)]
        candidates: Option<usize>,
        /// Overrides the number of placed objects.
        #[arg(long)]
        objects: Option<usize>,
    },
    /// Run one episode and print its result.
    Run {
        /// Scenario file to run.
        #[arg(long)]
        scenario: PathBuf,
        /// Object index to search for; defaults to the scenario's target.
        #[arg(long)]
        target: Option<usize>,
        /// Start pose name; defaults to the first one.
        #[arg(long)]
        start: Option<String>,
        /// Print every executed step.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Run the episode matrix; writes episodes.csv and summary.csv.
    Bench {
        #[command(flatten)]
        suite: SuiteArgs,
        /// Also report the median planning time per exploration step.
        #[arg(long)]
        timing: bool,
    },
    /// Degradation table over detector error ratios; writes sweep_<axis>.csv.
    Sweep {
        #[command(flatten)]
        suite: SuiteArgs,
        /// miss or fp.
        #[arg(long)]
        axis: Axis,
        /// Comma-separated error ratios; 0,0.2,0.4,0.6,0.8 when omitted.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
    },
    /// Compare the planner with the exact oracle on the toy suite.
    OracleCheck {
        #[arg(long, default_value_t = 100_000)]
        sims: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Only check the named instances.
        #[arg(long)]
        instance: Vec<String>,
    },
}

#[derive(Debug, clap::Args)]
struct SuiteArgs {
    /// Scenario files; the generated reference suite when omitted.
    #[arg(long = "scenario")]
    scenarios: Vec<PathBuf>,
    /// Generated maps per difficulty tier.
    #[arg(long)]
    per_tier: Option<usize>,
}

/// A failure after arguments parsed.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

struct Context {
    seed: u64,
    out: PathBuf,
    policy: Policy,
    config: RunConfig,
}

impl Context {
    fn bench_config(&self, suite: &[Scenario]) -> Result<BenchConfig, Failure> {
        let mut cfg = BenchConfig::reference(self.policy, self.seed);
        self.config.apply(&mut cfg, suite)?;
        Ok(cfg)
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(&self.out).map_err(|e| Failure(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        std::fs::write(&path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Parses `argv` (program name first) and runs the command, printing to
/// stdout and stderr. Returns 0 on success, 1 on a runtime failure and 2 on
/// a usage error.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`cli_dispatch`] with explicit output streams.
pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure)?,
        None => RunConfig::default(),
    };
    let policy = match (cli.policy, &config.policy) {
        (Some(p), _) => p,
        (None, Some(s)) => s.parse().map_err(Failure)?,
        (None, None) => Policy::Pomp,
    };
    let ctx = Context { seed: cli.seed.or(config.seed).unwrap_or(0), out: cli.out, policy, config };
    match cli.command {
        Command::Gen { difficulty, count, width, height, candidates, objects } => {
            for i in 0..count {
                let mut spec = GeneratorSpec::preset(difficulty, ctx.seed + i as u64);
                spec.width = width.unwrap_or(spec.width);
                spec.height = height.unwrap_or(spec.height);
                spec.candidates = candidates.unwrap_or(spec.candidates);
                spec.objects = objects.unwrap_or(spec.objects);
                let s = generate_scenario(&spec)?;
                let path = ctx.write(&format!("{}.scn", s.label()), &serialize_scenario(&s))?;
                writeln!(out, "{}", path.display())?;
            }
            Ok(0)
        }
        Command::Run { scenario, target, start, verbose } => {
            run_one(&ctx, &scenario, target, start.as_deref(), verbose, out)
        }
        Command::Bench { suite, timing } => {
            let suite = load_suite(&ctx, &suite)?;
            let cfg = ctx.bench_config(&suite)?;
            let records = run_bench(&suite, &cfg)?;
            let metrics = summarize(&records)?;
            let episodes = ctx.write("episodes.csv", &episodes_csv(&records))?;
            let summary = ctx.write("summary.csv", &summary_csv(cfg.policy, &metrics))?;
            writeln!(out, "{} {} episodes: {metrics}", cfg.policy, records.len())?;
            writeln!(out, "wrote {} and {}", episodes.display(), summary.display())?;
            if timing {
                let mut times = plan_step_times(&suite[0], &cfg, 3)?;
                match median(&mut times) {
                    Some(m) => writeln!(
                        out,
                        "median planning step on {}: {:.4} s over {} steps (n_sim {})",
                        suite[0].label(),
                        m.as_secs_f64(),
                        times.len(),
                        cfg.solver.n_sim
                    )?,
                    None => writeln!(out, "no planning steps to time")?,
                }
            }
            Ok(0)
        }
        Command::Sweep { suite, axis, ratios } => {
            let suite = load_suite(&ctx, &suite)?;
            let cfg = ctx.bench_config(&suite)?;
            let ratios = ratios.unwrap_or_else(|| DEFAULT_RATIOS.to_vec());
            let rows = sweep_degradation(&suite, &cfg, axis, &ratios)?;
            for r in &rows {
                writeln!(out, "{} {:.1}: {}", r.axis, r.ratio, r.metrics)?;
            }
            let path = ctx.write(&format!("sweep_{axis}.csv"), &sweep_csv(&rows))?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(0)
        }
        Command::OracleCheck { sims, trials, instance } => oracle_check(&ctx, sims, trials, &instance, out),
    }
}

fn read_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_suite(ctx: &Context, args: &SuiteArgs) -> Result<Vec<Scenario>, Failure> {
    if !args.scenarios.is_empty() {
        return args.scenarios.iter().map(|p| read_scenario(p)).collect();
    }
    let per_tier = args.per_tier.or(ctx.config.suite.per_tier).unwrap_or(3);
    Ok(reference_suite(per_tier, ctx.seed)?)
}

fn run_one(
    ctx: &Context,
    path: &Path,
    target: Option<usize>,
    start: Option<&str>,
    verbose: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let scenario = read_scenario(path)?;
    let world = scenario.world()?;
    let target = target.unwrap_or(scenario.target);
    let (start_name, start_pose) = match start {
        None => scenario.starts.first().cloned().ok_or_else(|| Failure("scenario has no start poses".into()))?,
        Some(name) => scenario
            .starts
            .iter()
            .find(|(n, _)| n == name)
            .cloned()
            .ok_or_else(|| Failure(format!("no start pose named {name:?}")))?,
    };
    let bench = ctx.bench_config(std::slice::from_ref(&scenario))?;
    let cfg = EpisodeConfig {
        policy: bench.policy,
        detector: bench.detector,
        solver: bench.solver,
        docking: bench.docking,
        seed: ctx.seed,
        start: world.graph.id_of(start_pose).expect("start poses are validated"),
        target,
        time_planning: false,
    };
    let mut lines = Vec::new();
    let result = run_episode_traced(&cfg, &world, &scenario.layout(), &mut |s| {
        if verbose {
            lines.push(trace_line(s));
        }
    })?;
    for l in lines {
        writeln!(out, "{l}")?;
    }
    writeln!(
        out,
        "scenario {} policy {} target {} start {} seed {}",
        scenario.label(),
        cfg.policy,
        target,
        start_name,
        ctx.seed
    )?;
    let shortest = result.shortest_length.map_or("-".to_string(), |s| s.to_string());
    writeln!(
        out,
        "success {} path_length {} exploration_length {} failure {} shortest {}",
        result.success, result.path_length, result.exploration_length, result.failure_kind, shortest
    )?;
    Ok(0)
}

fn trace_line(s: &StepTrace) -> String {
    let phase = match s.phase {
        Phase::Exploration => "explore",
        Phase::Docking => "dock",
    };
    let detection = match (s.detection.source, s.detection.estimated_cell) {
        (Some(DetectionSource::TrueTarget), Some(c)) => format!("target@{}", c.0),
        (Some(DetectionSource::FalsePositive), Some(c)) => format!("false@{}", c.0),
        _ => "-".to_string(),
    };
    format!("{phase:7} {:>4} {:11} {} {detection}", s.step, s.action.name(), s.pose)
}

fn oracle_check(
    ctx: &Context,
    sims: usize,
    trials: usize,
    only: &[String],
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let suite: Vec<_> =
        toy_suite().into_iter().filter(|t| only.is_empty() || only.iter().any(|n| n == t.name)).collect();
    if suite.is_empty() {
        return Err(Failure(format!("no toy instance named {only:?}")));
    }
    let mut all_ok = true;
    for inst in &suite {
        let r = inst.evaluate(sims, trials, ctx.seed)?;
        let ok = r.match_rate() >= ORACLE_MATCH_RATE && r.value_error() <= ORACLE_VALUE_ERROR;
        all_ok &= ok;
        writeln!(
            out,
            "{:14} optimal {:>3}/{:<3} value {:9.3} oracle {:9.3} error {:5.1}%  {}",
            r.name,
            r.matches,
            r.trials,
            r.mean_root_value,
            r.oracle_value,
            100.0 * r.value_error(),
            if ok { "ok" } else { "REGRESSION" }
        )?;
    }
    Ok(if all_ok { 0 } else { 1 })
}
