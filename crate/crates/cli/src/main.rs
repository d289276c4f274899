//! `regretlab`: batch experiments over seeds, one artifact set per seed.
//!
//! Exit codes: 0 ok, 1 bad config or run error, 2 an audit failed,
//! 3 a log was not auditable.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{Trial, TrialFn};

#[derive(Parser, Debug)]
#[command(name = "regretlab", version, about = "No-regret learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CommandKind {
    Learn,
    Bandit,
    Game,
    Dynamics,
    Manipulate,
    Infer,
    Audit,
    Benchmark,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// JSON config for the subcommand.
    #[arg(long)]
    config: PathBuf,
    /// Seeds, e.g. `0,1,5` or `0..10`; overrides the config's `seeds`.
    #[arg(long)]
    seeds: Option<String>,
    /// Artifact directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full-feedback learner against a payoff table or stream.
    Learn(RunArgs),
    /// Exp3 against a stream under bandit feedback.
    Bandit(RunArgs),
    /// Two learners in a repeated bimatrix game; CE/CCE certificates.
    Game(RunArgs),
    /// Best-response dynamics from a starting pair.
    Dynamics(RunArgs),
    /// Scheduled leader against a learning follower.
    Manipulate(RunArgs),
    /// Rationalizable (value, regret) set from an auction log.
    Infer(RunArgs),
    /// Swap-regret audit of a pricing seller.
    Audit(RunArgs),
    /// Duopoly simulation against the competitive and collusive benchmarks.
    Benchmark(RunArgs),
}

impl Command {
    fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Learn(a) => (CommandKind::Learn, a),
            Command::Bandit(a) => (CommandKind::Bandit, a),
            Command::Game(a) => (CommandKind::Game, a),
            Command::Dynamics(a) => (CommandKind::Dynamics, a),
            Command::Manipulate(a) => (CommandKind::Manipulate, a),
            Command::Infer(a) => (CommandKind::Infer, a),
            Command::Audit(a) => (CommandKind::Audit, a),
            Command::Benchmark(a) => (CommandKind::Benchmark, a),
        }
    }
}

fn parse_seeds(s: &str) -> anyhow::Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().context("bad seed range start")?, b.parse().context("bad seed range end")?);
                seeds.extend(a..b);
            }
            None => seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?),
        }
    }
    Ok(seeds)
}

fn name(kind: CommandKind) -> &'static str {
    match kind {
        CommandKind::Learn => "learn",
        CommandKind::Bandit => "bandit",
        CommandKind::Game => "game",
        CommandKind::Dynamics => "dynamics",
        CommandKind::Manipulate => "manipulate",
        CommandKind::Infer => "infer",
        CommandKind::Audit => "audit",
        CommandKind::Benchmark => "benchmark",
    }
}

/// Parses and validates the config, returning the seeds and the trial closure.
fn prepare(kind: CommandKind, args: &RunArgs) -> anyhow::Result<(Vec<u64>, TrialFn)> {
    fn go<T: serde::de::DeserializeOwned>(
        args: &RunArgs,
        build: impl FnOnce(T, &Path, PathBuf) -> anyhow::Result<TrialFn>,
    ) -> anyhow::Result<(Vec<u64>, TrialFn)> {
        let loaded = config::load::<T>(&args.config)?;
        let seeds = match &args.seeds {
            Some(s) => parse_seeds(s)?,
            None => loaded.seeds.clone().unwrap_or_default(),
        };
        if seeds.is_empty() {
            bail!("no seeds: pass --seeds or list `seeds` in the config");
        }
        let f = build(loaded.config, &loaded.base, args.out.clone())?;
        Ok((seeds, f))
    }
    match kind {
        CommandKind::Learn => go(args, |c, _, o| commands::learn(c, o)),
        CommandKind::Bandit => go(args, |c, _, o| commands::bandit(c, o)),
        CommandKind::Game => go(args, commands::game),
        CommandKind::Dynamics => go(args, commands::dynamics),
        CommandKind::Manipulate => go(args, commands::manipulate),
        CommandKind::Infer => go(args, commands::infer),
        CommandKind::Audit => go(args, commands::audit),
        CommandKind::Benchmark => go(args, |c, _, o| commands::benchmark(c, o)),
    }
}

/// Runs every seed on a pool of `jobs` threads; results come back in seed order.
fn run_pool(seeds: &[u64], jobs: usize, f: &TrialFn) -> Vec<anyhow::Result<Trial>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<anyhow::Result<Trial>>>> = Mutex::new((0..seeds.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, seeds.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                log::debug!("starting seed {}", seeds[i]);
                let r = f(seeds[i]);
                slots.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("pool finished").into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REGRETLAB_LOG", "warn")).init();
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let (seeds, trial) = match prepare(kind, &args) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: creating {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    log::info!("{} over {} seeds with {} jobs", name(kind), seeds.len(), args.jobs);
    let results = run_pool(&seeds, args.jobs, &trial);
    let mut code = 0;
    let mut failed = false;
    let mut summaries = Vec::new();
    for (seed, r) in seeds.iter().zip(results) {
        match r {
            Ok(t) => {
                println!("{}", t.line);
                code = code.max(t.code);
                summaries.push(t.summary);
            }
            Err(e) => {
                eprintln!("seed {seed}: error: {e:#}");
                failed = true;
                summaries.push(json!({ "seed": seed, "error": format!("{e:#}") }));
            }
        }
    }
    let summary = json!({ "command": name(kind), "seeds": seeds, "trials": summaries });
    let path = args.out.join(format!("{}_summary.json", name(kind)));
    let written = std::fs::File::create(&path)
        .map_err(anyhow::Error::from)
        .and_then(|f| serde_json::to_writer_pretty(std::io::BufWriter::new(f), &summary).map_err(Into::into));
    if let Err(e) = written {
        eprintln!("error: writing {}: {e:#}", path.display());
        failed = true;
    }
    // A run error outranks an audit outcome.
    ExitCode::from(if failed { 1 } else { code as u8 })
}
