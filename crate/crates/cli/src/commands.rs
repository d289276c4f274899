//! One function per subcommand: validate the config up front, then return a
//! per-seed trial closure that writes its own artifacts.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use regretlab::audit::{audit_swap_regret, AuditParams, Verdict};
use regretlab::bandit::{bandit_run, exp3_horizon_epsilon, BanditLearner};
use regretlab::game::{best_response_dynamics, epsilon_cce, epsilon_ce, play_repeated, Player};
use regretlab::inference::{
    bidder_ceiling, counterfactual_deltas, rationalizable_set, simulate_bidder, uniform_grid, AuctionLog, BidderSetup, Mechanism,
};
use regretlab::market::{competitive_benchmark, simulate_market, MarketConfig, MarketLog};
use regretlab::regret::{best_in_hindsight_regret, regret_curve, swap_regret, RegretMode};
use regretlab::stackelberg::{run_manipulation, stackelberg_value, ManipulationSchedule, Phase};
use regretlab::streams::{run_full_feedback, PayoffSource, Replay, StreamSpec};
use regretlab::{log_io, Error, PayoffVector, PlayLog};

use crate::config::{check_market, ActionRef, GameSource, LearnerSpec, SellerSpec};

/// What one seed produced.
pub struct Trial {
    pub line: String,
    pub summary: serde_json::Value,
    /// 0 normally; 2 audit fail, 3 not auditable.
    pub code: i32,
}

pub type TrialFn = Box<dyn Fn(u64) -> anyhow::Result<Trial> + Sync>;

fn create(out: &Path, name: String) -> anyhow::Result<BufWriter<File>> {
    let path = out.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json<T: Serialize>(out: &Path, name: String, value: &T) -> anyhow::Result<()> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    Ok(())
}

fn write_curve(out: &Path, name: String, log: &PlayLog, mode: RegretMode) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(create(out, name)?);
    for p in regret_curve(log, mode)? {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Serialize)]
struct RegretSummary {
    expected_payoff: f64,
    realized_payoff: f64,
    regret: f64,
    regret_per_round: f64,
    realized_regret: f64,
    swap_regret: f64,
}

fn summarize(log: &PlayLog) -> anyhow::Result<RegretSummary> {
    let dist = best_in_hindsight_regret(log, RegretMode::Distribution)?;
    let real = best_in_hindsight_regret(log, RegretMode::Realized)?;
    let last = |mode| -> anyhow::Result<f64> { Ok(regret_curve(log, mode)?.last().map_or(0.0, |p| p.alg_payoff)) };
    Ok(RegretSummary {
        expected_payoff: last(RegretMode::Distribution)?,
        realized_payoff: last(RegretMode::Realized)?,
        regret: dist.total_regret,
        regret_per_round: dist.per_round_regret,
        realized_regret: real.total_regret,
        swap_regret: swap_regret(log, RegretMode::Distribution)?.total_regret,
    })
}

// ---- learn ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    learner: LearnerSpec,
    /// Explicit payoff table, one row per round.
    #[serde(default)]
    table: Option<Vec<Vec<f64>>>,
    #[serde(default = "one")]
    h: f64,
    #[serde(default)]
    stream: Option<StreamSpec>,
    #[serde(default)]
    horizon: Option<usize>,
}

fn one() -> f64 {
    1.0
}

pub fn learn(cfg: LearnConfig, out: PathBuf) -> anyhow::Result<TrialFn> {
    let (table, horizon) = match (&cfg.table, &cfg.stream) {
        (Some(t), None) => {
            let rows = t.iter().map(|r| PayoffVector::new(r.clone(), cfg.h)).collect::<Result<Vec<_>, _>>()?;
            Replay::new(rows.clone())?;
            let n = cfg.horizon.unwrap_or(rows.len());
            if n > rows.len() {
                bail!("horizon {n} exceeds the {} table rows", rows.len());
            }
            (Some(rows), n)
        }
        (None, Some(s)) => {
            s.build()?;
            (None, cfg.horizon.context("`horizon` is required with `stream`")?)
        }
        _ => bail!("give exactly one of `table` and `stream`"),
    };
    if horizon == 0 {
        bail!("horizon must be positive");
    }
    Ok(Box::new(move |seed| {
        let mut rng = rng(seed);
        let mut source: Box<dyn PayoffSource + Send> = match &table {
            Some(rows) => Box::new(Replay::new(rows.clone())?),
            None => cfg.stream.as_ref().expect("validated").build()?,
        };
        let mut learner = cfg.learner.build(source.num_actions(), source.ceiling(), horizon, &mut rng)?;
        let log = run_full_feedback(learner.as_mut(), source.as_mut(), horizon, &mut rng)?;
        log_io::write_csv(&log, create(&out, format!("learn_seed{seed}.csv"))?)?;
        write_curve(&out, format!("learn_seed{seed}_curve.csv"), &log, RegretMode::Distribution)?;
        let s = summarize(&log)?;
        Ok(Trial {
            line: format!(
                "seed {seed}: expected payoff {:.6}, regret {:.6} ({:.6}/round), swap regret {:.6}",
                s.expected_payoff, s.regret, s.regret_per_round, s.swap_regret
            ),
            summary: json!({ "seed": seed, "horizon": horizon, "regret": s }),
            code: 0,
        })
    }))
}

// ---- bandit ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditConfig {
    stream: StreamSpec,
    horizon: usize,
    /// Exploration; omitted: horizon-tuned.
    #[serde(default)]
    epsilon: Option<f64>,
    /// Base EW rate; omitted: equal to the exploration.
    #[serde(default)]
    learning_rate: Option<f64>,
}

pub fn bandit(cfg: BanditConfig, out: PathBuf) -> anyhow::Result<TrialFn> {
    let probe = cfg.stream.build()?;
    let (k, h) = (probe.num_actions(), probe.ceiling());
    if cfg.horizon == 0 {
        bail!("horizon must be positive");
    }
    let eps = cfg.epsilon.unwrap_or_else(|| exp3_horizon_epsilon(k, cfg.horizon));
    let lr = cfg.learning_rate.unwrap_or(eps);
    BanditLearner::exp3_with_rate(k, h, eps, lr)?;
    Ok(Box::new(move |seed| {
        let mut rng = rng(seed);
        let mut source = cfg.stream.build()?;
        let mut learner = BanditLearner::exp3_with_rate(k, h, eps, lr)?;
        let run = bandit_run(&mut learner, source.as_mut(), cfg.horizon, &mut rng)?;
        log_io::write_csv(&run.log, create(&out, format!("bandit_seed{seed}.csv"))?)?;
        write_curve(&out, format!("bandit_seed{seed}_curve.csv"), &run.truth, RegretMode::Distribution)?;
        let s = summarize(&run.truth)?;
        Ok(Trial {
            line: format!(
                "seed {seed}: regret {:.4} ({:.6}/round), realized {:.4}, exploration {eps:.4}",
                s.regret, s.regret_per_round, s.realized_regret
            ),
            summary: json!({ "seed": seed, "horizon": cfg.horizon, "exploration": eps, "learning_rate": lr, "regret": s }),
            code: 0,
        })
    }))
}

// ---- game ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    game: GameSource,
    row: LearnerSpec,
    col: LearnerSpec,
    horizon: usize,
}

pub fn game(cfg: GameConfig, base: &Path, out: PathBuf) -> anyhow::Result<TrialFn> {
    let g = cfg.game.resolve(base)?;
    if cfg.horizon == 0 {
        bail!("horizon must be positive");
    }
    Ok(Box::new(move |seed| {
        let mut rng = rng(seed);
        let (hr, hc) = (g.payoff_span(Player::Row).1, g.payoff_span(Player::Col).1);
        let mut row = cfg.row.build(g.rows(), hr, cfg.horizon, &mut rng)?;
        let mut col = cfg.col.build(g.cols(), hc, cfg.horizon, &mut rng)?;
        let run = play_repeated(&g, row.as_mut(), col.as_mut(), cfg.horizon, &mut rng)?;
        log_io::write_csv(&run.row_log, create(&out, format!("game_seed{seed}_row.csv"))?)?;
        log_io::write_csv(&run.col_log, create(&out, format!("game_seed{seed}_col.csv"))?)?;
        let cce = epsilon_cce(&g, &run.joint)?;
        let ce = epsilon_ce(&g, &run.joint)?;
        let (ir, ic) = (run.induced_joint(Player::Row)?, run.induced_joint(Player::Col)?);
        let induced = json!({
            "cce": [epsilon_cce(&g, &ir)?.row.max(0.0), epsilon_cce(&g, &ic)?.col.max(0.0)],
            "ce": [epsilon_ce(&g, &ir)?.row.max(0.0), epsilon_ce(&g, &ic)?.col.max(0.0)],
        });
        write_json(&out, format!("game_seed{seed}_joint.json"), &json!({ "joint": run.joint, "induced_row": ir, "induced_col": ic }))?;
        let (rs, cs) = (summarize(&run.row_log)?, summarize(&run.col_log)?);
        let n = cfg.horizon as f64;
        Ok(Trial {
            line: format!(
                "seed {seed}: empirical eps-CCE ({:.4}, {:.4}), eps-CE ({:.4}, {:.4}); per-round regret row {:.4} col {:.4}",
                cce.row.max(0.0),
                cce.col.max(0.0),
                ce.row.max(0.0),
                ce.col.max(0.0),
                rs.regret / n,
                cs.regret / n
            ),
            summary: json!({
                "seed": seed,
                "horizon": cfg.horizon,
                "epsilon_cce": [cce.row.max(0.0), cce.col.max(0.0)],
                "epsilon_ce": [ce.row.max(0.0), ce.col.max(0.0)],
                "induced": induced,
                "row": rs,
                "col": cs,
            }),
            code: 0,
        })
    }))
}

// ---- dynamics ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    game: GameSource,
    start: [ActionRef; 2],
    rounds: usize,
}

/// First repeated pair after the start gives the cycle.
fn find_cycle(pairs: &[(usize, usize)]) -> Option<&[(usize, usize)]> {
    for (j, p) in pairs.iter().enumerate() {
        if let Some(i) = pairs[..j].iter().position(|q| q == p) {
            return Some(&pairs[i..j]);
        }
    }
    None
}

pub fn dynamics(cfg: DynamicsConfig, base: &Path, out: PathBuf) -> anyhow::Result<TrialFn> {
    let g = cfg.game.resolve(base)?;
    let start = (cfg.start[0].resolve(g.row_labels())?, cfg.start[1].resolve(g.col_labels())?);
    let trace = best_response_dynamics(&g, start, cfg.rounds)?;
    let name = move |p: &(usize, usize)| format!("({},{})", g.row_labels()[p.0], g.col_labels()[p.1]);
    // Listed from the step after the start, so a cycle through the start ends with it.
    let cycle = find_cycle(&trace.pairs).map(|c| {
        let mut c: Vec<String> = c.iter().map(&name).collect();
        if let Some(i) = c.iter().position(|p| *p == name(&start)) {
            c.rotate_left(i + 1);
        }
        c
    });
    let rows: Vec<(usize, String, String)> = trace
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s = name(p);
            let (r, c) = s[1..s.len() - 1].split_once(',').expect("formatted pair");
            (i, r.to_string(), c.to_string())
        })
        .collect();
    let start_name = name(&start);
    Ok(Box::new(move |seed| {
        let mut w = csv::Writer::from_writer(create(&out, format!("dynamics_seed{seed}.csv"))?);
        w.write_record(["step", "row", "col"])?;
        for (i, r, c) in &rows {
            w.write_record([i.to_string(), r.clone(), c.clone()])?;
        }
        w.flush()?;
        let line = match &cycle {
            Some(c) => format!("seed {seed}: from {start_name}: {} repeating (cycle length {})", c.join(" "), c.len()),
            None => format!("seed {seed}: no repeat within {} steps", rows.len()),
        };
        Ok(Trial { line, summary: json!({ "seed": seed, "steps": rows.len(), "cycle": cycle }), code: 0 })
    }))
}

// ---- manipulate ----

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Pure `first` for half the rounds, then pure `second`.
    Switch {
        first: ActionRef,
        second: ActionRef,
    },
    /// The leader's Stackelberg strategy every round.
    Stackelberg,
    Phases {
        phases: Vec<Phase>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulateConfig {
    game: GameSource,
    schedule: ScheduleSpec,
    follower: LearnerSpec,
    horizon: usize,
}

pub fn manipulate(cfg: ManipulateConfig, base: &Path, out: PathBuf) -> anyhow::Result<TrialFn> {
    let g = cfg.game.resolve(base)?;
    let schedule = match &cfg.schedule {
        ScheduleSpec::Switch { first, second } => {
            ManipulationSchedule::switch(g.rows(), first.resolve(g.row_labels())?, second.resolve(g.row_labels())?)
        }
        ScheduleSpec::Stackelberg => ManipulationSchedule::constant(&stackelberg_value(&g)?.strategy),
        ScheduleSpec::Phases { phases } => ManipulationSchedule::new(phases.clone())?,
    };
    if cfg.horizon == 0 {
        bail!("horizon must be positive");
    }
    Ok(Box::new(move |seed| {
        let mut rng = rng(seed);
        let span = g.payoff_span(Player::Col).1;
        let mut follower = cfg.follower.build(g.cols(), span, cfg.horizon, &mut rng)?;
        let run = run_manipulation(&g, &schedule, follower.as_mut(), cfg.horizon, &mut rng)?;
        log_io::write_csv(&run.follower_log, create(&out, format!("manipulate_seed{seed}_follower.csv"))?)?;
        let r = &run.report;
        write_json(&out, format!("manipulate_seed{seed}.json"), r)?;
        Ok(Trial {
            line: format!(
                "seed {seed}: leader {:.4}/round (tail {:.4}), SV {:.4}, follower swap regret {:.5}, SV + C*r {:.4}",
                r.leader_avg,
                r.leader_tail_avg,
                r.sv,
                r.follower_swap_regret,
                r.swap_ceiling()
            ),
            summary: json!({ "seed": seed, "report": r, "swap_ceiling": r.swap_ceiling() }),
            code: 0,
        })
    }))
}

// ---- infer ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBidderConfig {
    value: f64,
    mechanism: Mechanism,
    #[serde(default = "one_opponent")]
    opponents: usize,
    horizon: usize,
    learner: LearnerSpec,
}

fn one_opponent() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferConfig {
    bid_max: f64,
    grid_points: usize,
    value_range: (f64, f64),
    #[serde(default)]
    bidder: usize,
    /// Auction log CSV to analyse.
    #[serde(default)]
    log: Option<String>,
    /// Or simulate a learning bidder.
    #[serde(default)]
    simulate: Option<SimulateBidderConfig>,
    #[serde(default = "boundary_points")]
    boundary_points: usize,
}

fn boundary_points() -> usize {
    201
}

pub fn infer(cfg: InferConfig, base: &Path, out: PathBuf) -> anyhow::Result<TrialFn> {
    let grid = uniform_grid(cfg.bid_max, cfg.grid_points);
    let fixed_log = match (&cfg.log, &cfg.simulate) {
        (Some(p), None) => {
            let path = base.join(p);
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let log = AuctionLog::read_csv(file, cfg.bid_max).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            if cfg.bidder >= log.bidders() {
                bail!("bidder {} not in a {}-bidder log", cfg.bidder, log.bidders());
            }
            Some(log)
        }
        (None, Some(s)) => {
            if s.horizon == 0 || s.opponents == 0 {
                bail!("simulation needs a positive horizon and at least one opponent");
            }
            if cfg.bidder != 0 {
                bail!("the simulated learner is bidder 0");
            }
            None
        }
        _ => bail!("give exactly one of `log` and `simulate`"),
    };
    if !(cfg.value_range.0 <= cfg.value_range.1) {
        bail!("value_range must satisfy lo <= hi");
    }
    Ok(Box::new(move |seed| {
        let mut extra = serde_json::Map::new();
        let log = match (&fixed_log, &cfg.simulate) {
            (Some(l), _) => l.clone(),
            (None, Some(s)) => {
                let mut rng = rng(seed);
                let h = bidder_ceiling(s.value, cfg.bid_max);
                let mut learner = s.learner.build(grid.len(), h, s.horizon, &mut rng)?;
                let setup = BidderSetup {
                    value: s.value,
                    grid: grid.clone(),
                    mechanism: s.mechanism,
                    opponents: s.opponents,
                    bid_max: cfg.bid_max,
                };
                let run = simulate_bidder(learner.as_mut(), &setup, s.horizon, &mut rng)?;
                run.auctions.write_csv(create(&out, format!("infer_seed{seed}_auctions.csv"))?)?;
                let measured = best_in_hindsight_regret(&run.play, RegretMode::Realized)?.per_round_regret;
                extra.insert("true_value".into(), json!(s.value));
                extra.insert("measured_regret".into(), json!(measured));
                run.auctions
            }
            (None, None) => unreachable!("validated"),
        };
        let set = rationalizable_set(&counterfactual_deltas(&log, cfg.bidder, &grid)?, cfg.value_range)?;
        write_json(&out, format!("infer_seed{seed}.json"), &set)?;
        let mut w = csv::Writer::from_writer(create(&out, format!("infer_seed{seed}_boundary.csv"))?);
        w.write_record(["value", "regret"])?;
        for (v, r) in set.boundary(cfg.boundary_points) {
            w.write_record([v.to_string(), r.to_string()])?;
        }
        w.flush()?;
        let mut line =
            format!("seed {seed}: v_hat {:.4}, r_hat {:.5}, argmin [{:.4}, {:.4}]", set.v_hat, set.r_hat, set.argmin.0, set.argmin.1);
        if let (Some(v), Some(m)) = (extra.get("true_value"), extra.get("measured_regret")) {
            let v = v.as_f64().unwrap_or_default();
            line += &format!("; true value {v} has r {:.5} vs measured {:.5}", set.implied_regret(v), m.as_f64().unwrap_or_default());
        }
        let mut summary = json!({ "seed": seed, "rounds": log.rounds(), "v_hat": set.v_hat, "r_hat": set.r_hat, "argmin": set.argmin });
        summary.as_object_mut().expect("object").extend(extra);
        Ok(Trial { line, summary, code: 0 })
    }))
}

// ---- audit ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    market: MarketConfig,
    params: AuditParams,
    /// Seller under audit.
    #[serde(default)]
    seller: usize,
    /// Market log CSV to audit.
    #[serde(default)]
    log: Option<String>,
    /// Or simulate these two sellers.
    #[serde(default)]
    sellers: Option<[SellerSpec; 2]>,
}

pub fn audit(cfg: AuditConfig, base: &Path, out: PathBuf) -> anyhow::Result<TrialFn> {
    cfg.market.validate()?;
    cfg.params.validate()?;
    if cfg.seller > 1 {
        bail!("seller must be 0 or 1");
    }
    let k = cfg.market.num_prices();
    let fixed_log = match (&cfg.log, &cfg.sellers) {
        (Some(p), None) => {
            let path = base.join(p);
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            Some(MarketLog::read_csv(file, cfg.market.prices.clone()).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?)
        }
        (None, Some(specs)) => {
            check_market(&cfg.market)?;
            for (j, s) in specs.iter().enumerate() {
                s.build(&cfg.market, j)?;
            }
            let need = cfg.params.required_rounds(k);
            if cfg.market.horizon < need {
                log::warn!("horizon {} is below the {need} rounds the audit guarantee needs", cfg.market.horizon);
            }
            None
        }
        _ => bail!("give exactly one of `log` and `sellers`"),
    };
    Ok(Box::new(move |seed| {
        let log = match &fixed_log {
            Some(l) => l.clone(),
            None => {
                let specs = cfg.sellers.as_ref().expect("validated");
                let (mut a, mut b) = (specs[0].build(&cfg.market, 0)?, specs[1].build(&cfg.market, 1)?);
                let log = simulate_market(&cfg.market, [a.as_mut(), b.as_mut()], &mut rng(seed))?;
                log.write_csv(create(&out, format!("audit_seed{seed}_market.csv"))?)?;
                log
            }
        };
        match audit_swap_regret(&log, cfg.seller, &cfg.params) {
            Ok(report) => {
                write_json(&out, format!("audit_seed{seed}.json"), &report)?;
                let pass = report.verdict == Verdict::Pass;
                Ok(Trial {
                    line: format!(
                        "seed {seed}: {} swap regret {:.5} {} threshold {:.4} (cost {:.3}, radius {:.4}, {} of {} rounds required)",
                        if pass { "PASS" } else { "FAIL" },
                        report.swap_regret,
                        if pass { "<=" } else { ">" },
                        report.threshold,
                        report.inferred_cost,
                        report.radius,
                        report.required_rounds,
                        log.len()
                    ),
                    summary: json!({ "seed": seed, "report": report }),
                    code: if pass { 0 } else { 2 },
                })
            }
            Err(Error::NotAuditable(why)) => {
                write_json(&out, format!("audit_seed{seed}.json"), &json!({ "verdict": "not_auditable", "reason": why }))?;
                Ok(Trial {
                    line: format!("seed {seed}: NOT AUDITABLE: {why}"),
                    summary: json!({ "seed": seed, "verdict": "not_auditable", "reason": why }),
                    code: 3,
                })
            }
            Err(e) => Err(e.into()),
        }
    }))
}

// ---- benchmark ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    market: MarketConfig,
    sellers: [SellerSpec; 2],
}

pub fn benchmark(cfg: BenchmarkConfig, out: PathBuf) -> anyhow::Result<TrialFn> {
    check_market(&cfg.market)?;
    for (j, s) in cfg.sellers.iter().enumerate() {
        s.build(&cfg.market, j)?;
    }
    let bench = competitive_benchmark(&cfg.market)?;
    Ok(Box::new(move |seed| {
        let (mut a, mut b) = (cfg.sellers[0].build(&cfg.market, 0)?, cfg.sellers[1].build(&cfg.market, 1)?);
        let log = simulate_market(&cfg.market, [a.as_mut(), b.as_mut()], &mut rng(seed))?;
        log.write_csv(create(&out, format!("benchmark_seed{seed}_market.csv"))?)?;
        let prices = [log.average_price(0), log.average_price(1)];
        let profits = [log.average_profit(0), log.average_profit(1)];
        let joint = |p: &[f64; 2]| p[0] + p[1];
        let (pn, pm) = (joint(&bench.competitive.profits), joint(&bench.collusive.profits));
        // 0 at the competitive point, 1 at the joint-profit optimum.
        let index = if pm > pn { (joint(&profits) - pn) / (pm - pn) } else { f64::NAN };
        let summary = json!({
            "seed": seed,
            "average_prices": prices,
            "average_profits": profits,
            "sale_frequency": log.sale_frequency(),
            "profit_index": index,
            "benchmark": bench,
        });
        write_json(&out, format!("benchmark_seed{seed}.json"), &summary)?;
        Ok(Trial {
            line: format!(
                "seed {seed}: average prices ({:.3}, {:.3}), profits ({:.4}, {:.4}), profit index {index:.3}; competitive {:?}, collusive {:?}",
                prices[0], prices[1], profits[0], profits[1], bench.competitive.prices, bench.collusive.prices
            ),
            summary,
            code: 0,
        })
    }))
}
