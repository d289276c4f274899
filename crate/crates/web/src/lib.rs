//! Browser bindings: three small experiments returning JSON for `www/index.html`.
//!
//! The `*_json` functions are plain Rust so they run and test natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wasm_bindgen::prelude::*;

use regretlab::audit::{audit_swap_regret, AuditParams};
use regretlab::inference::{
    bidder_ceiling, counterfactual_deltas, rationalizable_set, simulate_bidder, uniform_grid, BidderSetup, Mechanism,
};
use regretlab::learners::{ew_horizon_epsilon, ftpl_horizon_epsilon, Learner, LearnerKind, LearnerState, LearningRate, OnlineLearner};
use regretlab::market::{simulate_market, FixedPriceSeller, LearningSeller, MarketConfig, Seller};
use regretlab::regret::{regret_curve, RegretMode};
use regretlab::streams::{run_full_feedback, StreamSpec};
use regretlab::{Error, Result};

const MAX_POINTS: usize = 400;

fn stream(name: &str, k: usize) -> Result<StreamSpec> {
    Ok(match name {
        "uniform" => StreamSpec::Uniform { k, h: 1.0 },
        "penalize_leader" => StreamSpec::PenalizeLeader { k, h: 1.0 },
        "penalize_last" => StreamSpec::PenalizeLast { k, h: 1.0 },
        "switching" => StreamSpec::Switching { k, h: 1.0, block: 500 },
        "ftl_trap" => StreamSpec::FtlTrap,
        _ => return Err(Error::Config(format!("unknown stream `{name}`"))),
    })
}

/// Per-round regret after each round, thinned to at most 400 points, with the
/// `2√(ln k / t)` reference curve.
pub fn regret_curve_json(learner: &str, stream_name: &str, k: usize, n: usize, seed: u64) -> Result<String> {
    if n == 0 {
        return Err(Error::Config("need at least one round".into()));
    }
    let spec = stream(stream_name, k)?;
    let mut source = spec.build()?;
    let k = source.num_actions();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l: Box<dyn Learner> = match learner {
        "ftl" => Box::new(OnlineLearner::ftl(k, 1.0)?),
        "ew" => Box::new(OnlineLearner::ew(k, 1.0, ew_horizon_epsilon(k, n))?),
        "ftpl" => {
            let s = LearnerState::new(LearnerKind::Ftpl, k, 1.0, LearningRate::Fixed(ftpl_horizon_epsilon(k, n)))?;
            Box::new(OnlineLearner::new(s, true, &mut rng)?)
        }
        _ => return Err(Error::Config(format!("unknown learner `{learner}`"))),
    };
    let log = run_full_feedback(l.as_mut(), source.as_mut(), n, &mut rng)?;
    let curve = regret_curve(&log, RegretMode::Distribution)?;
    let stride = n.div_ceil(MAX_POINTS);
    let pts: Vec<_> = curve.iter().filter(|p| p.round % stride == 0 || p.round == n).collect();
    let rounds: Vec<usize> = pts.iter().map(|p| p.round).collect();
    let regret: Vec<f64> = pts.iter().map(|p| p.regret / p.round as f64).collect();
    let bound: Vec<f64> = rounds.iter().map(|&t| 2.0 * ((k as f64).ln() / t as f64).sqrt()).collect();
    Ok(json!({ "rounds": rounds, "regret": regret, "bound": bound, "final": regret.last() }).to_string())
}

/// Simulates an EW bidder with value `value` and returns its rationalizable set.
pub fn rationalizable_json(value: f64, mechanism: &str, n: usize, grid_points: usize, seed: u64) -> Result<String> {
    let mechanism = Mechanism::parse(mechanism)?;
    let grid = uniform_grid(1.0, grid_points);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ew = OnlineLearner::ew(grid.len(), bidder_ceiling(value, 1.0), ew_horizon_epsilon(grid.len(), n.max(1)))?;
    let setup = BidderSetup { value, grid: grid.clone(), mechanism, opponents: 1, bid_max: 1.0 };
    let run = simulate_bidder(&mut ew, &setup, n, &mut rng)?;
    let set = rationalizable_set(&counterfactual_deltas(&run.auctions, 0, &grid)?, (0.0, 2.0))?;
    let measured = regretlab::regret::best_in_hindsight_regret(&run.play, RegretMode::Realized)?.per_round_regret;
    Ok(json!({
        "v_hat": set.v_hat,
        "r_hat": set.r_hat,
        "argmin": set.argmin,
        "boundary": set.boundary(201),
        "true_value": value,
        "true_value_regret": set.implied_regret(value),
        "measured_regret": measured,
    })
    .to_string())
}

/// Audits seller 1 of a duopoly (costs 0.1 and 0.2, 11 prices) against a
/// bandit swap-regret opponent. `price_index < 0` makes seller 1 a learner too.
pub fn audit_json(price_index: i32, n: usize, known_cost: bool, seed: u64) -> Result<String> {
    let config = MarketConfig::uniform_grid([0.1, 0.2], 1.0, 11, n)?;
    let mut a: Box<dyn Seller> = if price_index < 0 {
        Box::new(LearningSeller::bandit_sda(&config, 0, 0.11, 1.0)?)
    } else {
        Box::new(FixedPriceSeller::new(11, price_index as usize, 0.11)?)
    };
    let mut b = LearningSeller::bandit_sda(&config, 1, 0.11, 1.0)?;
    let log = simulate_market(&config, [a.as_mut(), &mut b], &mut ChaCha8Rng::seed_from_u64(seed))?;
    let mut params = AuditParams::new(1.0, 0.01, 0.05, 0.1);
    if known_cost {
        params = params.with_known_cost(config.costs[0]);
    }
    let report = audit_swap_regret(&log, 0, &params)?;
    Ok(json!({
        "report": report,
        "average_prices": [log.average_price(0), log.average_price(1)],
        "average_profits": [log.average_profit(0), log.average_profit(1)],
    })
    .to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = regretCurve)]
pub fn regret_curve_js(learner: &str, stream: &str, k: usize, n: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(regret_curve_json(learner, stream, k, n, seed.into()))
}

#[wasm_bindgen(js_name = rationalizableSet)]
pub fn rationalizable_js(value: f64, mechanism: &str, n: usize, grid_points: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(rationalizable_json(value, mechanism, n, grid_points, seed.into()))
}

#[wasm_bindgen(js_name = auditSeller)]
pub fn audit_js(price_index: i32, n: usize, known_cost: bool, seed: u32) -> std::result::Result<String, JsError> {
    js(audit_json(price_index, n, known_cost, seed.into()))
}
