//! Config schemas shared by the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rand_chacha::rand_core::RngCore;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use regretlab::game::BimatrixGame;
use regretlab::learners::{ew_horizon_epsilon, ftpl_horizon_epsilon, Learner, LearnerKind, LearnerState, LearningRate, OnlineLearner};
use regretlab::market::{FixedPriceSeller, GrimTriggerSeller, LearningSeller, MarketConfig, Seller};
use regretlab::stackelberg::{manipulation_game, slow_rate_game};
use regretlab::swap::Sda;

/// A parsed config file plus the directory its relative paths resolve against.
pub struct Loaded<T> {
    pub config: T,
    pub seeds: Option<Vec<u64>>,
    pub base: PathBuf,
}

/// Reads `path`, splits off the optional `seeds` list and deserializes the rest.
pub fn load<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Loaded<T>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("{}: not valid JSON", path.display()))?;
    let seeds = match value.as_object_mut().and_then(|m| m.remove("seeds")) {
        Some(s) => Some(serde_json::from_value(s).with_context(|| format!("{}: `seeds` must be a list of integers", path.display()))?),
        None => None,
    };
    let config = serde_json::from_value(value).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, seeds, base })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerChoice {
    Ftl,
    Ew,
    Ftpl,
    Sda,
}

/// A learner whose action count and payoff ceiling come from its context.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub kind: LearnerChoice,
    /// Omitted: tuned to the horizon.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// FTPL only: redraw hallucinations every round.
    #[serde(default)]
    pub rerandomize: bool,
}

impl LearnerSpec {
    pub fn build(&self, k: usize, h: f64, horizon: usize, rng: &mut dyn RngCore) -> anyhow::Result<Box<dyn Learner + Send>> {
        let ew_eps = self.epsilon.unwrap_or_else(|| ew_horizon_epsilon(k, horizon));
        Ok(match self.kind {
            LearnerChoice::Ftl => Box::new(OnlineLearner::ftl(k, h)?),
            LearnerChoice::Ew => Box::new(OnlineLearner::ew(k, h, ew_eps)?),
            LearnerChoice::Ftpl => {
                let eps = self.epsilon.unwrap_or_else(|| ftpl_horizon_epsilon(k, horizon));
                let state = LearnerState::new(LearnerKind::Ftpl, k, h, LearningRate::Fixed(eps))?;
                Box::new(OnlineLearner::new(state, self.rerandomize, rng)?)
            }
            LearnerChoice::Sda => match self.epsilon {
                Some(eps) => Box::new(Sda::ew(k, h, eps)?),
                None => Box::new(Sda::ew_for_horizon(k, h, horizon)?),
            },
        })
    }
}

/// A game file path, a `builtin:` name, or an inline game.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GameSource {
    Name(String),
    Inline(BimatrixGame),
}

impl GameSource {
    pub fn resolve(&self, base: &Path) -> anyhow::Result<BimatrixGame> {
        match self {
            GameSource::Inline(g) => Ok(g.clone()),
            GameSource::Name(name) => match name.strip_prefix("builtin:") {
                Some(b) => builtin_game(b),
                None => {
                    let path = base.join(name);
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading game {}", path.display()))?;
                    serde_json::from_str(&text).map_err(|e| anyhow!("game {}: {e}", path.display()))
                }
            },
        }
    }
}

fn builtin_game(name: &str) -> anyhow::Result<BimatrixGame> {
    let param = |s: &str| -> anyhow::Result<f64> { s.parse().map_err(|_| anyhow!("bad parameter `{s}` in builtin game `{name}`")) };
    Ok(match name.split_once(':') {
        None if name == "no_tie_rps" => BimatrixGame::no_tie_rps(),
        None if name == "matching_pennies" => BimatrixGame::matching_pennies(),
        Some(("manipulation", eps)) => manipulation_game(param(eps)?)?,
        Some(("slow_rate", eps)) => slow_rate_game(param(eps)?)?,
        _ => bail!("unknown builtin game `{name}` (known: no_tie_rps, matching_pennies, manipulation:EPS, slow_rate:EPS)"),
    })
}

/// An action given by index or label.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ActionRef {
    Index(usize),
    Label(String),
}

impl ActionRef {
    pub fn resolve(&self, labels: &[String]) -> anyhow::Result<usize> {
        match self {
            ActionRef::Index(i) if *i < labels.len() => Ok(*i),
            ActionRef::Index(i) => bail!("action index {i} out of range (game has {} actions)", labels.len()),
            ActionRef::Label(l) => {
                labels.iter().position(|x| x == l).ok_or_else(|| anyhow!("no action labelled `{l}` (labels: {labels:?})"))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SellerSpec {
    /// Bandit-feedback swap-regret learner over the price grid.
    BanditSda {
        exploration: f64,
        #[serde(default = "one")]
        learning_rate: f64,
    },
    Fixed {
        price_index: usize,
        exploration: f64,
    },
    GrimTrigger {
        high: usize,
        punish: usize,
        exploration: f64,
        window: usize,
        min_share: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SellerSpec {
    pub fn build(&self, market: &MarketConfig, j: usize) -> anyhow::Result<Box<dyn Seller>> {
        let k = market.num_prices();
        Ok(match *self {
            SellerSpec::BanditSda { exploration, learning_rate } => {
                Box::new(LearningSeller::bandit_sda(market, j, exploration, learning_rate)?)
            }
            SellerSpec::Fixed { price_index, exploration } => Box::new(FixedPriceSeller::new(k, price_index, exploration)?),
            SellerSpec::GrimTrigger { high, punish, exploration, window, min_share } => {
                Box::new(GrimTriggerSeller::new(k, high, punish, exploration, window, min_share)?)
            }
        })
    }
}

pub fn check_market(market: &MarketConfig) -> anyhow::Result<()> {
    market.validate()?;
    if market.horizon == 0 {
        bail!("market horizon must be positive");
    }
    Ok(())
}
