//! Payoff sources for experiments, oblivious and adaptive, and the
//! full-feedback experiment harness.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::types::{argmax, ActionDistribution, Feedback, PayoffVector, PlayLog, Round};

/// Produces the round's payoff vector. Adaptive sources may look at the
/// learner's current distribution and previously drawn actions.
pub trait PayoffSource {
    fn num_actions(&self) -> usize;

    fn ceiling(&self) -> f64;

    fn payoffs(&mut self, round: usize, dist: &ActionDistribution, rng: &mut dyn RngCore) -> Result<PayoffVector>;

    fn record(&mut self, _action: usize) {}
}

/// Replays a fixed stream.
#[derive(Debug, Clone)]
pub struct Replay {
    stream: Vec<PayoffVector>,
}

impl Replay {
    pub fn new(stream: Vec<PayoffVector>) -> Result<Self> {
        let first = stream.first().ok_or_else(|| Error::Domain("empty payoff stream".into()))?;
        let k = first.len();
        if let Some(v) = stream.iter().find(|v| v.len() != k) {
            return Err(Error::LengthMismatch { expected: k, got: v.len() });
        }
        Ok(Self { stream })
    }
}

impl PayoffSource for Replay {
    fn num_actions(&self) -> usize {
        self.stream[0].len()
    }

    fn ceiling(&self) -> f64 {
        self.stream[0].ceiling()
    }

    fn payoffs(&mut self, round: usize, _: &ActionDistribution, _: &mut dyn RngCore) -> Result<PayoffVector> {
        self.stream
            .get(round)
            .cloned()
            .ok_or_else(|| Error::Domain(format!("stream has {} rounds, asked for round {}", self.stream.len(), round + 1)))
    }
}

/// Two actions: `(0, 1/2)` first, then `(1, 0)`, `(0, 1)` alternating. FTL earns nothing on it.
pub fn ftl_trap_stream(n: usize) -> Vec<PayoffVector> {
    (0..n).map(trap_round).collect()
}

fn trap_round(i: usize) -> PayoffVector {
    let v = match i {
        0 => vec![0.0, 0.5],
        _ if i % 2 == 1 => vec![1.0, 0.0],
        _ => vec![0.0, 1.0],
    };
    PayoffVector::new(v, 1.0).expect("payoffs in range")
}

/// Source description used by configs and experiment sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StreamSpec {
    /// Independent uniform payoffs on `[0, h]`.
    Uniform { k: usize, h: f64 },
    /// Action `a` pays `h` with probability `means[a]`, else 0.
    Bernoulli { means: Vec<f64>, h: f64 },
    /// Pays 0 to the most likely action under the learner's current distribution, `h` elsewhere.
    PenalizeLeader { k: usize, h: f64 },
    /// Pays 0 to the previously drawn action, `h` elsewhere.
    PenalizeLast { k: usize, h: f64 },
    /// The best action changes every `block` rounds; payoffs are noisy around it.
    Switching { k: usize, h: f64, block: usize },
    /// The two-action sequence that defeats FTL.
    FtlTrap,
}

impl StreamSpec {
    pub fn build(&self) -> Result<Box<dyn PayoffSource + Send>> {
        let check = |k: usize, h: f64| -> Result<()> {
            if k == 0 {
                return Err(Error::Config("stream needs at least one action".into()));
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("stream ceiling must be positive, got {h}")));
            }
            Ok(())
        };
        Ok(match self {
            StreamSpec::Uniform { k, h } => {
                check(*k, *h)?;
                Box::new(Stochastic { k: *k, h: *h, means: None })
            }
            StreamSpec::Bernoulli { means, h } => {
                check(means.len(), *h)?;
                if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
                    return Err(Error::Config("Bernoulli means must lie in [0, 1]".into()));
                }
                Box::new(Stochastic { k: means.len(), h: *h, means: Some(means.clone()) })
            }
            StreamSpec::PenalizeLeader { k, h } => {
                check(*k, *h)?;
                Box::new(Penalize { k: *k, h: *h, last: None, leader: true })
            }
            StreamSpec::PenalizeLast { k, h } => {
                check(*k, *h)?;
                Box::new(Penalize { k: *k, h: *h, last: None, leader: false })
            }
            StreamSpec::Switching { k, h, block } => {
                check(*k, *h)?;
                if *block == 0 {
                    return Err(Error::Config("switching block must be positive".into()));
                }
                Box::new(Switching { k: *k, h: *h, block: *block, best: 0 })
            }
            StreamSpec::FtlTrap => Box::new(Trap),
        })
    }
}

struct Stochastic {
    k: usize,
    h: f64,
    means: Option<Vec<f64>>,
}

impl PayoffSource for Stochastic {
    fn num_actions(&self) -> usize {
        self.k
    }

    fn ceiling(&self) -> f64 {
        self.h
    }

    fn payoffs(&mut self, _: usize, _: &ActionDistribution, rng: &mut dyn RngCore) -> Result<PayoffVector> {
        let v = match &self.means {
            None => (0..self.k).map(|_| self.h * rng.gen::<f64>()).collect(),
            Some(m) => m.iter().map(|&p| if rng.gen::<f64>() < p { self.h } else { 0.0 }).collect(),
        };
        PayoffVector::new(v, self.h)
    }
}

struct Penalize {
    k: usize,
    h: f64,
    last: Option<usize>,
    leader: bool,
}

impl PayoffSource for Penalize {
    fn num_actions(&self) -> usize {
        self.k
    }

    fn ceiling(&self) -> f64 {
        self.h
    }

    fn payoffs(&mut self, _: usize, dist: &ActionDistribution, _: &mut dyn RngCore) -> Result<PayoffVector> {
        let target = if self.leader { Some(argmax(dist.probs())) } else { self.last };
        PayoffVector::new((0..self.k).map(|a| if Some(a) == target { 0.0 } else { self.h }).collect(), self.h)
    }

    fn record(&mut self, action: usize) {
        self.last = Some(action);
    }
}

struct Switching {
    k: usize,
    h: f64,
    block: usize,
    best: usize,
}

impl PayoffSource for Switching {
    fn num_actions(&self) -> usize {
        self.k
    }

    fn ceiling(&self) -> f64 {
        self.h
    }

    fn payoffs(&mut self, round: usize, _: &ActionDistribution, rng: &mut dyn RngCore) -> Result<PayoffVector> {
        if round % self.block == 0 {
            self.best = rng.gen_range(0..self.k);
        }
        let v = (0..self.k)
            .map(|a| {
                let base = if a == self.best { 0.7 } else { 0.4 };
                self.h * (base + 0.3 * (rng.gen::<f64>() - 0.5))
            })
            .collect();
        PayoffVector::new(v, self.h)
    }
}

struct Trap;

impl PayoffSource for Trap {
    fn num_actions(&self) -> usize {
        2
    }

    fn ceiling(&self) -> f64 {
        1.0
    }

    fn payoffs(&mut self, round: usize, _: &ActionDistribution, _: &mut dyn RngCore) -> Result<PayoffVector> {
        Ok(trap_round(round))
    }
}

/// Runs a learner against a source for `n` rounds with full feedback.
pub fn run_full_feedback(learner: &mut dyn Learner, source: &mut dyn PayoffSource, n: usize, rng: &mut dyn RngCore) -> Result<PlayLog> {
    if learner.num_actions() != source.num_actions() {
        return Err(Error::LengthMismatch { expected: learner.num_actions(), got: source.num_actions() });
    }
    let mut log = PlayLog::new(learner.num_actions(), source.ceiling())?;
    for i in 0..n {
        let dist = learner.distribution(rng)?;
        let payoffs = source.payoffs(i, &dist, rng)?;
        let action = dist.sample(rng);
        source.record(action);
        learner.observe(&payoffs)?;
        log.push(Round {
            distribution: dist,
            action,
            feedback: Feedback::Full(payoffs.into_entries()),
            exploration: None,
            residual: learner.last_residual(),
        })?;
    }
    Ok(log)
}
