//! Value types shared by every learner, harness and calculator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking payoffs against `[0, h]`.
pub const PAYOFF_SLACK: f64 = 1e-9;

/// Tolerance on `sum(probs) == 1`.
pub const DISTRIBUTION_TOL: f64 = 1e-12;

/// One round of payoffs for `k` actions, each in `[0, ceiling]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffVector {
    entries: Vec<f64>,
    ceiling: f64,
}

impl PayoffVector {
    pub fn new(entries: Vec<f64>, ceiling: f64) -> Result<Self> {
        if !(ceiling > 0.0) || !ceiling.is_finite() {
            return Err(Error::Config(format!("payoff ceiling must be positive, got {ceiling}")));
        }
        if entries.is_empty() {
            return Err(Error::Domain("payoff vector needs at least one action".into()));
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() || value < -PAYOFF_SLACK || value > ceiling + PAYOFF_SLACK {
                return Err(Error::PayoffOutOfRange { index, value, ceiling });
            }
        }
        Ok(Self { entries, ceiling })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, action: usize) -> f64 {
        self.entries[action]
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }
}

/// A sequence of payoff vectors fed to a learner.
pub type PayoffStream = Vec<PayoffVector>;

/// Probability vector over `k` actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActionDistribution(Vec<f64>);

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is negative or not finite")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes non-negative weights. Used for internally computed vectors.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution(format!("cannot normalize weights summing to {total}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("negative weight {w}")));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution over zero actions");
        Self(vec![1.0 / k as f64; k])
    }

    pub fn point_mass(k: usize, action: usize) -> Self {
        assert!(action < k, "point mass on action {action} of {k}");
        let mut probs = vec![0.0; k];
        probs[action] = 1.0;
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prob(&self, action: usize) -> f64 {
        self.0[action]
    }

    pub fn dot(&self, values: &[f64]) -> f64 {
        self.0.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Inverse-CDF draw; consumes exactly one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (a, &p) in self.0.iter().enumerate() {
            if p > 0.0 {
                last_positive = a;
                acc += p;
                if u < acc {
                    return a;
                }
            }
        }
        last_positive
    }
}

impl TryFrom<Vec<f64>> for ActionDistribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<ActionDistribution> for Vec<f64> {
    fn from(d: ActionDistribution) -> Self {
        d.0
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = a;
        }
    }
    best
}

/// What the learner saw in a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// Every action's payoff.
    Full(Vec<f64>),
    /// Only the played action's payoff.
    Bandit(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    /// For full-feedback rounds, the distribution the action was drawn from.
    /// For bandit rounds, the base learner's recommendation.
    pub distribution: ActionDistribution,
    pub action: usize,
    pub feedback: Feedback,
    /// Actual sampling probabilities after exploration mixing (bandit rounds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exploration: Option<ActionDistribution>,
    /// Optional per-round solver diagnostic (stationary residual for SDA).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl Round {
    /// Probabilities the action was actually drawn from.
    pub fn sampling_probs(&self) -> &ActionDistribution {
        self.exploration.as_ref().unwrap_or(&self.distribution)
    }

    pub fn full_payoffs(&self) -> Option<&[f64]> {
        match &self.feedback {
            Feedback::Full(v) => Some(v),
            Feedback::Bandit(_) => None,
        }
    }

    pub fn realized_payoff(&self) -> f64 {
        match &self.feedback {
            Feedback::Full(v) => v[self.action],
            Feedback::Bandit(u) => *u,
        }
    }
}

/// Per-round record of a learner's play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlayLogData", into = "PlayLogData")]
pub struct PlayLog {
    num_actions: usize,
    ceiling: f64,
    rounds: Vec<Round>,
}

impl PlayLog {
    pub fn new(num_actions: usize, ceiling: f64) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::Config("a log needs at least one action".into()));
        }
        if !(ceiling > 0.0) || !ceiling.is_finite() {
            return Err(Error::Config(format!("payoff ceiling must be positive, got {ceiling}")));
        }
        Ok(Self { num_actions, ceiling, rounds: Vec::new() })
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn is_full_feedback(&self) -> bool {
        self.rounds.iter().all(|r| matches!(r.feedback, Feedback::Full(_)))
    }

    pub fn push(&mut self, round: Round) -> Result<()> {
        let k = self.num_actions;
        if round.distribution.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: round.distribution.len() });
        }
        if let Some(e) = &round.exploration {
            if e.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: e.len() });
            }
        }
        if round.action >= k {
            return Err(Error::Domain(format!("action {} out of range for {k} actions", round.action)));
        }
        match &round.feedback {
            Feedback::Full(v) => {
                if v.len() != k {
                    return Err(Error::LengthMismatch { expected: k, got: v.len() });
                }
                PayoffVector::new(v.clone(), self.ceiling)?;
            }
            Feedback::Bandit(u) => {
                if !u.is_finite() || *u < -PAYOFF_SLACK || *u > self.ceiling + PAYOFF_SLACK {
                    return Err(Error::PayoffOutOfRange { index: round.action, value: *u, ceiling: self.ceiling });
                }
            }
        }
        self.rounds.push(round);
        Ok(())
    }

    /// Records a full-feedback round.
    pub fn push_full(&mut self, distribution: ActionDistribution, action: usize, payoffs: &PayoffVector) -> Result<()> {
        self.push(Round { distribution, action, feedback: Feedback::Full(payoffs.entries().to_vec()), exploration: None, residual: None })
    }
}

#[derive(Serialize, Deserialize)]
struct PlayLogData {
    num_actions: usize,
    ceiling: f64,
    rounds: Vec<Round>,
}

impl TryFrom<PlayLogData> for PlayLog {
    type Error = Error;

    fn try_from(data: PlayLogData) -> Result<Self> {
        let mut log = PlayLog::new(data.num_actions, data.ceiling)?;
        for round in data.rounds {
            log.push(round)?;
        }
        Ok(log)
    }
}

impl From<PlayLog> for PlayLogData {
    fn from(log: PlayLog) -> Self {
        Self { num_actions: log.num_actions, ceiling: log.ceiling, rounds: log.rounds }
    }
}

/// How a deviation benchmark was attained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deviation {
    /// Best fixed action in hindsight.
    Fixed(usize),
    /// Best swap map: `map[a]` replaces action `a`.
    Swap(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub total_regret: f64,
    pub per_round_regret: f64,
    pub deviation: Deviation,
    pub algorithm_payoff: f64,
    pub benchmark_payoff: f64,
    pub rounds: usize,
}

impl RegretReport {
    pub(crate) fn new(algorithm_payoff: f64, benchmark_payoff: f64, deviation: Deviation, rounds: usize) -> Self {
        let total_regret = benchmark_payoff - algorithm_payoff;
        Self { total_regret, per_round_regret: total_regret / rounds as f64, deviation, algorithm_payoff, benchmark_payoff, rounds }
    }
}
