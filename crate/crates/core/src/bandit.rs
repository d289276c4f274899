//! Partial feedback: propensity scores, exploration mixing, and the wrapper
//! that turns a full-feedback learner into a bandit learner.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::learners::{Learner, LearnerKind, LearnerState, LearningRate, OnlineLearner};
use crate::streams::PayoffSource;
use crate::types::{ActionDistribution, Feedback, PayoffVector, PlayLog, Round};

#[derive(Debug, Clone, PartialEq)]
pub struct PropensityEstimate {
    pub estimated: Vec<f64>,
    pub played: usize,
    pub sampling_probs: ActionDistribution,
}

/// Inverse-propensity estimate: `observed / probs[played]` at the played action, 0 elsewhere.
pub fn propensity_score(observed: f64, played: usize, probs: &ActionDistribution) -> Result<PropensityEstimate> {
    let k = probs.len();
    if played >= k {
        return Err(Error::Domain(format!("played action {played} outside 0..{k}")));
    }
    let p = probs.prob(played);
    if p <= 0.0 {
        return Err(Error::ZeroPropensity(played));
    }
    let mut estimated = vec![0.0; k];
    estimated[played] = observed / p;
    Ok(PropensityEstimate { estimated, played, sampling_probs: probs.clone() })
}

/// `α = (1 − ε)·p̃ + ε/k`.
pub fn mix_exploration(recommended: &ActionDistribution, epsilon: f64) -> Result<ActionDistribution> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Config(format!("exploration rate must lie in (0, 1], got {epsilon}")));
    }
    let floor = epsilon / recommended.len() as f64;
    let mixed: Vec<f64> = recommended.probs().iter().map(|p| (1.0 - epsilon) * p + floor).collect();
    ActionDistribution::from_weights(mixed)
}

/// `∛(k ln k / n)`, the rate that balances exploration against estimate variance.
pub fn exp3_horizon_epsilon(k: usize, n: usize) -> f64 {
    ((k as f64) * (k as f64).ln() / n as f64).cbrt().clamp(f64::MIN_POSITIVE, 1.0)
}

/// A full-feedback learner driven by propensity estimates.
///
/// The base learner's ceiling must be at least `h·k/ε`, the largest value an
/// estimate can take once every sampling probability is at least `ε/k`.
pub struct BanditLearner {
    base: Box<dyn Learner + Send>,
    exploration: f64,
}

impl BanditLearner {
    pub fn new(base: Box<dyn Learner + Send>, exploration: f64) -> Result<Self> {
        mix_exploration(&ActionDistribution::uniform(1), exploration)?;
        Ok(Self { base, exploration })
    }

    /// Estimate ceiling `h·k/ε` for payoffs in `[0, h]`.
    pub fn estimate_ceiling(h: f64, k: usize, exploration: f64) -> f64 {
        h * k as f64 / exploration
    }

    /// Exponential Weights on `[0, h·k/ε]` with learning rate `ε` equal to the exploration rate.
    pub fn exp3(k: usize, h: f64, epsilon: f64) -> Result<Self> {
        Self::exp3_with_rate(k, h, epsilon, epsilon)
    }

    pub fn exp3_with_rate(k: usize, h: f64, exploration: f64, learning_rate: f64) -> Result<Self> {
        let ceiling = Self::estimate_ceiling(h, k, exploration);
        let state = LearnerState::new(LearnerKind::Ew, k, ceiling, LearningRate::Fixed(learning_rate))?;
        Self::new(Box::new(OnlineLearner { state, rerandomize: false }), exploration)
    }

    pub fn num_actions(&self) -> usize {
        self.base.num_actions()
    }

    pub fn exploration(&self) -> f64 {
        self.exploration
    }

    /// Returns the base recommendation and the mixed sampling distribution.
    pub fn recommend(&mut self, rng: &mut dyn RngCore) -> Result<(ActionDistribution, ActionDistribution)> {
        let rec = self.base.distribution(rng)?;
        let sampling = mix_exploration(&rec, self.exploration)?;
        Ok((rec, sampling))
    }

    /// Feeds back the one observed payoff.
    pub fn feedback(&mut self, action: usize, observed: f64, sampling: &ActionDistribution) -> Result<PropensityEstimate> {
        let est = propensity_score(observed, action, sampling)?;
        self.base.observe(&PayoffVector::new(est.estimated.clone(), self.base.ceiling())?)?;
        Ok(est)
    }
}

/// The payoff stream as the bandit learner sees it: one pull per round.
pub struct HiddenStream<'a> {
    source: &'a mut dyn PayoffSource,
    current: Option<PayoffVector>,
}

impl<'a> HiddenStream<'a> {
    pub fn new(source: &'a mut dyn PayoffSource) -> Self {
        Self { source, current: None }
    }

    /// Reveals the payoff of `action` and closes the round.
    pub fn pull(&mut self, action: usize) -> Result<f64> {
        let v = self.current.as_ref().ok_or_else(|| Error::Domain("no open round".into()))?;
        let u = v.get(action);
        self.source.record(action);
        Ok(u)
    }

    fn open(&mut self, round: usize, dist: &ActionDistribution, rng: &mut dyn RngCore) -> Result<()> {
        self.current = Some(self.source.payoffs(round, dist, rng)?);
        Ok(())
    }

    fn take(&mut self) -> Option<PayoffVector> {
        self.current.take()
    }
}

/// A bandit run: the learner's own log, plus the full payoffs for scoring it.
#[derive(Debug, Clone)]
pub struct BanditRun {
    /// Bandit-feedback log; `distribution` is the recommendation, `exploration` the sampling probabilities.
    pub log: PlayLog,
    /// Full-feedback view with the sampling probabilities as distributions.
    pub truth: PlayLog,
}

pub fn bandit_run(learner: &mut BanditLearner, source: &mut dyn PayoffSource, n: usize, rng: &mut dyn RngCore) -> Result<BanditRun> {
    let k = learner.num_actions();
    if source.num_actions() != k {
        return Err(Error::LengthMismatch { expected: k, got: source.num_actions() });
    }
    let h = source.ceiling();
    let mut log = PlayLog::new(k, h)?;
    let mut truth = PlayLog::new(k, h)?;
    let mut hidden = HiddenStream::new(source);
    for i in 0..n {
        let (rec, sampling) = learner.recommend(rng)?;
        hidden.open(i, &sampling, rng)?;
        let action = sampling.sample(rng);
        let observed = hidden.pull(action)?;
        learner.feedback(action, observed, &sampling)?;
        let full = hidden.take().expect("round was opened");
        log.push(Round {
            distribution: rec,
            action,
            feedback: Feedback::Bandit(observed),
            exploration: Some(sampling.clone()),
            residual: None,
        })?;
        truth.push_full(sampling, action, &full)?;
    }
    Ok(BanditRun { log, truth })
}
