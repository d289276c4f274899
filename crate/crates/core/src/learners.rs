//! Full-feedback learners: Follow the Leader, Exponential Weights and
//! Follow the Perturbed Leader, plus the Be-the-Leader benchmark and the
//! adversary that defeats any deterministic learner.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{argmax, ActionDistribution, PayoffStream, PayoffVector, PlayLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Ftl,
    Ew,
    Ftpl,
}

/// Learning rate ε, either fixed or the anytime schedule `ε_i = √(ln k / i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRate {
    Fixed(f64),
    Anytime,
}

impl LearningRate {
    fn validate(self) -> Result<()> {
        match self {
            LearningRate::Fixed(eps) if !(eps > 0.0 && eps <= 1.0) => {
                Err(Error::Config(format!("learning rate must lie in (0, 1], got {eps}")))
            }
            _ => Ok(()),
        }
    }

    /// Rate used when deciding round `round` (1-based).
    pub fn at(self, round: usize, k: usize) -> f64 {
        match self {
            LearningRate::Fixed(eps) => eps,
            LearningRate::Anytime => ((k as f64).ln() / round.max(1) as f64).sqrt().clamp(f64::MIN_POSITIVE, 1.0),
        }
    }
}

/// `√(ln k / n)`, the horizon-tuned Exponential Weights rate.
pub fn ew_horizon_epsilon(k: usize, n: usize) -> f64 {
    ((k as f64).ln() / n as f64).sqrt().clamp(f64::MIN_POSITIVE, 1.0)
}

/// `√((1 + ln k) / n)`, the horizon-tuned perturbed-leader rate.
pub fn ftpl_horizon_epsilon(k: usize, n: usize) -> f64 {
    ((1.0 + (k as f64).ln()) / n as f64).sqrt().clamp(f64::MIN_POSITIVE, 1.0)
}

/// Tails before the first head of an ε-biased coin, by inverse CDF.
pub fn geometric_tails<R: Rng + ?Sized>(epsilon: f64, rng: &mut R) -> u64 {
    if epsilon >= 1.0 {
        return 0;
    }
    // 1 - U lies in (0, 1], so the logarithm is finite.
    let u: f64 = 1.0 - rng.gen::<f64>();
    (u.ln() / (1.0 - epsilon).ln()).floor() as u64
}

/// Initial hallucinated payoffs `h · Z_a` with `Z_a` geometric(ε).
pub fn ftpl_hallucinate<R: Rng + ?Sized>(epsilon: f64, ceiling: f64, k: usize, rng: &mut R) -> Result<Vec<f64>> {
    LearningRate::Fixed(epsilon).validate()?;
    Ok((0..k).map(|_| ceiling * geometric_tails(epsilon, rng) as f64).collect())
}

/// Cumulative scores and configuration of one full-feedback learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub kind: LearnerKind,
    scores: Vec<f64>,
    hallucinations: Option<Vec<f64>>,
    learning_rate: LearningRate,
    ceiling: f64,
    round: usize,
}

impl LearnerState {
    pub fn new(kind: LearnerKind, k: usize, ceiling: f64, learning_rate: LearningRate) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("learner needs at least one action".into()));
        }
        if !(ceiling > 0.0) || !ceiling.is_finite() {
            return Err(Error::Config(format!("payoff ceiling must be positive, got {ceiling}")));
        }
        if kind != LearnerKind::Ftl {
            learning_rate.validate()?;
        }
        Ok(Self { kind, scores: vec![0.0; k], hallucinations: None, learning_rate, ceiling, round: 0 })
    }

    pub fn with_hallucinations(mut self, hallucinations: Vec<f64>) -> Result<Self> {
        if hallucinations.len() != self.scores.len() {
            return Err(Error::LengthMismatch { expected: self.scores.len(), got: hallucinations.len() });
        }
        self.hallucinations = Some(hallucinations);
        Ok(self)
    }

    pub fn num_actions(&self) -> usize {
        self.scores.len()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn hallucinations(&self) -> Option<&[f64]> {
        self.hallucinations.as_deref()
    }

    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Rate for the upcoming decision.
    pub fn epsilon(&self) -> f64 {
        self.learning_rate.at(self.round + 1, self.num_actions())
    }

    pub fn learning_rate(&self) -> LearningRate {
        self.learning_rate
    }

    /// Draws fresh hallucinations at the current rate.
    pub fn rehallucinate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let h = ftpl_hallucinate(self.epsilon(), self.ceiling, self.num_actions(), rng)?;
        self.hallucinations = Some(h);
        Ok(())
    }

    /// Distribution for the next round; the state is not modified.
    pub fn step(&self) -> Result<ActionDistribution> {
        let k = self.num_actions();
        match self.kind {
            LearnerKind::Ftl => Ok(ActionDistribution::point_mass(k, argmax(&self.scores))),
            LearnerKind::Ftpl => {
                let perturbed: Vec<f64> = match &self.hallucinations {
                    Some(h) => self.scores.iter().zip(h).map(|(u, z)| u + z).collect(),
                    None => self.scores.clone(),
                };
                Ok(ActionDistribution::point_mass(k, argmax(&perturbed)))
            }
            LearnerKind::Ew => {
                let log_base = (1.0 + self.epsilon()).ln();
                let exponents: Vec<f64> = self.scores.iter().map(|u| u / self.ceiling * log_base).collect();
                let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                ActionDistribution::from_weights(exponents.iter().map(|e| (e - top).exp()).collect())
            }
        }
    }

    pub fn update(&mut self, payoffs: &PayoffVector) -> Result<()> {
        self.update_entries(payoffs.entries())
    }

    pub(crate) fn update_entries(&mut self, payoffs: &[f64]) -> Result<()> {
        if payoffs.len() != self.scores.len() {
            return Err(Error::LengthMismatch { expected: self.scores.len(), got: payoffs.len() });
        }
        for (s, u) in self.scores.iter_mut().zip(payoffs) {
            *s += u;
        }
        self.round += 1;
        Ok(())
    }
}

/// Anything that emits a distribution each round and learns from full payoff vectors.
pub trait Learner {
    fn num_actions(&self) -> usize;

    /// Payoff ceiling of the vectors this learner accepts.
    fn ceiling(&self) -> f64;

    fn distribution(&mut self, rng: &mut dyn RngCore) -> Result<ActionDistribution>;

    fn observe(&mut self, payoffs: &PayoffVector) -> Result<()>;

    /// Diagnostic from the last decision, e.g. a stationary-solver residual.
    fn last_residual(&self) -> Option<f64> {
        None
    }
}

/// A [`LearnerState`] driven through the [`Learner`] interface.
#[derive(Debug, Clone)]
pub struct OnlineLearner {
    pub state: LearnerState,
    /// Redraw FTPL hallucinations before every decision.
    pub rerandomize: bool,
}

impl OnlineLearner {
    pub fn new<R: Rng + ?Sized>(state: LearnerState, rerandomize: bool, rng: &mut R) -> Result<Self> {
        let mut state = state;
        if state.kind == LearnerKind::Ftpl && state.hallucinations.is_none() {
            state.rehallucinate(rng)?;
        }
        Ok(Self { state, rerandomize })
    }

    pub fn ftl(k: usize, ceiling: f64) -> Result<Self> {
        Ok(Self { state: LearnerState::new(LearnerKind::Ftl, k, ceiling, LearningRate::Fixed(1.0))?, rerandomize: false })
    }

    pub fn ew(k: usize, ceiling: f64, epsilon: f64) -> Result<Self> {
        Ok(Self { state: LearnerState::new(LearnerKind::Ew, k, ceiling, LearningRate::Fixed(epsilon))?, rerandomize: false })
    }
}

impl Learner for OnlineLearner {
    fn num_actions(&self) -> usize {
        self.state.num_actions()
    }

    fn ceiling(&self) -> f64 {
        self.state.ceiling()
    }

    fn distribution(&mut self, rng: &mut dyn RngCore) -> Result<ActionDistribution> {
        if self.rerandomize && self.state.kind == LearnerKind::Ftpl {
            self.state.rehallucinate(rng)?;
        }
        self.state.step()
    }

    fn observe(&mut self, payoffs: &PayoffVector) -> Result<()> {
        self.state.update(payoffs)
    }
}

/// JSON learner description: `{kind, epsilon, h, k, seed, rerandomize}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    /// Omitted: horizon-tuned when the horizon is known, anytime otherwise.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub h: f64,
    pub k: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub rerandomize: bool,
}

impl LearnerConfig {
    pub fn learning_rate(&self, horizon: Option<usize>) -> LearningRate {
        match (self.epsilon, horizon) {
            (Some(eps), _) => LearningRate::Fixed(eps),
            (None, Some(n)) => LearningRate::Fixed(match self.kind {
                LearnerKind::Ftpl => ftpl_horizon_epsilon(self.k, n),
                _ => ew_horizon_epsilon(self.k, n),
            }),
            (None, None) => LearningRate::Anytime,
        }
    }

    pub fn state(&self, horizon: Option<usize>) -> Result<LearnerState> {
        LearnerState::new(self.kind, self.k, self.h, self.learning_rate(horizon))
    }

    /// Builds the learner, drawing FTPL hallucinations from `seed` when set, else from `rng`.
    pub fn build<R: Rng + ?Sized>(&self, horizon: Option<usize>, rng: &mut R) -> Result<OnlineLearner> {
        let state = self.state(horizon)?;
        match self.seed {
            Some(seed) => OnlineLearner::new(state, self.rerandomize, &mut ChaCha8Rng::seed_from_u64(seed)),
            None => OnlineLearner::new(state, self.rerandomize, rng),
        }
    }
}

/// Result of the Be-the-Leader benchmark on an offline payoff table.
#[derive(Debug, Clone, PartialEq)]
pub struct BtlOutcome {
    pub total: f64,
    pub choices: Vec<usize>,
    /// Cumulative BTL payoff after each round.
    pub cumulative: Vec<f64>,
    /// Cumulative best-fixed-action payoff after each round.
    pub opt_cumulative: Vec<f64>,
}

/// Plays `argmax_a U_a^i` in round `i`, i.e. with the round's payoffs already counted.
/// `table[a][i]` is the payoff of action `a` in round `i`.
pub fn btl_value(table: &[Vec<f64>]) -> Result<BtlOutcome> {
    let k = table.len();
    let n = table.first().map_or(0, Vec::len);
    if k == 0 || n == 0 {
        return Err(Error::Domain("BTL needs a non-empty payoff table".into()));
    }
    if let Some(row) = table.iter().find(|r| r.len() != n) {
        return Err(Error::LengthMismatch { expected: n, got: row.len() });
    }
    let mut totals = vec![0.0; k];
    let mut out =
        BtlOutcome { total: 0.0, choices: Vec::with_capacity(n), cumulative: Vec::with_capacity(n), opt_cumulative: Vec::with_capacity(n) };
    for i in 0..n {
        for (t, row) in totals.iter_mut().zip(table) {
            *t += row[i];
        }
        let a = argmax(&totals);
        out.total += table[a][i];
        out.choices.push(a);
        out.cumulative.push(out.total);
        out.opt_cumulative.push(totals[a]);
    }
    let opt = *out.opt_cumulative.last().unwrap_or(&0.0);
    debug_assert!(out.total >= opt - 1e-9, "BTL {} fell below OPT {opt}", out.total);
    Ok(out)
}

/// Pays `0` to whatever the learner picks and `h` to every other action.
///
/// The learner's pick is predictable for deterministic learners; for seeded
/// randomized ones the adversary shares the seed, which has the same effect.
pub fn adversary_for_deterministic(learner: &mut dyn Learner, n: usize, rng: &mut dyn RngCore) -> Result<(PayoffStream, PlayLog)> {
    let k = learner.num_actions();
    let h = learner.ceiling();
    let mut stream = Vec::with_capacity(n);
    let mut log = PlayLog::new(k, h)?;
    for _ in 0..n {
        let dist = learner.distribution(rng)?;
        let action = dist.sample(rng);
        let payoffs: Vec<f64> = (0..k).map(|a| if a == action { 0.0 } else { h }).collect();
        let pv = PayoffVector::new(payoffs, h)?;
        learner.observe(&pv)?;
        log.push_full(dist, action, &pv)?;
        stream.push(pv);
    }
    Ok((stream, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regret::{best_in_hindsight_regret, RegretMode};

    fn pv(v: &[f64], h: f64) -> PayoffVector {
        PayoffVector::new(v.to_vec(), h).unwrap()
    }

    #[test]
    fn ew_worked_example() {
        let mut s = LearnerState::new(LearnerKind::Ew, 2, 1.0, LearningRate::Fixed(1.0)).unwrap();
        let table = [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]];
        let expected = [0.5, 2.0 / 3.0, 0.8, 2.0 / 3.0];
        let mut total = 0.0;
        for (u, want) in table.iter().zip(expected) {
            let d = s.step().unwrap();
            assert!((d.prob(0) - want).abs() < 1e-12);
            total += d.dot(u);
            s.update(&pv(u, 1.0)).unwrap();
        }
        assert!((total - 1.7).abs() < 1e-12);
    }

    #[test]
    fn ew_hand_evaluated_weights() {
        let mut s = LearnerState::new(LearnerKind::Ew, 2, 2.0, LearningRate::Fixed(0.5)).unwrap();
        s.update(&pv(&[2.0, 0.0], 2.0)).unwrap();
        let d = s.step().unwrap();
        assert!((d.prob(0) - 0.6).abs() < 1e-12);
        assert!((d.prob(1) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn fresh_learners_break_symmetry_predictably() {
        let ew = LearnerState::new(LearnerKind::Ew, 4, 1.0, LearningRate::Fixed(0.3)).unwrap();
        assert_eq!(ew.step().unwrap(), ActionDistribution::uniform(4));
        let ftl = LearnerState::new(LearnerKind::Ftl, 4, 1.0, LearningRate::Fixed(0.3)).unwrap();
        assert_eq!(ftl.step().unwrap(), ActionDistribution::point_mass(4, 0));
        let ftpl =
            LearnerState::new(LearnerKind::Ftpl, 4, 1.0, LearningRate::Fixed(0.3)).unwrap().with_hallucinations(vec![0.0; 4]).unwrap();
        assert_eq!(ftpl.step().unwrap(), ActionDistribution::point_mass(4, 0));
    }

    #[test]
    fn bad_learning_rates_are_config_errors() {
        for eps in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(LearnerState::new(LearnerKind::Ew, 2, 1.0, LearningRate::Fixed(eps)), Err(Error::Config(_))));
        }
        assert!(LearnerState::new(LearnerKind::Ftl, 2, 1.0, LearningRate::Fixed(0.0)).is_ok());
    }

    #[test]
    fn updates_accumulate() {
        let mut s = LearnerState::new(LearnerKind::Ftl, 2, 1.0, LearningRate::Fixed(1.0)).unwrap();
        s.update(&pv(&[0.0, 0.0], 1.0)).unwrap();
        assert_eq!(s.scores(), &[0.0, 0.0]);
        s.update(&pv(&[1.0, 0.0], 1.0)).unwrap();
        s.update(&pv(&[0.0, 1.0], 1.0)).unwrap();
        assert_eq!(s.scores(), &[1.0, 1.0]);
        assert_eq!(s.round(), 3);
        assert!(matches!(s.update(&pv(&[0.0], 1.0)), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn seeded_updates_equal_column_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = LearnerState::new(LearnerKind::Ew, 3, 1.0, LearningRate::Fixed(0.1)).unwrap();
        let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| rng.gen()).collect()).collect();
        for r in &rows {
            s.update(&pv(r, 1.0)).unwrap();
        }
        for a in 0..3 {
            let sum: f64 = rows.iter().map(|r| r[a]).sum();
            assert!((s.scores()[a] - sum).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_geometric_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(ftpl_hallucinate(1.0, 3.0, 8, &mut rng).unwrap().iter().all(|&z| z == 0.0));
        assert!(ftpl_hallucinate(0.0, 3.0, 8, &mut rng).is_err());
    }

    #[test]
    fn geometric_mean_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eps = 0.25;
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| geometric_tails(eps, &mut rng) as f64).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 3.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    // Coin-flip loop oracle for the inverse-CDF sampler, compared by chi-square.
    #[test]
    fn inverse_cdf_matches_coin_flip_loop() {
        let eps = 0.3;
        let n = 50_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let bins = 12;
        let mut fast = vec![0.0; bins];
        let mut slow = vec![0.0; bins];
        for _ in 0..n {
            let z = geometric_tails(eps, &mut rng) as usize;
            fast[z.min(bins - 1)] += 1.0;
            let mut tails = 0;
            while rng.gen::<f64>() >= eps {
                tails += 1;
            }
            slow[tails.min(bins - 1)] += 1.0;
        }
        // Two-sample chi-square with bins-1 = 11 degrees of freedom; 0.999 quantile ≈ 31.3.
        let chi2: f64 = fast.iter().zip(&slow).map(|(a, b)| (a - b) * (a - b) / (a + b)).sum();
        assert!(chi2 < 31.3, "chi2 {chi2}");
    }

    #[test]
    fn btl_worked_example() {
        let table = vec![vec![0.4, 0.3, 0.3, 1.0], vec![0.2, 0.2, 1.0, 0.2]];
        let out = btl_value(&table).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        assert!(close(&out.cumulative, &[0.4, 0.7, 1.7, 2.7]));
        assert!(close(&out.opt_cumulative, &[0.4, 0.7, 1.4, 2.0]));
        assert_eq!(out.choices, vec![0, 0, 1, 0]);
    }

    #[test]
    fn btl_on_constant_table_equals_opt() {
        let table = vec![vec![0.3; 5], vec![0.7; 5]];
        let out = btl_value(&table).unwrap();
        assert!((out.total - 3.5).abs() < 1e-12);
        assert!((out.opt_cumulative[4] - 3.5).abs() < 1e-12);
        assert!(btl_value(&[]).is_err());
    }

    #[test]
    fn btl_dominates_brute_force_opt() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let table: Vec<Vec<f64>> = (0..3).map(|_| (0..8).map(|_| rng.gen()).collect()).collect();
        let out = btl_value(&table).unwrap();
        let opt = table.iter().map(|r| r.iter().sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
        assert!(out.total >= opt - 1e-12);
        assert!((out.opt_cumulative[7] - opt).abs() < 1e-12);
    }

    #[test]
    fn adversary_defeats_frozen_ftpl() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = LearnerState::new(LearnerKind::Ftpl, 3, 1.0, LearningRate::Fixed(ftpl_horizon_epsilon(3, 2000))).unwrap();
        let mut learner = OnlineLearner::new(state, false, &mut rng).unwrap();
        let (_, log) = adversary_for_deterministic(&mut learner, 2000, &mut rng).unwrap();
        let r = best_in_hindsight_regret(&log, RegretMode::Realized).unwrap();
        assert!(r.per_round_regret >= 0.4, "{}", r.per_round_regret);
        assert_eq!(r.algorithm_payoff, 0.0);
    }

    #[test]
    fn adversary_single_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut learner = OnlineLearner::ftl(2, 1.0).unwrap();
        let (_, log) = adversary_for_deterministic(&mut learner, 1, &mut rng).unwrap();
        let r = best_in_hindsight_regret(&log, RegretMode::Realized).unwrap();
        assert_eq!(r.total_regret, 1.0);
        let mut single = OnlineLearner::ftl(1, 1.0).unwrap();
        let (_, log) = adversary_for_deterministic(&mut single, 1, &mut rng).unwrap();
        assert_eq!(best_in_hindsight_regret(&log, RegretMode::Realized).unwrap().total_regret, 0.0);
    }

    #[test]
    fn config_json_shape() {
        let cfg: LearnerConfig =
            serde_json::from_str(r#"{"kind":"ftpl","epsilon":0.1,"h":1.0,"k":3,"seed":7,"rerandomize":true}"#).unwrap();
        assert_eq!(cfg.kind, LearnerKind::Ftpl);
        assert!(serde_json::from_str::<LearnerConfig>(r#"{"kind":"ew","h":1,"k":2,"bogus":1}"#).is_err());
        let auto: LearnerConfig = serde_json::from_str(r#"{"kind":"ew","h":1,"k":10}"#).unwrap();
        assert_eq!(auto.learning_rate(Some(10_000)), LearningRate::Fixed((10f64.ln() / 1e4).sqrt()));
        assert_eq!(auto.learning_rate(None), LearningRate::Anytime);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ew_is_shift_invariant(scores in prop::collection::vec(0.0f64..50.0, 1..6), shift in 0.0f64..100.0, eps in 0.01f64..1.0) {
                let k = scores.len();
                let mut a = LearnerState::new(LearnerKind::Ew, k, 1.0, LearningRate::Fixed(eps)).unwrap();
                let mut b = a.clone();
                a.update_entries(&scores).unwrap();
                let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
                b.update_entries(&shifted).unwrap();
                let (da, db) = (a.step().unwrap(), b.step().unwrap());
                for (x, y) in da.probs().iter().zip(db.probs()) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
