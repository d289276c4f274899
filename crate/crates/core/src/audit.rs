//! Swap-regret audit of a seller's pricing log: propensity-weighted
//! counterfactual profits, minimized over candidate costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketLog;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditParams {
    pub price_max: f64,
    pub alpha_min: f64,
    /// `r̄`: regret the audit must pass.
    pub target_regret: f64,
    pub delta: f64,
    /// Multiplies `(k·p̄ / (α·r̄))²·ln(k/δ)` to give the required number of rounds.
    #[serde(default = "default_calibration")]
    pub calibration_constant: f64,
    /// Pass iff the estimate is at most `threshold_factor·r̄`.
    #[serde(default = "default_threshold")]
    pub threshold_factor: f64,
    /// Candidate costs; defaults to `[0, p̄]`.
    #[serde(default)]
    pub cost_range: Option<[f64; 2]>,
    #[serde(default = "default_cost_points")]
    pub cost_points: usize,
}

/// Calibrated by simulation of the reference market; not a derived quantity.
pub const CALIBRATION_CONSTANT: f64 = 1e-4;

fn default_calibration() -> f64 {
    CALIBRATION_CONSTANT
}

fn default_threshold() -> f64 {
    1.5
}

fn default_cost_points() -> usize {
    101
}

impl AuditParams {
    pub fn new(price_max: f64, alpha_min: f64, target_regret: f64, delta: f64) -> Self {
        Self {
            price_max,
            alpha_min,
            target_regret,
            delta,
            calibration_constant: CALIBRATION_CONSTANT,
            threshold_factor: default_threshold(),
            cost_range: None,
            cost_points: default_cost_points(),
        }
    }

    /// Audit against one known cost.
    pub fn with_known_cost(mut self, cost: f64) -> Self {
        self.cost_range = Some([cost, cost]);
        self.cost_points = 1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.price_max) || !pos(self.target_regret) || !pos(self.calibration_constant) || !pos(self.threshold_factor) {
            return Err(Error::Config("price_max, target_regret, calibration_constant and threshold_factor must be positive".into()));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("alpha_min must lie in (0, 1] and delta in (0, 1)".into()));
        }
        if self.cost_points == 0 {
            return Err(Error::Config("cost_points must be positive".into()));
        }
        if let Some([lo, hi]) = self.cost_range {
            if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Config(format!("bad cost range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn required_rounds(&self, k: usize) -> usize {
        let k = k as f64;
        let base = (k * self.price_max / (self.alpha_min * self.target_regret)).powi(2) * (k / self.delta).ln();
        (self.calibration_constant * base).ceil() as usize
    }

    pub fn threshold(&self) -> f64 {
        self.threshold_factor * self.target_regret
    }

    fn costs(&self) -> Vec<f64> {
        let [lo, hi] = self.cost_range.unwrap_or([0.0, self.price_max]);
        if self.cost_points == 1 {
            return vec![lo];
        }
        (0..self.cost_points).map(|i| lo + (hi - lo) * i as f64 / (self.cost_points - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditParameters {
    pub k: usize,
    pub price_max: f64,
    pub alpha_min: f64,
    pub target_regret: f64,
    pub delta: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub swap_regret: f64,
    pub inferred_cost: f64,
    pub radius: f64,
    pub verdict: Verdict,
    pub threshold: f64,
    pub required_rounds: usize,
    pub parameters: AuditParameters,
    /// `(cost, estimated swap regret)` over the candidate grid.
    pub regret_by_cost: Vec<[f64; 2]>,
}

/// Propensity-weighted sufficient statistics of one seller's log.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapStatistics {
    prices: Vec<f64>,
    /// `S[a][q] = (1/n) Σ_i α_a^i · sale^i · 1[p^i = q] / α_q^i`.
    weighted_sales: Vec<Vec<f64>>,
    n: usize,
}

fn checked_probs(log: &MarketLog, j: usize, alpha_min: f64) -> Result<Vec<&[f64]>> {
    if j > 1 {
        return Err(Error::Domain(format!("seller {j} outside 0..2")));
    }
    log.rounds()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let p = r.exploration[j]
                .as_deref()
                .ok_or_else(|| Error::NotAuditable(format!("round {} has no exploration probabilities for seller {}", i + 1, j + 1)))?;
            if let Some(a) = p.iter().position(|&x| x < alpha_min - 1e-12) {
                return Err(Error::NotAuditable(format!("round {}: price {} explored with probability {} < {alpha_min}", i + 1, a, p[a])));
            }
            Ok(p)
        })
        .collect()
}

impl SwapStatistics {
    pub fn from_log(log: &MarketLog, j: usize, alpha_min: f64) -> Result<Self> {
        if log.is_empty() {
            return Err(Error::NotAuditable("empty log".into()));
        }
        let probs = checked_probs(log, j, alpha_min)?;
        let k = log.prices().len();
        let mut s = vec![vec![0.0; k]; k];
        for (r, p) in log.rounds().iter().zip(&probs) {
            if !r.sale[j] {
                continue;
            }
            let q = r.price_index[j];
            let est = 1.0 / p[q];
            for (a, row) in s.iter_mut().enumerate() {
                row[q] += p[a] * est;
            }
        }
        let n = log.len();
        for v in s.iter_mut().flatten() {
            *v /= n as f64;
        }
        Ok(Self { prices: log.prices().to_vec(), weighted_sales: s, n })
    }

    /// Estimated swap regret at cost `c`, with the best swap target of each price.
    pub fn regret_at(&self, c: f64) -> (f64, Vec<usize>) {
        let mut total = 0.0;
        let mut targets = Vec::with_capacity(self.prices.len());
        for (a, row) in self.weighted_sales.iter().enumerate() {
            let own = (self.prices[a] - c) * row[a];
            let mut best = (a, 0.0);
            for (q, &s) in row.iter().enumerate() {
                let gain = (self.prices[q] - c) * s - own;
                if gain > best.1 {
                    best = (q, gain);
                }
            }
            total += best.1;
            targets.push(best.0);
        }
        (total, targets)
    }

    pub fn rounds(&self) -> usize {
        self.n
    }
}

/// Inverse-propensity estimate of each round's sale indicator at every grid price.
pub fn counterfactual_sales(log: &MarketLog, j: usize, alpha_min: f64) -> Result<Vec<Vec<f64>>> {
    let probs = checked_probs(log, j, alpha_min)?;
    let k = log.prices().len();
    Ok(log
        .rounds()
        .iter()
        .zip(probs)
        .map(|(r, p)| {
            let mut est = vec![0.0; k];
            let q = r.price_index[j];
            if r.sale[j] {
                est[q] = 1.0 / p[q];
            }
            est
        })
        .collect())
}

fn radius(log: &MarketLog, j: usize, probs: &[&[f64]], c: f64, targets: &[usize], delta: f64) -> f64 {
    let prices = log.prices();
    let k = prices.len();
    let n = log.len() as f64;
    let (mut sum, mut sq) = (0.0, 0.0);
    for (r, p) in log.rounds().iter().zip(probs) {
        let mut x = 0.0;
        if r.sale[j] {
            let q = r.price_index[j];
            let est = (prices[q] - c) / p[q];
            for (a, &t) in targets.iter().enumerate() {
                if t == a {
                    continue;
                }
                if q == t {
                    x += p[a] * est;
                }
                if q == a {
                    x -= p[a] * est;
                }
            }
        }
        sum += x;
        sq += x * x;
    }
    let var = (sq / n - (sum / n).powi(2)).max(0.0);
    let z = (2.0 * (2.0 * (k * k) as f64 / delta).ln()).sqrt();
    z * (var / n).sqrt()
}

pub fn audit_swap_regret(log: &MarketLog, j: usize, params: &AuditParams) -> Result<AuditReport> {
    params.validate()?;
    let stats = SwapStatistics::from_log(log, j, params.alpha_min)?;
    let probs = checked_probs(log, j, params.alpha_min)?;
    let k = log.prices().len();
    let mut regret_by_cost = Vec::new();
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    for c in params.costs() {
        let (r, targets) = stats.regret_at(c);
        regret_by_cost.push([c, r]);
        if best.as_ref().is_none_or(|b| r < b.1) {
            best = Some((c, r, targets));
        }
    }
    let (cost, r, targets) = best.expect("at least one candidate cost");
    let threshold = params.threshold();
    Ok(AuditReport {
        swap_regret: r,
        inferred_cost: cost,
        radius: radius(log, j, &probs, cost, &targets, params.delta),
        verdict: if r <= threshold { Verdict::Pass } else { Verdict::Fail },
        threshold,
        required_rounds: params.required_rounds(k),
        parameters: AuditParameters {
            k,
            price_max: params.price_max,
            alpha_min: params.alpha_min,
            target_regret: params.target_regret,
            delta: params.delta,
            n: log.len(),
        },
        regret_by_cost,
    })
}
