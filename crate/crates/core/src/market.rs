//! Duopoly price competition: a buyer with private values for both sellers'
//! goods buys from whichever seller offers the higher net value.

use std::collections::HashMap;
use std::io::{Read, Write};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bandit::{mix_exploration, BanditLearner};
use crate::error::{Error, Result};
use crate::inference::uniform_grid;
use crate::swap::Sda;
use crate::types::ActionDistribution;

/// Uniform on `[lo, hi]`; `lo == hi` is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    pub lo: f64,
    pub hi: f64,
}

impl ValueRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!("bad value interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.is_point() {
            self.lo
        } else {
            rng.gen_range(self.lo..self.hi)
        }
    }

    /// `P(v < x)` or `P(v ≤ x)`.
    fn cdf(&self, x: f64, strict: bool) -> f64 {
        if self.is_point() {
            let hit = if strict { x > self.lo } else { x >= self.lo };
            return if hit { 1.0 } else { 0.0 };
        }
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    /// `∫_{−∞}^{x} P(v ≤ t) dt`.
    fn cdf_integral(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if self.is_point() {
            return x - self.lo;
        }
        let w = self.hi - self.lo;
        if x < self.hi {
            (x - self.lo).powi(2) / (2.0 * w)
        } else {
            w / 2.0 + (x - self.hi)
        }
    }
}

impl Default for ValueRange {
    fn default() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Seller 1 wins equal net values.
    #[default]
    LowestIndex,
    /// A fair coin decides.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub costs: [f64; 2],
    #[serde(default = "default_values")]
    pub values: [ValueRange; 2],
    /// Sorted distinct price levels in `[0, p̄]`.
    pub prices: Vec<f64>,
    #[serde(default)]
    pub horizon: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
}

fn default_values() -> [ValueRange; 2] {
    [ValueRange::default(); 2]
}

impl MarketConfig {
    /// `k` evenly spaced prices on `[0, p̄]`, values `U[0,1]²`.
    pub fn uniform_grid(costs: [f64; 2], price_max: f64, k: usize, horizon: usize) -> Result<Self> {
        let c = Self { costs, values: default_values(), prices: uniform_grid(price_max, k), horizon, tie_break: TieBreak::LowestIndex };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prices.len() < 2 {
            return Err(Error::Config("price grid needs at least two levels".into()));
        }
        if self.prices[0] < 0.0 || self.prices.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("price grid must be non-negative, sorted and distinct".into()));
        }
        if self.costs.iter().any(|&c| !(c >= 0.0 && c < self.price_max())) {
            return Err(Error::Config(format!("costs must lie in [0, {}), got {:?}", self.price_max(), self.costs)));
        }
        for v in &self.values {
            ValueRange::new(v.lo, v.hi)?;
        }
        Ok(())
    }

    pub fn num_prices(&self) -> usize {
        self.prices.len()
    }

    pub fn price_max(&self) -> f64 {
        *self.prices.last().expect("validated grid")
    }

    /// Probability seller `j` sells at prices `p = (p_1, p_2)`.
    pub fn sale_probability(&self, j: usize, p: [f64; 2]) -> f64 {
        let o = 1 - j;
        let (vj, vo) = (self.values[j], self.values[o]);
        // Seller j needs v_j − p_j > 0 and v_o < v_j − p_j + p_o, with ties resolved below.
        let d = p[o] - p[j];
        let tie_share = match (self.tie_break, j) {
            (TieBreak::LowestIndex, 0) => 1.0,
            (TieBreak::LowestIndex, _) => 0.0,
            (TieBreak::Random, _) => 0.5,
        };
        if vj.is_point() {
            if vj.lo <= p[j] {
                return 0.0;
            }
            let x = vj.lo + d;
            let lt = vo.cdf(x, true);
            let le = vo.cdf(x, false);
            return lt + tie_share * (le - lt);
        }
        let lo = vj.lo.max(p[j]);
        if lo >= vj.hi {
            return 0.0;
        }
        (vo.cdf_integral(vj.hi + d) - vo.cdf_integral(lo + d)) / (vj.hi - vj.lo)
    }

    /// Expected stage profit `(p_j − c_j)·P(sale_j)`.
    pub fn expected_profit(&self, j: usize, p: [f64; 2]) -> f64 {
        (p[j] - self.costs[j]) * self.sale_probability(j, p)
    }

    /// Which seller the buyer picks, if any.
    pub fn buyer_choice<R: Rng + ?Sized>(&self, v: [f64; 2], p: [f64; 2], rng: &mut R) -> Option<usize> {
        let net = [v[0] - p[0], v[1] - p[1]];
        let best = if net[0] > net[1] {
            0
        } else if net[1] > net[0] {
            1
        } else {
            match self.tie_break {
                TieBreak::LowestIndex => 0,
                TieBreak::Random => usize::from(rng.gen_bool(0.5)),
            }
        };
        (net[best] > 0.0).then_some(best)
    }
}

/// A seller that posts from a distribution over the price grid and sees
/// only its own outcome.
pub trait Seller: Send {
    /// Sampling distribution for this round; it is logged as the exploration probabilities.
    fn post(&mut self, rng: &mut dyn RngCore) -> Result<ActionDistribution>;

    fn observe(&mut self, price_index: usize, sold: bool, profit: f64, sampling: &ActionDistribution) -> Result<()>;

    /// Whether the logged sampling probabilities may be shown to an auditor.
    fn discloses_exploration(&self) -> bool {
        true
    }
}

/// Bandit-wrapped learner; profits are shifted by the cost into `[0, p̄]`.
pub struct LearningSeller {
    learner: BanditLearner,
    cost: f64,
}

impl LearningSeller {
    pub fn new(learner: BanditLearner, cost: f64) -> Self {
        Self { learner, cost }
    }

    /// Swap-regret learner: SDA with Exponential Weights delegates behind exploration mixing.
    pub fn bandit_sda(config: &MarketConfig, j: usize, exploration: f64, learning_rate: f64) -> Result<Self> {
        let k = config.num_prices();
        let ceiling = BanditLearner::estimate_ceiling(config.price_max(), k, exploration);
        let sda = Sda::ew(k, ceiling, learning_rate)?;
        Ok(Self::new(BanditLearner::new(Box::new(sda), exploration)?, config.costs[j]))
    }
}

impl Seller for LearningSeller {
    fn post(&mut self, rng: &mut dyn RngCore) -> Result<ActionDistribution> {
        Ok(self.learner.recommend(rng)?.1)
    }

    fn observe(&mut self, price_index: usize, _sold: bool, profit: f64, sampling: &ActionDistribution) -> Result<()> {
        self.learner.feedback(price_index, profit + self.cost, sampling)?;
        Ok(())
    }
}

/// Posts one price, exploring uniformly at rate `exploration`.
pub struct FixedPriceSeller {
    sampling: ActionDistribution,
}

impl FixedPriceSeller {
    pub fn new(k: usize, price_index: usize, exploration: f64) -> Result<Self> {
        if price_index >= k {
            return Err(Error::Config(format!("price index {price_index} outside 0..{k}")));
        }
        let sampling = if exploration == 0.0 {
            ActionDistribution::point_mass(k, price_index)
        } else {
            mix_exploration(&ActionDistribution::point_mass(k, price_index), exploration)?
        };
        Ok(Self { sampling })
    }
}

impl Seller for FixedPriceSeller {
    fn post(&mut self, _rng: &mut dyn RngCore) -> Result<ActionDistribution> {
        Ok(self.sampling.clone())
    }

    fn observe(&mut self, _: usize, _: bool, _: f64, _: &ActionDistribution) -> Result<()> {
        Ok(())
    }
}

/// Holds a high price until its sales over a full window of high-price
/// rounds fall below `min_share`, then posts the punishment price forever.
pub struct GrimTriggerSeller {
    high: ActionDistribution,
    punish: ActionDistribution,
    high_index: usize,
    window: usize,
    min_share: f64,
    recent: std::collections::VecDeque<bool>,
    triggered: bool,
}

impl GrimTriggerSeller {
    pub fn new(k: usize, high: usize, punish: usize, exploration: f64, window: usize, min_share: f64) -> Result<Self> {
        if window == 0 {
            return Err(Error::Config("trigger window must be positive".into()));
        }
        Ok(Self {
            high: FixedPriceSeller::new(k, high, exploration)?.sampling,
            punish: FixedPriceSeller::new(k, punish, exploration)?.sampling,
            high_index: high,
            window,
            min_share,
            recent: Default::default(),
            triggered: false,
        })
    }

    pub fn triggered(&self) -> bool {
        self.triggered
    }
}

impl Seller for GrimTriggerSeller {
    fn post(&mut self, _rng: &mut dyn RngCore) -> Result<ActionDistribution> {
        Ok(if self.triggered { self.punish.clone() } else { self.high.clone() })
    }

    fn observe(&mut self, price_index: usize, sold: bool, _: f64, _: &ActionDistribution) -> Result<()> {
        if self.triggered || price_index != self.high_index {
            return Ok(());
        }
        self.recent.push_back(sold);
        if self.recent.len() > self.window {
            self.recent.pop_front();
        }
        if self.recent.len() == self.window {
            let share = self.recent.iter().filter(|&&s| s).count() as f64 / self.window as f64;
            self.triggered = share < self.min_share;
        }
        Ok(())
    }
}

/// Hides a seller's sampling probabilities from the log.
pub struct Opaque<S>(pub S);

impl<S: Seller> Seller for Opaque<S> {
    fn post(&mut self, rng: &mut dyn RngCore) -> Result<ActionDistribution> {
        self.0.post(rng)
    }

    fn observe(&mut self, i: usize, sold: bool, profit: f64, s: &ActionDistribution) -> Result<()> {
        self.0.observe(i, sold, profit, s)
    }

    fn discloses_exploration(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketRound {
    pub price_index: [usize; 2],
    pub sale: [bool; 2],
    pub profit: [f64; 2],
    pub exploration: [Option<Vec<f64>>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketLog {
    prices: Vec<f64>,
    rounds: Vec<MarketRound>,
}

impl MarketLog {
    pub fn new(prices: Vec<f64>) -> Self {
        Self { prices, rounds: Vec::new() }
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn rounds(&self) -> &[MarketRound] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn push(&mut self, round: MarketRound) -> Result<()> {
        let k = self.prices.len();
        if round.price_index.iter().any(|&i| i >= k) {
            return Err(Error::Domain("off-grid price".into()));
        }
        if round.sale[0] && round.sale[1] {
            return Err(Error::Domain("both sellers cannot sell in one round".into()));
        }
        for e in round.exploration.iter().flatten() {
            if e.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: e.len() });
            }
        }
        self.rounds.push(round);
        Ok(())
    }

    pub fn price(&self, round: usize, j: usize) -> f64 {
        self.prices[self.rounds[round].price_index[j]]
    }

    /// Per-seller sale frequency.
    pub fn sale_frequency(&self) -> [f64; 2] {
        let n = self.rounds.len().max(1) as f64;
        let s = |j: usize| self.rounds.iter().filter(|r| r.sale[j]).count() as f64 / n;
        [s(0), s(1)]
    }

    pub fn average_price(&self, j: usize) -> f64 {
        let n = self.rounds.len().max(1) as f64;
        (0..self.rounds.len()).map(|i| self.price(i, j)).sum::<f64>() / n
    }

    pub fn average_profit(&self, j: usize) -> f64 {
        let n = self.rounds.len().max(1) as f64;
        self.rounds.iter().map(|r| r.profit[j]).sum::<f64>() / n
    }

    /// `round, p1, p2, sale1, sale2, profit1, profit2, expl1_1..expl1_k, expl2_1..expl2_k`;
    /// undisclosed probabilities are empty cells.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let k = self.prices.len();
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = ["round", "p1", "p2", "sale1", "sale2", "profit1", "profit2"].iter().map(|s| s.to_string()).collect();
        for j in 1..=2 {
            header.extend((1..=k).map(|a| format!("expl{j}_{a}")));
        }
        w.write_record(&header)?;
        for (i, r) in self.rounds.iter().enumerate() {
            let mut rec = vec![
                (i + 1).to_string(),
                self.prices[r.price_index[0]].to_string(),
                self.prices[r.price_index[1]].to_string(),
                u8::from(r.sale[0]).to_string(),
                u8::from(r.sale[1]).to_string(),
                r.profit[0].to_string(),
                r.profit[1].to_string(),
            ];
            for e in &r.exploration {
                match e {
                    Some(p) => rec.extend(p.iter().map(f64::to_string)),
                    None => rec.extend(std::iter::repeat(String::new()).take(k)),
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a log whose prices lie on `prices`.
    pub fn read_csv<R: Read>(reader: R, prices: Vec<f64>) -> Result<Self> {
        let k = prices.len();
        let index: HashMap<u64, usize> = prices.iter().enumerate().map(|(i, p)| (p.to_bits(), i)).collect();
        let mut r = csv::Reader::from_reader(reader);
        if r.headers()?.len() != 7 + 2 * k {
            return Err(Error::Parse(format!("expected {} columns for a {k}-price grid", 7 + 2 * k)));
        }
        let mut log = Self::new(prices);
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |c: usize| -> Result<f64> {
                rec[c].trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}, column {}: {e}", line + 1, c + 1)))
            };
            let idx = |c: usize| -> Result<usize> {
                index.get(&num(c)?.to_bits()).copied().ok_or_else(|| Error::Domain(format!("row {}: off-grid price {}", line + 1, &rec[c])))
            };
            let mut exploration = [None, None];
            for (j, slot) in exploration.iter_mut().enumerate() {
                let cols = 7 + j * k..7 + (j + 1) * k;
                if cols.clone().all(|c| rec[c].trim().is_empty()) {
                    continue;
                }
                *slot = Some(cols.map(num).collect::<Result<Vec<_>>>()?);
            }
            log.push(MarketRound {
                price_index: [idx(1)?, idx(2)?],
                sale: [num(3)? != 0.0, num(4)? != 0.0],
                profit: [num(5)?, num(6)?],
                exploration,
            })?;
        }
        Ok(log)
    }
}

pub fn simulate_market(config: &MarketConfig, sellers: [&mut dyn Seller; 2], rng: &mut dyn RngCore) -> Result<MarketLog> {
    config.validate()?;
    let k = config.num_prices();
    let [s1, s2] = sellers;
    let mut sellers: [&mut dyn Seller; 2] = [s1, s2];
    let mut log = MarketLog::new(config.prices.clone());
    for _ in 0..config.horizon {
        let mut sampling = Vec::with_capacity(2);
        let mut idx = [0; 2];
        for (j, s) in sellers.iter_mut().enumerate() {
            let d = s.post(rng)?;
            if d.len() != k {
                return Err(Error::Domain(format!("seller {} posted off the {k}-price grid", j + 1)));
            }
            idx[j] = d.sample(rng);
            sampling.push(d);
        }
        let p = [config.prices[idx[0]], config.prices[idx[1]]];
        let v = [config.values[0].sample(rng), config.values[1].sample(rng)];
        let winner = config.buyer_choice(v, p, rng);
        let sale = [winner == Some(0), winner == Some(1)];
        let profit = [0, 1].map(|j| if sale[j] { p[j] - config.costs[j] } else { 0.0 });
        for (j, s) in sellers.iter_mut().enumerate() {
            s.observe(idx[j], sale[j], profit[j], &sampling[j])?;
        }
        let exploration = [0, 1].map(|j| sellers[j].discloses_exploration().then(|| sampling[j].probs().to_vec()));
        log.push(MarketRound { price_index: idx, sale, profit, exploration })?;
    }
    Ok(log)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub prices: [f64; 2],
    pub profits: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    /// Best-response fixed point, or the average over the cycle it enters.
    pub competitive: PricePoint,
    /// Grid index pairs visited by the terminal fixed point or cycle.
    pub competitive_cycle: Vec<[usize; 2]>,
    pub collusive: PricePoint,
    pub collusive_index: [usize; 2],
}

fn best_response(config: &MarketConfig, j: usize, other: usize) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for a in 0..config.num_prices() {
        let mut p = [0.0; 2];
        p[j] = config.prices[a];
        p[1 - j] = config.prices[other];
        let u = config.expected_profit(j, p);
        if u > best.1 + 1e-12 {
            best = (a, u);
        }
    }
    best.0
}

/// Alternating best responses from the lowest grid prices above cost, and
/// the joint-profit maximizing pair.
pub fn competitive_benchmark(config: &MarketConfig) -> Result<Benchmark> {
    config.validate()?;
    let k = config.num_prices();
    let start = |j: usize| config.prices.iter().position(|&p| p > config.costs[j]).unwrap_or(k - 1);
    let mut state = [start(0), start(1)];
    let mut seen: Vec<[usize; 2]> = vec![state];
    let cycle = loop {
        state[0] = best_response(config, 0, state[1]);
        state[1] = best_response(config, 1, state[0]);
        if let Some(pos) = seen.iter().position(|s| *s == state) {
            break seen[pos..].to_vec();
        }
        seen.push(state);
    };
    let point = |s: [usize; 2]| {
        let p = [config.prices[s[0]], config.prices[s[1]]];
        (p, [config.expected_profit(0, p), config.expected_profit(1, p)])
    };
    let m = cycle.len() as f64;
    let mut competitive = PricePoint { prices: [0.0; 2], profits: [0.0; 2] };
    for &s in &cycle {
        let (p, u) = point(s);
        for j in 0..2 {
            competitive.prices[j] += p[j] / m;
            competitive.profits[j] += u[j] / m;
        }
    }
    let mut best = ([0, 0], f64::NEG_INFINITY);
    for a in 0..k {
        for b in 0..k {
            let (_, u) = point([a, b]);
            if u[0] + u[1] > best.1 + 1e-12 {
                best = ([a, b], u[0] + u[1]);
            }
        }
    }
    let (p, u) = point(best.0);
    Ok(Benchmark { competitive, competitive_cycle: cycle, collusive: PricePoint { prices: p, profits: u }, collusive_index: best.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fig_config(horizon: usize) -> MarketConfig {
        MarketConfig::uniform_grid([0.1, 0.2], 1.0, 11, horizon).unwrap()
    }

    fn monte_carlo_area(c: &MarketConfig, p: [f64; 2], draws: usize, seed: u64) -> [(f64, f64); 2] {
        // Sign tests on the region inequalities, independent of buyer_choice.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = [0usize; 2];
        for _ in 0..draws {
            let v1: f64 = rng.gen();
            let v2: f64 = rng.gen();
            let (u1, u2) = (v1 - p[0], v2 - p[1]);
            if u1 > 0.0 && u1 >= u2 {
                hits[0] += 1;
            } else if u2 > 0.0 && u2 > u1 {
                hits[1] += 1;
            }
        }
        let _ = c;
        hits.map(|h| {
            let q = h as f64 / draws as f64;
            (q, (q * (1.0 - q) / draws as f64).sqrt())
        })
    }

    #[test]
    fn exact_sale_probability_matches_area() {
        let c = fig_config(0);
        for p in [[0.3, 0.5], [0.7, 0.2], [0.0, 0.0], [0.5, 0.5], [0.9, 1.0]] {
            let mc = monte_carlo_area(&c, p, 200_000, 3);
            for j in 0..2 {
                let exact = c.sale_probability(j, p);
                assert!((exact - mc[j].0).abs() <= 4.0 * mc[j].1 + 1e-9, "p={p:?} j={j} exact={exact} mc={:?}", mc[j]);
            }
        }
    }

    #[test]
    fn closed_form_square_regions() {
        // Equal prices: someone sells unless both values fall below p, and the split is symmetric.
        let c = fig_config(0);
        for p in [0.0, 0.3, 0.6] {
            for j in 0..2 {
                assert!((c.sale_probability(j, [p, p]) - (1.0 - p * p) / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn prices_above_values_never_sell() {
        let mut c = fig_config(500);
        c.prices = vec![0.0, 2.0, 3.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = FixedPriceSeller::new(3, 1, 0.0).unwrap();
        let mut b = FixedPriceSeller::new(3, 2, 0.0).unwrap();
        let log = simulate_market(&c, [&mut a, &mut b], &mut rng).unwrap();
        assert_eq!(log.sale_frequency(), [0.0, 0.0]);
    }

    #[test]
    fn fixed_price_frequencies_match_regions() {
        let c = fig_config(20_000);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut a = FixedPriceSeller::new(11, 4, 0.0).unwrap();
        let mut b = FixedPriceSeller::new(11, 6, 0.0).unwrap();
        let log = simulate_market(&c, [&mut a, &mut b], &mut rng).unwrap();
        let mc = monte_carlo_area(&c, [0.4, 0.6], 1_000_000, 4);
        let f = log.sale_frequency();
        for j in 0..2 {
            let se = ((mc[j].0 * (1.0 - mc[j].0)) / 20_000.0).sqrt() + mc[j].1;
            assert!((f[j] - mc[j].0).abs() <= 3.0 * se);
        }
        for r in log.rounds() {
            let p = [0.4, 0.6];
            for j in 0..2 {
                assert_eq!(r.profit[j], if r.sale[j] { p[j] - c.costs[j] } else { 0.0 });
            }
        }
    }

    #[test]
    fn deterministic_values_undercut_to_lowest_price_above_cost() {
        let mut c = MarketConfig::uniform_grid([0.0, 0.0], 1.0, 11, 0).unwrap();
        c.values = [ValueRange::new(1.0, 1.0).unwrap(); 2];
        c.tie_break = TieBreak::Random;
        let b = competitive_benchmark(&c).unwrap();
        assert_eq!(b.competitive_cycle, vec![[1, 1]]);
        assert_eq!(b.competitive.prices, [0.1, 0.1]);
        assert!(b.collusive.profits.iter().sum::<f64>() >= b.competitive.profits.iter().sum::<f64>());
    }

    #[test]
    fn collusive_pair_raises_prices_and_joint_profit() {
        let b = competitive_benchmark(&fig_config(0)).unwrap();
        for j in 0..2 {
            assert!(b.collusive.prices[j] > b.competitive.prices[j], "{b:?}");
        }
        // Seller 1 gains strictly; seller 2 earns exactly 0.1125 at both pairs.
        assert!(b.collusive.profits[0] > b.competitive.profits[0] + 1e-3);
        assert!((b.collusive.profits[1] - 0.1125).abs() < 1e-12 && (b.competitive.profits[1] - 0.1125).abs() < 1e-12);
        assert!(b.collusive.profits.iter().sum::<f64>() > b.competitive.profits.iter().sum::<f64>() + 1e-3);
        assert_eq!((b.competitive.prices, b.collusive.prices), ([0.5, 0.5], [0.6, 0.7]));
    }

    #[test]
    fn grim_trigger_reverts_after_losing_sales() {
        let c = fig_config(3_000);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = GrimTriggerSeller::new(11, 8, 3, 0.11, 50, 0.2).unwrap();
        let mut cheap = FixedPriceSeller::new(11, 2, 0.0).unwrap();
        simulate_market(&c, [&mut g, &mut cheap], &mut rng).unwrap();
        assert!(g.triggered());
    }

    #[test]
    fn csv_round_trip() {
        let c = fig_config(50);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut a = LearningSeller::bandit_sda(&c, 0, 0.11, 0.5).unwrap();
        let mut b = Opaque(FixedPriceSeller::new(11, 7, 0.11).unwrap());
        let log = simulate_market(&c, [&mut a, &mut b], &mut rng).unwrap();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let back = MarketLog::read_csv(buf.as_slice(), c.prices.clone()).unwrap();
        assert_eq!(back, log);
        assert!(log.rounds().iter().all(|r| r.exploration[1].is_none() && r.exploration[0].is_some()));
    }
}
