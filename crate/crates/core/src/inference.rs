//! Value inference for bidders assumed to have low regret: counterfactual
//! deviation deltas and the rationalizable (value, regret) set.

use std::io::{Read, Write};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::types::{ActionDistribution, PayoffVector, PlayLog};

/// Single-item sealed-bid rules. The highest bid wins, lowest index on ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    FirstPrice,
    SecondPrice,
}

impl Mechanism {
    pub fn id(self) -> &'static str {
        match self {
            Mechanism::FirstPrice => "first_price",
            Mechanism::SecondPrice => "second_price",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "first_price" => Ok(Mechanism::FirstPrice),
            "second_price" => Ok(Mechanism::SecondPrice),
            other => Err(Error::UnknownMechanism(other.into())),
        }
    }

    /// `(allocation, payment)` of bidder `j`.
    pub fn outcome(self, bids: &[f64], j: usize) -> (f64, f64) {
        let winner = winner(bids);
        if winner != j {
            return (0.0, 0.0);
        }
        let pay = match self {
            Mechanism::FirstPrice => bids[j],
            Mechanism::SecondPrice => bids.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &b)| b).fold(0.0, f64::max),
        };
        (1.0, pay)
    }

    /// Outcome of bidder `j` had it bid `z` against the same opponents.
    pub fn counterfactual(self, bids: &[f64], j: usize, z: f64) -> (f64, f64) {
        let mut alt = bids.to_vec();
        alt[j] = z;
        self.outcome(&alt, j)
    }
}

fn winner(bids: &[f64]) -> usize {
    let mut w = 0;
    for (i, &b) in bids.iter().enumerate() {
        if b > bids[w] {
            w = i;
        }
    }
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionLog {
    bids: Vec<Vec<f64>>,
    mechanisms: Vec<Mechanism>,
    bid_max: f64,
}

impl AuctionLog {
    pub fn new(bid_max: f64) -> Result<Self> {
        if !(bid_max > 0.0 && bid_max.is_finite()) {
            return Err(Error::Config(format!("bid range must be positive, got {bid_max}")));
        }
        Ok(Self { bids: Vec::new(), mechanisms: Vec::new(), bid_max })
    }

    pub fn push(&mut self, bids: Vec<f64>, mechanism: Mechanism) -> Result<()> {
        if let Some(first) = self.bids.first() {
            if first.len() != bids.len() {
                return Err(Error::LengthMismatch { expected: first.len(), got: bids.len() });
            }
        }
        if bids.is_empty() {
            return Err(Error::Domain("a round needs at least one bid".into()));
        }
        self.check_bid(&bids)?;
        self.bids.push(bids);
        self.mechanisms.push(mechanism);
        Ok(())
    }

    fn check_bid(&self, bids: &[f64]) -> Result<()> {
        match bids.iter().find(|&&b| !(0.0..=self.bid_max).contains(&b)) {
            Some(b) => Err(Error::Domain(format!("bid {b} outside [0, {}]", self.bid_max))),
            None => Ok(()),
        }
    }

    pub fn rounds(&self) -> usize {
        self.bids.len()
    }

    pub fn bidders(&self) -> usize {
        self.bids.first().map_or(0, Vec::len)
    }

    pub fn bid_max(&self) -> f64 {
        self.bid_max
    }

    pub fn bids(&self) -> &[Vec<f64>] {
        &self.bids
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    /// Long format: `round, bidder, bid, alloc, pay, mechanism_id`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["round", "bidder", "bid", "alloc", "pay", "mechanism_id"])?;
        for (i, (bids, mech)) in self.bids.iter().zip(&self.mechanisms).enumerate() {
            for (j, b) in bids.iter().enumerate() {
                let (x, p) = mech.outcome(bids, j);
                w.write_record([(i + 1).to_string(), j.to_string(), b.to_string(), x.to_string(), p.to_string(), mech.id().to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the long format; recorded outcomes must agree with the mechanism.
    pub fn read_csv<R: Read>(reader: R, bid_max: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            round: usize,
            bidder: usize,
            bid: f64,
            alloc: f64,
            pay: f64,
            mechanism_id: String,
        }
        let mut rows: Vec<Row> = csv::Reader::from_reader(reader).deserialize().collect::<std::result::Result<_, _>>()?;
        rows.sort_by_key(|r| (r.round, r.bidder));
        let mut log = Self::new(bid_max)?;
        let mut start = 0;
        while start < rows.len() {
            let round = rows[start].round;
            let end = rows[start..].iter().position(|r| r.round != round).map_or(rows.len(), |p| start + p);
            let group = &rows[start..end];
            if group.iter().enumerate().any(|(j, r)| r.bidder != j) {
                return Err(Error::Parse(format!("round {round}: bidders must be numbered 0..m")));
            }
            let mech = Mechanism::parse(&group[0].mechanism_id)?;
            if group.iter().any(|r| r.mechanism_id != group[0].mechanism_id) {
                return Err(Error::Parse(format!("round {round}: mixed mechanism ids")));
            }
            let bids: Vec<f64> = group.iter().map(|r| r.bid).collect();
            for (j, r) in group.iter().enumerate() {
                let (x, p) = mech.outcome(&bids, j);
                if (x - r.alloc).abs() > 1e-12 || (p - r.pay).abs() > 1e-12 {
                    return Err(Error::Parse(format!("round {round}, bidder {j}: outcome disagrees with {}", mech.id())));
                }
            }
            log.push(bids, mech)?;
            start = end;
        }
        Ok(log)
    }
}

/// `points` evenly spaced bids on `[0, hi]`.
pub fn uniform_grid(hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| hi * i as f64 / (points - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationDeltas {
    pub grid: Vec<f64>,
    /// `Δx(z)`: average realized allocation minus allocation under the deviation.
    pub delta_alloc: Vec<f64>,
    pub delta_pay: Vec<f64>,
}

pub fn counterfactual_deltas(log: &AuctionLog, j: usize, grid: &[f64]) -> Result<DeviationDeltas> {
    if grid.is_empty() {
        return Err(Error::Domain("empty deviation grid".into()));
    }
    if log.rounds() == 0 {
        return Err(Error::Domain("empty auction log".into()));
    }
    if j >= log.bidders() {
        return Err(Error::Domain(format!("bidder {j} outside 0..{}", log.bidders())));
    }
    log.check_bid(grid)?;
    let n = log.rounds() as f64;
    let mut dx = vec![0.0; grid.len()];
    let mut dp = vec![0.0; grid.len()];
    for (bids, mech) in log.bids.iter().zip(&log.mechanisms) {
        let (x, p) = mech.outcome(bids, j);
        for (g, &z) in grid.iter().enumerate() {
            let (xz, pz) = mech.counterfactual(bids, j, z);
            dx[g] += x - xz;
            dp[g] += p - pz;
        }
    }
    for v in dx.iter_mut().chain(dp.iter_mut()) {
        *v /= n;
    }
    Ok(DeviationDeltas { grid: grid.to_vec(), delta_alloc: dx, delta_pay: dp })
}

/// `v·Δx(z) − Δp(z) ≥ −r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalizableSet {
    pub half_spaces: Vec<HalfSpace>,
    pub v_hat: f64,
    /// Minimum rationalizable regret, floored at zero.
    pub r_hat: f64,
    /// Values attaining `r_hat`; `v_hat` is the lower end.
    pub argmin: (f64, f64),
    pub value_range: (f64, f64),
}

impl RationalizableSet {
    /// `r(v) = max_z (Δp(z) − v·Δx(z))`, unfloored.
    pub fn implied_regret(&self, v: f64) -> f64 {
        implied(&self.half_spaces, v)
    }

    pub fn contains(&self, v: f64, r: f64) -> bool {
        v >= self.value_range.0 && v <= self.value_range.1 && r >= self.implied_regret(v) - 1e-9
    }

    /// `(v, max(r(v), 0))` sampled at `points` values, for plotting the lower boundary.
    pub fn boundary(&self, points: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.value_range;
        (0..points.max(2))
            .map(|i| {
                let v = lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64;
                (v, self.implied_regret(v).max(0.0))
            })
            .collect()
    }
}

fn implied(hs: &[HalfSpace], v: f64) -> f64 {
    hs.iter().map(|h| h.intercept - v * h.slope).fold(f64::NEG_INFINITY, f64::max)
}

/// Minimizes the convex piecewise-linear `r(v)` over the value range by
/// checking every breakpoint, zero crossing and endpoint.
pub fn rationalizable_set(deltas: &DeviationDeltas, value_range: (f64, f64)) -> Result<RationalizableSet> {
    let (lo, hi) = value_range;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("bad value range [{lo}, {hi}]")));
    }
    if deltas.grid.is_empty() || deltas.delta_alloc.len() != deltas.grid.len() || deltas.delta_pay.len() != deltas.grid.len() {
        return Err(Error::Domain("empty or ragged deviation grid".into()));
    }
    if deltas.delta_alloc.iter().chain(&deltas.delta_pay).any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite deltas".into()));
    }
    let hs: Vec<HalfSpace> =
        deltas.delta_alloc.iter().zip(&deltas.delta_pay).map(|(&slope, &intercept)| HalfSpace { slope, intercept }).collect();

    // Lines with equal slope never cross; keep the highest intercept of each slope.
    let mut lines: Vec<HalfSpace> = hs.clone();
    lines.sort_by(|a, b| a.slope.total_cmp(&b.slope).then(b.intercept.total_cmp(&a.intercept)));
    lines.dedup_by(|a, b| a.slope == b.slope);

    let mut candidates = vec![lo, hi];
    for (i, a) in lines.iter().enumerate() {
        if a.slope != 0.0 {
            candidates.push(a.intercept / a.slope);
        }
        for b in &lines[i + 1..] {
            candidates.push((a.intercept - b.intercept) / (a.slope - b.slope));
        }
    }
    candidates.retain(|v| v.is_finite() && *v >= lo && *v <= hi);
    let values: Vec<(f64, f64)> = candidates.iter().map(|&v| (v, implied(&lines, v))).collect();
    let r_min = values.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let r_hat = r_min.max(0.0);
    let tol = 1e-12 * (1.0 + r_hat.abs());
    let at_min = values.iter().filter(|x| x.1 <= r_hat + tol).map(|x| x.0);
    let a_lo = at_min.clone().fold(f64::INFINITY, f64::min);
    let a_hi = at_min.fold(f64::NEG_INFINITY, f64::max);
    Ok(RationalizableSet { half_spaces: hs, v_hat: a_lo, r_hat, argmin: (a_lo, a_hi), value_range })
}

/// Payoff ceiling for a bidder's utilities shifted by `b_max` into `[0, v + b_max]`.
pub fn bidder_ceiling(value: f64, bid_max: f64) -> f64 {
    value + bid_max
}

#[derive(Debug, Clone)]
pub struct BidderRun {
    /// Bidder 0 is the learner.
    pub auctions: AuctionLog,
    /// The learner's full-feedback log over the bid grid, utilities shifted by `b_max`.
    pub play: PlayLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidderSetup {
    pub value: f64,
    pub grid: Vec<f64>,
    pub mechanism: Mechanism,
    /// Opponents bid i.i.d. uniform on `[0, bid_max]`.
    pub opponents: usize,
    pub bid_max: f64,
}

/// A learner bidding on the setup's grid, seeing every grid bid's utility
/// after each round.
pub fn simulate_bidder(learner: &mut dyn Learner, setup: &BidderSetup, n: usize, rng: &mut dyn RngCore) -> Result<BidderRun> {
    let BidderSetup { value, ref grid, mechanism, opponents, bid_max } = *setup;
    if learner.num_actions() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: learner.num_actions() });
    }
    let h = learner.ceiling();
    if h < bidder_ceiling(value, bid_max) {
        return Err(Error::Config(format!("learner ceiling {h} below v + b_max = {}", bidder_ceiling(value, bid_max))));
    }
    let mut auctions = AuctionLog::new(bid_max)?;
    auctions.check_bid(grid)?;
    if opponents == 0 {
        return Err(Error::Config("need at least one opponent".into()));
    }
    let mut play = PlayLog::new(grid.len(), h)?;
    for _ in 0..n {
        let dist = learner.distribution(rng)?;
        let a = dist.sample(rng);
        let mut bids = vec![grid[a]];
        bids.extend((0..opponents).map(|_| rng.gen_range(0.0..bid_max)));
        let utilities: Vec<f64> = grid
            .iter()
            .map(|&z| {
                let (x, p) = mechanism.counterfactual(&bids, 0, z);
                value * x - p + bid_max
            })
            .collect();
        let payoffs = PayoffVector::new(utilities, h)?;
        learner.observe(&payoffs)?;
        play.push_full(dist, a, &payoffs)?;
        auctions.push(bids, mechanism)?;
    }
    Ok(BidderRun { auctions, play })
}

/// One round observed under partial feedback: the bid drawn from the
/// bidder's known sampling distribution over the grid, and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditAuctionRound {
    pub bid_index: usize,
    pub alloc: f64,
    pub pay: f64,
    pub probs: ActionDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedDeltas {
    pub deltas: DeviationDeltas,
    pub se_alloc: Vec<f64>,
    pub se_pay: Vec<f64>,
}

/// Inverse-propensity estimates of the deltas when only the played bid's
/// outcome is seen; each per-round term `x^i − x^i·1[b^i = z]/α^i_z` is
/// unbiased for the full-feedback one.
pub fn ips_deltas(rounds: &[BanditAuctionRound], grid: &[f64]) -> Result<EstimatedDeltas> {
    if rounds.is_empty() || grid.is_empty() {
        return Err(Error::Domain("need rounds and a non-empty grid".into()));
    }
    let k = grid.len();
    let n = rounds.len() as f64;
    let (mut sx, mut sp, mut qx, mut qp) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    for r in rounds {
        if r.probs.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: r.probs.len() });
        }
        if r.bid_index >= k {
            return Err(Error::Domain(format!("bid index {} outside the grid", r.bid_index)));
        }
        for g in 0..k {
            let (ex, ep) = if g == r.bid_index {
                let a = r.probs.prob(g);
                if a <= 0.0 {
                    return Err(Error::ZeroPropensity(g));
                }
                (r.alloc / a, r.pay / a)
            } else {
                if r.probs.prob(g) <= 0.0 {
                    return Err(Error::ZeroPropensity(g));
                }
                (0.0, 0.0)
            };
            let (tx, tp) = (r.alloc - ex, r.pay - ep);
            sx[g] += tx;
            sp[g] += tp;
            qx[g] += tx * tx;
            qp[g] += tp * tp;
        }
    }
    let se = |s: f64, q: f64| ((q / n - (s / n).powi(2)).max(0.0) / n).sqrt();
    Ok(EstimatedDeltas {
        deltas: DeviationDeltas {
            grid: grid.to_vec(),
            delta_alloc: sx.iter().map(|s| s / n).collect(),
            delta_pay: sp.iter().map(|s| s / n).collect(),
        },
        se_alloc: sx.iter().zip(&qx).map(|(&s, &q)| se(s, q)).collect(),
        se_pay: sp.iter().zip(&qp).map(|(&s, &q)| se(s, q)).collect(),
    })
}
