//! Optimistic Stackelberg values by linear programming, and manipulation of
//! learning followers. The leader is the row player.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{BimatrixGame, Player};
use crate::learners::Learner;
use crate::regret::{best_in_hindsight_regret, swap_regret, RegretMode};
use crate::simplex::{LinearProgram, LpOutcome};
use crate::types::{ActionDistribution, Feedback, PayoffVector, PlayLog, Round};

/// Optimistic Stackelberg value `OSV(b, r)` and a leader strategy attaining it.
#[derive(Debug, Clone, PartialEq)]
pub enum Osv {
    Forceable {
        value: f64,
        strategy: ActionDistribution,
    },
    /// `b` cannot be kept within `r` of a best response.
    Unforceable,
}

impl Osv {
    /// The value, with `-∞` for unforceable actions.
    pub fn value(&self) -> f64 {
        match self {
            Osv::Forceable { value, .. } => *value,
            Osv::Unforceable => f64::NEG_INFINITY,
        }
    }
}

/// Row `b'` of the regret constraint: `x · (U_F(b', ·) − U_F(b, ·))`.
fn regret_rows(game: &BimatrixGame, b: usize) -> Vec<Vec<f64>> {
    (0..game.cols())
        .filter(|&bp| bp != b)
        .map(|bp| (0..game.rows()).map(|a| game.col_payoff(bp, a) - game.col_payoff(b, a)).collect())
        .collect()
}

fn leader_column(game: &BimatrixGame, b: usize) -> Vec<f64> {
    (0..game.rows()).map(|a| game.row_payoff(a, b)).collect()
}

fn check(game: &BimatrixGame, b: usize, r: f64) -> Result<()> {
    if b >= game.cols() {
        return Err(Error::Domain(format!("follower action {b} outside 0..{}", game.cols())));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("regret tolerance must be non-negative, got {r}")));
    }
    Ok(())
}

fn strategy_from(x: &[f64]) -> Result<ActionDistribution> {
    ActionDistribution::from_weights(x.to_vec())
}

/// `max_x x·U_L(·, b)` over the simplex subject to `x·(U_F(b') − U_F(b)) ≤ r` for every `b'`.
pub fn osv(game: &BimatrixGame, b: usize, r: f64) -> Result<Osv> {
    check(game, b, r)?;
    let m = game.rows();
    let mut lp = LinearProgram::new(leader_column(game, b)).eq(vec![1.0; m], 1.0);
    for row in regret_rows(game, b) {
        lp = lp.le(row, r);
    }
    match lp.solve()? {
        LpOutcome::Optimal { x, value } => Ok(Osv::Forceable { value, strategy: strategy_from(&x)? }),
        LpOutcome::Infeasible => Ok(Osv::Unforceable),
        LpOutcome::Unbounded => Err(Error::LinearProgram("bounded problem reported unbounded".into())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackelbergSolution {
    pub value: f64,
    pub strategy: ActionDistribution,
    pub follower_action: usize,
    /// Smallest advantage of `follower_action` over any other follower action at `strategy`.
    pub margin: f64,
    /// Follower actions that are also best responses to `strategy`.
    pub ties: Vec<usize>,
}

/// `SV = max_b OSV(b, 0)`; ties go to the lowest `b`. Among optimal leader
/// strategies the one giving the follower's action the widest best-response
/// margin is returned, so a learning follower is pulled toward it.
pub fn stackelberg_value(game: &BimatrixGame) -> Result<StackelbergSolution> {
    let mut best: Option<(usize, f64)> = None;
    for b in 0..game.cols() {
        if let Osv::Forceable { value, .. } = osv(game, b, 0.0)? {
            if best.map_or(true, |(_, v)| value > v + 1e-9) {
                best = Some((b, value));
            }
        }
    }
    let (b, value) = best.ok_or_else(|| Error::LinearProgram("no follower action is a best response".into()))?;
    let (strategy, margin) = widest_margin(game, b, value)?;
    let ties = (0..game.cols())
        .filter(|&bp| {
            let gap: f64 = (0..game.rows()).map(|a| strategy.prob(a) * (game.col_payoff(bp, a) - game.col_payoff(b, a))).sum();
            bp != b && gap >= -1e-9
        })
        .collect();
    Ok(StackelbergSolution { value, strategy, follower_action: b, margin, ties })
}

fn widest_margin(game: &BimatrixGame, b: usize, value: f64) -> Result<(ActionDistribution, f64)> {
    let m = game.rows();
    let (_, span) = game.payoff_span(Player::Col);
    // Variables (x_1..x_m, δ).
    let mut obj = vec![0.0; m + 1];
    obj[m] = 1.0;
    let mut simplex_row = vec![1.0; m + 1];
    simplex_row[m] = 0.0;
    let mut lp = LinearProgram::new(obj).eq(simplex_row, 1.0);
    let mut floor: Vec<f64> = leader_column(game, b).iter().map(|u| -u).collect();
    floor.push(0.0);
    lp = lp.le(floor, -value + 1e-9);
    let mut cap = vec![0.0; m + 1];
    cap[m] = 1.0;
    lp = lp.le(cap, span);
    for mut row in regret_rows(game, b) {
        row.push(1.0);
        lp = lp.le(row, 0.0);
    }
    match lp.solve()? {
        LpOutcome::Optimal { x, .. } => Ok((strategy_from(&x[..m])?, x[m])),
        _ => match osv(game, b, 0.0)? {
            Osv::Forceable { strategy, .. } => Ok((strategy, 0.0)),
            Osv::Unforceable => Err(Error::LinearProgram("Stackelberg action became unforceable".into())),
        },
    }
}

/// Smallest `C` with `OSV(b, r) ≤ SV + C·r` for all `b` and `r ≥ 0`.
///
/// For each `b` this is `sup (x·U_L(·,b) − SV) / reg_b(x)` over leader
/// strategies, with `reg_b(x)` the follower's regret for playing `b`. The
/// Charnes–Cooper substitution `y = x/reg, t = 1/reg` makes it the LP
/// `max y·U_L(·,b) − SV·t` subject to `Σy = t`, `y·(U_F(b') − U_F(b)) ≤ 1`.
pub fn osv_envelope_constant(game: &BimatrixGame) -> Result<f64> {
    let sv = stackelberg_value(game)?.value;
    let m = game.rows();
    let mut c: f64 = 0.0;
    for b in 0..game.cols() {
        let mut obj = leader_column(game, b);
        obj.push(-sv);
        let mut sum_row = vec![1.0; m + 1];
        sum_row[m] = -1.0;
        let mut lp = LinearProgram::new(obj).eq(sum_row, 0.0);
        for mut row in regret_rows(game, b) {
            row.push(0.0);
            lp = lp.le(row, 1.0);
        }
        match lp.solve()? {
            LpOutcome::Optimal { value, .. } => c = c.max(value),
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => {
                return Err(Error::LinearProgram(format!("envelope slope unbounded for follower action {b}")));
            }
        }
    }
    Ok(c)
}

/// Dense grid over the leader simplex; an independent check on [`osv`].
pub fn osv_grid(game: &BimatrixGame, b: usize, r: f64, steps: usize) -> f64 {
    let m = game.rows();
    let rows = regret_rows(game, b);
    let leader = leader_column(game, b);
    let mut best = f64::NEG_INFINITY;
    let mut counts = vec![0usize; m];
    loop {
        let used: usize = counts[..m - 1].iter().sum();
        if used <= steps {
            counts[m - 1] = steps - used;
            let x: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
            let ok = rows.iter().all(|row| row.iter().zip(&x).map(|(d, p)| d * p).sum::<f64>() <= r + 1e-12);
            if ok {
                let v: f64 = leader.iter().zip(&x).map(|(u, p)| u * p).sum();
                best = best.max(v);
            }
        }
        let mut pos = 0;
        loop {
            if pos + 1 >= m {
                return best;
            }
            counts[pos] += 1;
            if counts[..m - 1].iter().sum::<usize>() <= steps {
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}

/// The game used to show that mean-based followers can be manipulated:
/// leader Up/Down, follower Left/Mid/Right.
pub fn manipulation_game(epsilon: f64) -> Result<BimatrixGame> {
    BimatrixGame::new(vec![vec![0.0, -2.0, -2.0], vec![0.0, -2.0, 2.0]], vec![vec![epsilon, -1.0, 0.0], vec![-1.0, 1.0, 0.0]])?
        .with_labels(vec!["Up".into(), "Down".into()], vec!["Left".into(), "Mid".into(), "Right".into()])
}

/// Leader Up/Down, follower Left/Right; `C = 1/ε` while `SV = 0`.
pub fn slow_rate_game(epsilon: f64) -> Result<BimatrixGame> {
    BimatrixGame::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![vec![0.0, epsilon], vec![0.0, 0.0]])?
        .with_labels(vec!["Up".into(), "Down".into()], vec!["Left".into(), "Right".into()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    /// Leader mixed strategy during the phase.
    pub strategy: Vec<f64>,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationSchedule {
    pub phases: Vec<Phase>,
}

impl ManipulationSchedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        let s = Self { phases };
        s.validate(None)?;
        Ok(s)
    }

    pub fn constant(strategy: &ActionDistribution) -> Self {
        Self { phases: vec![Phase { strategy: strategy.probs().to_vec(), fraction: 1.0 }] }
    }

    /// Pure action `first` for half the rounds, then `second`.
    pub fn switch(k: usize, first: usize, second: usize) -> Self {
        let pm = |a| ActionDistribution::point_mass(k, a).probs().to_vec();
        Self { phases: vec![Phase { strategy: pm(first), fraction: 0.5 }, Phase { strategy: pm(second), fraction: 0.5 }] }
    }

    fn validate(&self, k: Option<usize>) -> Result<Vec<ActionDistribution>> {
        if self.phases.is_empty() {
            return Err(Error::Config("schedule has no phases".into()));
        }
        let total: f64 = self.phases.iter().map(|p| p.fraction).sum();
        if self.phases.iter().any(|p| !(p.fraction >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("phase fractions must be non-negative and sum to 1, got {total}")));
        }
        self.phases
            .iter()
            .map(|p| {
                if let Some(k) = k {
                    if p.strategy.len() != k {
                        return Err(Error::LengthMismatch { expected: k, got: p.strategy.len() });
                    }
                }
                ActionDistribution::new(p.strategy.clone())
            })
            .collect()
    }

    /// Leader strategy in round `i` (0-based) of `n`.
    fn phase_ends(&self, n: usize) -> Vec<usize> {
        let mut acc = 0.0;
        self.phases
            .iter()
            .map(|p| {
                acc += p.fraction;
                ((acc * n as f64).round() as usize).min(n)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationReport {
    /// Leader's per-round payoff, in expectation over the follower's distributions.
    pub leader_avg: f64,
    /// Same, over the last tenth of the rounds.
    pub leader_tail_avg: f64,
    pub sv: f64,
    pub osv_constant: f64,
    /// Follower per-round regrets, distribution mode, original payoff units.
    pub follower_bih_regret: f64,
    pub follower_swap_regret: f64,
    pub rounds: usize,
}

impl ManipulationReport {
    /// `SV + C·r̂` with `r̂` the follower's swap regret.
    pub fn swap_ceiling(&self) -> f64 {
        self.sv + self.osv_constant * self.follower_swap_regret.max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct ManipulationRun {
    pub report: ManipulationReport,
    pub follower_log: PlayLog,
    pub leader_actions: Vec<usize>,
}

/// Leader follows the schedule; the follower learns from its full payoff
/// column against the leader's realized action (payoffs shifted into `[0, range]`).
pub fn run_manipulation(
    game: &BimatrixGame,
    schedule: &ManipulationSchedule,
    follower: &mut dyn Learner,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<ManipulationRun> {
    if follower.num_actions() != game.cols() {
        return Err(Error::LengthMismatch { expected: game.cols(), got: follower.num_actions() });
    }
    if n == 0 {
        return Err(Error::Domain("need at least one round".into()));
    }
    let strategies = schedule.validate(Some(game.rows()))?;
    let ends = schedule.phase_ends(n);
    let (lo, span) = game.payoff_span(Player::Col);
    let mut log = PlayLog::new(game.cols(), span)?;
    let mut leader_actions = Vec::with_capacity(n);
    let tail_start = n - (n / 10).max(1);
    let (mut total, mut tail) = (0.0, 0.0);
    let mut phase = 0;
    for i in 0..n {
        while phase + 1 < ends.len() && i >= ends[phase] {
            phase += 1;
        }
        let q = follower.distribution(rng)?;
        let a = strategies[phase].sample(rng);
        let b = q.sample(rng);
        let payoff: f64 = (0..game.cols()).map(|bb| q.prob(bb) * game.row_payoff(a, bb)).sum();
        total += payoff;
        if i >= tail_start {
            tail += payoff;
        }
        let u: Vec<f64> = game.col_vector(a).iter().map(|x| (x - lo).min(span)).collect();
        let u = PayoffVector::new(u, span)?;
        follower.observe(&u)?;
        log.push(Round {
            distribution: q,
            action: b,
            feedback: Feedback::Full(u.into_entries()),
            exploration: None,
            residual: follower.last_residual(),
        })?;
        leader_actions.push(a);
    }
    let bih = best_in_hindsight_regret(&log, RegretMode::Distribution)?;
    let swap = swap_regret(&log, RegretMode::Distribution)?;
    let report = ManipulationReport {
        leader_avg: total / n as f64,
        leader_tail_avg: tail / (n - tail_start) as f64,
        sv: stackelberg_value(game)?.value,
        osv_constant: osv_envelope_constant(game)?,
        follower_bih_regret: bih.per_round_regret,
        follower_swap_regret: swap.per_round_regret,
        rounds: n,
    };
    Ok(ManipulationRun { report, follower_log: log, leader_actions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBasedReport {
    pub holds: bool,
    /// `(round, action)` pairs, rounds from 1.
    pub violations: Vec<(usize, usize)>,
}

/// Flags, in each round, actions whose cumulative payoff so far trails the
/// best action's by more than `γ·n` (`n` the log length) yet received
/// probability above `γ`.
pub fn mean_based_check(log: &PlayLog, gamma: f64) -> Result<MeanBasedReport> {
    if !log.is_full_feedback() {
        return Err(Error::BanditLog);
    }
    let k = log.num_actions();
    let n = log.len() as f64;
    let mut totals = vec![0.0; k];
    let mut violations = Vec::new();
    for (i, r) in log.rounds().iter().enumerate() {
        let best = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for a in 0..k {
            if best - totals[a] > gamma * n && r.sampling_probs().prob(a) > gamma {
                violations.push((i + 1, a));
            }
        }
        for (t, u) in totals.iter_mut().zip(r.full_payoffs().expect("full feedback")) {
            *t += u;
        }
    }
    Ok(MeanBasedReport { holds: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{ew_horizon_epsilon, OnlineLearner};
    use crate::streams::{run_full_feedback, StreamSpec};
    use crate::swap::Sda;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slow_rate_game_values() {
        let eps = 0.01;
        let g = slow_rate_game(eps).unwrap();
        for r in [0.0, 0.001, 0.005, 0.01] {
            assert!((osv(&g, 0, r).unwrap().value() - r / eps).abs() < 1e-9);
        }
        assert!(stackelberg_value(&g).unwrap().value.abs() < 1e-9);
        assert!((osv_envelope_constant(&g).unwrap() - 1.0 / eps).abs() < 1e-6);
    }

    #[test]
    fn manipulation_game_values() {
        let g = manipulation_game(0.1).unwrap();
        let sv = stackelberg_value(&g).unwrap();
        assert!(sv.value.abs() < 1e-9);
        assert_eq!(sv.follower_action, 0);
        assert!((sv.strategy.prob(0) - 1.0).abs() < 1e-9);
        assert!((sv.margin - 0.1).abs() < 1e-9);
        // OSV(Right, r) = 2r near zero, and Mid pays −2 for the leader.
        assert!((osv(&g, 2, 0.05).unwrap().value() - 0.1).abs() < 1e-9);
        assert!((osv(&g, 1, 0.0).unwrap().value() + 2.0).abs() < 1e-9);
        assert!((osv_envelope_constant(&g).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn large_tolerance_is_vacuous() {
        let g = manipulation_game(0.1).unwrap();
        for b in 0..3 {
            let best = (0..2).map(|a| g.row_payoff(a, b)).fold(f64::NEG_INFINITY, f64::max);
            assert!((osv(&g, b, 1e6).unwrap().value() - best).abs() < 1e-9);
        }
    }

    #[test]
    fn dominated_action_is_unforceable() {
        // Follower's second column is strictly worse against every leader row.
        let g = BimatrixGame::new(vec![vec![0.0, 5.0], vec![1.0, 5.0]], vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(osv(&g, 1, 0.5).unwrap(), Osv::Unforceable);
        assert!(osv(&g, 1, 1.0).unwrap().value() == 5.0);
        let sv = stackelberg_value(&g).unwrap();
        assert!((sv.value - 1.0).abs() < 1e-9);
        assert!(osv(&g, 3, 0.0).is_err() && osv(&g, 0, -1.0).is_err());
    }

    #[test]
    fn dominant_row_gives_its_best_column() {
        let g = BimatrixGame::new(vec![vec![4.0, 3.0], vec![1.0, 0.0]], vec![vec![2.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert!((stackelberg_value(&g).unwrap().value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn constant_osv_gives_zero_constant() {
        let g = BimatrixGame::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(osv_envelope_constant(&g).unwrap().abs() < 1e-9);
    }

    #[test]
    fn lp_matches_grid_on_small_games() {
        let games = [manipulation_game(0.1).unwrap(), slow_rate_game(0.2).unwrap(), BimatrixGame::no_tie_rps()];
        for g in &games {
            let steps = if g.rows() == 2 { 10_000 } else { 1_800 };
            for b in 0..g.cols() {
                for r in [0.0, 0.05, 0.3, 1.0] {
                    let lp = osv(g, b, r).unwrap().value();
                    let grid = osv_grid(g, b, r, steps);
                    if grid.is_finite() {
                        assert!(grid <= lp + 1e-9 && lp - grid <= 1e-3 * (1.0 + lp.abs()), "b={b} r={r}: lp {lp} grid {grid}");
                    }
                }
            }
        }
    }

    #[test]
    fn envelope_bounds_grid_samples() {
        let g = manipulation_game(0.1).unwrap();
        let sv = stackelberg_value(&g).unwrap().value;
        let c = osv_envelope_constant(&g).unwrap();
        for b in 0..3 {
            for i in 0..=100 {
                let r = i as f64 / 100.0;
                assert!(osv(&g, b, r).unwrap().value() <= sv + c * r + 1e-9);
            }
            // Concave and non-decreasing in r.
            let vals: Vec<f64> = (0..=20).map(|i| osv(&g, b, i as f64 / 20.0).unwrap().value()).collect();
            for w in vals.windows(3) {
                assert!(w[1] >= w[0] - 1e-9 && w[1] - w[0] >= w[2] - w[1] - 1e-9);
            }
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(ManipulationSchedule::new(vec![Phase { strategy: vec![1.0, 0.0], fraction: 0.7 }]).is_err());
        let s = ManipulationSchedule::switch(2, 0, 1);
        assert_eq!(s.phase_ends(11), vec![6, 11]);
    }

    #[test]
    fn sda_follower_respects_the_swap_ceiling() {
        let g = manipulation_game(0.1).unwrap();
        let n = 5_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (_, span) = g.payoff_span(Player::Col);
        let mut sda = Sda::ew_for_horizon(3, span, n).unwrap();
        let run = run_manipulation(&g, &ManipulationSchedule::switch(2, 0, 1), &mut sda, n, &mut rng).unwrap();
        assert!(run.report.leader_avg <= run.report.swap_ceiling() + 1e-9);
    }

    #[test]
    fn mean_based_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ftl = OnlineLearner::ftl(3, 1.0).unwrap();
        let mut src = StreamSpec::Uniform { k: 3, h: 1.0 }.build().unwrap();
        let log = run_full_feedback(&mut ftl, src.as_mut(), 500, &mut rng).unwrap();
        for g in [1e-3, 0.01, 0.1] {
            assert!(mean_based_check(&log, g).unwrap().holds);
        }

        let (k, n) = (3, 5_000);
        let eps = ew_horizon_epsilon(k, n);
        let mut ew = OnlineLearner::ew(k, 1.0, eps).unwrap();
        let mut src = StreamSpec::Bernoulli { means: vec![0.2, 0.5, 0.8], h: 1.0 }.build().unwrap();
        let log = run_full_feedback(&mut ew, src.as_mut(), n, &mut rng).unwrap();
        assert!(mean_based_check(&log, 5.0 * eps).unwrap().holds);

        let mut worst = PlayLog::new(2, 1.0).unwrap();
        for _ in 0..100 {
            worst.push_full(ActionDistribution::point_mass(2, 1), 1, &PayoffVector::new(vec![1.0, 0.0], 1.0).unwrap()).unwrap();
        }
        assert!(!mean_based_check(&worst, 0.05).unwrap().holds);
    }
}
