//! Repeated bimatrix games: the full-feedback harness, empirical joint
//! distributions, CE/CCE certification and best-response dynamics.
//!
//! Epsilon values are returned unfloored; a CCE check can come out negative
//! when every fixed deviation is strictly worse. Use `.max(0.0)` for reports.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Learner;
use crate::types::{argmax, ActionDistribution, Feedback, PayoffVector, PlayLog, Round};

/// `row[a][b] = U_R(a, b)`, `col[a][b] = U_C(b, a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameData", into = "GameData")]
pub struct BimatrixGame {
    row: Vec<Vec<f64>>,
    col: Vec<Vec<f64>>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameData {
    row: Vec<Vec<f64>>,
    col: Vec<Vec<f64>>,
    #[serde(default)]
    row_labels: Vec<String>,
    #[serde(default)]
    col_labels: Vec<String>,
}

impl TryFrom<GameData> for BimatrixGame {
    type Error = Error;

    fn try_from(d: GameData) -> Result<Self> {
        let mut g = BimatrixGame::new(d.row, d.col)?;
        if !d.row_labels.is_empty() || !d.col_labels.is_empty() {
            g = g.with_labels(d.row_labels, d.col_labels)?;
        }
        Ok(g)
    }
}

impl From<BimatrixGame> for GameData {
    fn from(g: BimatrixGame) -> Self {
        Self { row: g.row, col: g.col, row_labels: g.row_labels, col_labels: g.col_labels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    Row,
    Col,
}

impl BimatrixGame {
    pub fn new(row: Vec<Vec<f64>>, col: Vec<Vec<f64>>) -> Result<Self> {
        let m = row.len();
        let k = row.first().map_or(0, Vec::len);
        if m == 0 || k == 0 {
            return Err(Error::Config("game needs at least one action per player".into()));
        }
        if col.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: col.len() });
        }
        for r in row.iter().chain(&col) {
            if r.len() != k {
                return Err(Error::LengthMismatch { expected: k, got: r.len() });
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config("game payoffs must be finite".into()));
            }
        }
        let row_labels = (1..=m).map(|i| format!("a{i}")).collect();
        let col_labels = (1..=k).map(|j| format!("b{j}")).collect();
        Ok(Self { row, col, row_labels, col_labels })
    }

    pub fn with_labels(mut self, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        if row_labels.len() != self.rows() {
            return Err(Error::LengthMismatch { expected: self.rows(), got: row_labels.len() });
        }
        if col_labels.len() != self.cols() {
            return Err(Error::LengthMismatch { expected: self.cols(), got: col_labels.len() });
        }
        self.row_labels = row_labels;
        self.col_labels = col_labels;
        Ok(self)
    }

    /// Row chooses among R, P, S and so does Column; a tie costs both 6.
    pub fn no_tie_rps() -> Self {
        let row = vec![vec![-6.0, -1.0, 1.0], vec![1.0, -6.0, -1.0], vec![-1.0, 1.0, -6.0]];
        let col = vec![vec![-6.0, 1.0, -1.0], vec![-1.0, -6.0, 1.0], vec![1.0, -1.0, -6.0]];
        let labels = || ["R", "P", "S"].map(String::from).to_vec();
        Self::new(row, col).and_then(|g| g.with_labels(labels(), labels())).expect("valid game")
    }

    pub fn matching_pennies() -> Self {
        let row = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        let col = vec![vec![-1.0, 1.0], vec![1.0, -1.0]];
        let labels = || ["H", "T"].map(String::from).to_vec();
        Self::new(row, col).and_then(|g| g.with_labels(labels(), labels())).expect("valid game")
    }

    pub fn rows(&self) -> usize {
        self.row.len()
    }

    pub fn cols(&self) -> usize {
        self.row[0].len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn row_payoff(&self, a: usize, b: usize) -> f64 {
        self.row[a][b]
    }

    /// `U_C(b, a)`.
    pub fn col_payoff(&self, b: usize, a: usize) -> f64 {
        self.col[a][b]
    }

    pub fn row_matrix(&self) -> &[Vec<f64>] {
        &self.row
    }

    pub fn col_matrix(&self) -> &[Vec<f64>] {
        &self.col
    }

    /// `U → c·U + d` applied to both players.
    pub fn affine(&self, c: f64, d: f64) -> Result<Self> {
        let f = |m: &[Vec<f64>]| m.iter().map(|r| r.iter().map(|x| c * x + d).collect()).collect();
        Self::new(f(&self.row), f(&self.col))?.with_labels(self.row_labels.clone(), self.col_labels.clone())
    }

    pub fn transpose(&self) -> Self {
        let t = |m: &[Vec<f64>]| (0..self.cols()).map(|b| (0..self.rows()).map(|a| m[a][b]).collect()).collect();
        Self { row: t(&self.col), col: t(&self.row), row_labels: self.col_labels.clone(), col_labels: self.row_labels.clone() }
    }

    /// `(min, max - min)` of a player's payoffs; the range is 1 for constant payoffs.
    pub fn payoff_span(&self, player: Player) -> (f64, f64) {
        let m = match player {
            Player::Row => &self.row,
            Player::Col => &self.col,
        };
        let lo = m.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let hi = m.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, if hi > lo { hi - lo } else { 1.0 })
    }

    pub fn row_best_response(&self, b: usize) -> usize {
        argmax(&(0..self.rows()).map(|a| self.row[a][b]).collect::<Vec<_>>())
    }

    pub fn col_best_response(&self, a: usize) -> usize {
        argmax(&self.col[a])
    }

    /// Row's payoffs for every own action against `b`.
    pub fn row_vector(&self, b: usize) -> Vec<f64> {
        (0..self.rows()).map(|a| self.row[a][b]).collect()
    }

    /// Column's payoffs for every own action against `a`.
    pub fn col_vector(&self, a: usize) -> Vec<f64> {
        self.col[a].clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    weights: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let k = weights.first().map_or(0, Vec::len);
        if weights.is_empty() || k == 0 || weights.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidDistribution("joint must be a non-empty rectangular matrix".into()));
        }
        if weights.iter().flatten().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution("joint weights must be non-negative".into()));
        }
        let s: f64 = weights.iter().flatten().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("joint sums to {s}")));
        }
        Ok(Self { weights })
    }

    /// Uniform over the listed pairs, counting repeats.
    pub fn uniform_over(rows: usize, cols: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("no pairs".into()));
        }
        let mut w = vec![vec![0.0; cols]; rows];
        for &(a, b) in pairs {
            if a >= rows || b >= cols {
                return Err(Error::Domain(format!("pair ({a}, {b}) outside the game")));
            }
            w[a][b] += 1.0;
        }
        Self::from_masses(w)
    }

    pub fn product(p: &ActionDistribution, q: &ActionDistribution) -> Self {
        Self { weights: p.probs().iter().map(|x| q.probs().iter().map(|y| x * y).collect()).collect() }
    }

    fn from_masses(mut w: Vec<Vec<f64>>) -> Result<Self> {
        let s: f64 = w.iter().flatten().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidDistribution("zero total mass".into()));
        }
        for x in w.iter_mut().flatten() {
            *x /= s;
        }
        Self::new(w)
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.weights[a][b]
    }

    fn check(&self, game: &BimatrixGame) -> Result<()> {
        if self.weights.len() != game.rows() || self.weights[0].len() != game.cols() {
            return Err(Error::LengthMismatch { expected: game.rows() * game.cols(), got: self.weights.len() * self.weights[0].len() });
        }
        Ok(())
    }
}

/// Output of [`play_repeated`].
#[derive(Debug, Clone)]
pub struct GameRun {
    /// Row's log with payoffs shifted by its minimum payoff.
    pub row_log: PlayLog,
    pub col_log: PlayLog,
    /// Empirical distribution of realized pairs.
    pub joint: JointDistribution,
    /// `(1/n) Σ p^i ⊗ q^i`.
    pub product_joint: JointDistribution,
    pub pairs: Vec<(usize, usize)>,
}

impl GameRun {
    /// The joint whose CCE/CE gaps equal `player`'s distribution-mode regrets:
    /// the player's own distributions against the opponent's realized actions.
    pub fn induced_joint(&self, player: Player) -> Result<JointDistribution> {
        let (m, k) = (self.row_log.num_actions(), self.col_log.num_actions());
        let mut w = vec![vec![0.0; k]; m];
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            match player {
                Player::Row => {
                    for (x, p) in self.row_log.rounds()[i].distribution.probs().iter().enumerate() {
                        w[x][b] += p;
                    }
                }
                Player::Col => {
                    for (y, q) in self.col_log.rounds()[i].distribution.probs().iter().enumerate() {
                        w[a][y] += q;
                    }
                }
            }
        }
        JointDistribution::from_masses(w)
    }
}

/// Plays `n` rounds; each learner sees its full payoff vector against the opponent's realized action.
///
/// Learners receive payoffs shifted into `[0, range]`, so they should be built
/// with ceiling `game.payoff_span(player).1`.
pub fn play_repeated(
    game: &BimatrixGame,
    row_learner: &mut dyn Learner,
    col_learner: &mut dyn Learner,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<GameRun> {
    if row_learner.num_actions() != game.rows() {
        return Err(Error::LengthMismatch { expected: game.rows(), got: row_learner.num_actions() });
    }
    if col_learner.num_actions() != game.cols() {
        return Err(Error::LengthMismatch { expected: game.cols(), got: col_learner.num_actions() });
    }
    if n == 0 {
        return Err(Error::Domain("need at least one round".into()));
    }
    let (row_lo, row_h) = game.payoff_span(Player::Row);
    let (col_lo, col_h) = game.payoff_span(Player::Col);
    let mut row_log = PlayLog::new(game.rows(), row_h)?;
    let mut col_log = PlayLog::new(game.cols(), col_h)?;
    let mut pairs = Vec::with_capacity(n);
    let mut counts = vec![vec![0.0; game.cols()]; game.rows()];
    let mut product = vec![vec![0.0; game.cols()]; game.rows()];
    for _ in 0..n {
        let p = row_learner.distribution(rng)?;
        let q = col_learner.distribution(rng)?;
        let a = p.sample(rng);
        let b = q.sample(rng);
        let u_row: Vec<f64> = game.row_vector(b).iter().map(|x| (x - row_lo).min(row_h)).collect();
        let u_col: Vec<f64> = game.col_vector(a).iter().map(|x| (x - col_lo).min(col_h)).collect();
        let u_row = PayoffVector::new(u_row, row_h)?;
        let u_col = PayoffVector::new(u_col, col_h)?;
        row_learner.observe(&u_row)?;
        col_learner.observe(&u_col)?;
        for (x, px) in p.probs().iter().enumerate() {
            for (y, qy) in q.probs().iter().enumerate() {
                product[x][y] += px * qy;
            }
        }
        counts[a][b] += 1.0;
        pairs.push((a, b));
        row_log.push(Round {
            distribution: p,
            action: a,
            feedback: Feedback::Full(u_row.into_entries()),
            exploration: None,
            residual: row_learner.last_residual(),
        })?;
        col_log.push(Round {
            distribution: q,
            action: b,
            feedback: Feedback::Full(u_col.into_entries()),
            exploration: None,
            residual: col_learner.last_residual(),
        })?;
    }
    Ok(GameRun {
        row_log,
        col_log,
        joint: JointDistribution::from_masses(counts)?,
        product_joint: JointDistribution::from_masses(product)?,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CceReport {
    pub row: f64,
    pub col: f64,
    pub row_deviation: usize,
    pub col_deviation: usize,
}

impl CceReport {
    pub fn is_equilibrium(&self, tol: f64) -> bool {
        self.row <= tol && self.col <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeReport {
    pub row: f64,
    pub col: f64,
    pub row_map: Vec<usize>,
    pub col_map: Vec<usize>,
}

impl CeReport {
    pub fn is_equilibrium(&self, tol: f64) -> bool {
        self.row <= tol && self.col <= tol
    }
}

/// `(gain table g[a][a'], realized value)` for one player: `g[a][a']` is the mass-weighted
/// change from replacing recommendation `a` by `a'`.
fn deviation_gains(game: &BimatrixGame, joint: &JointDistribution, player: Player) -> Vec<Vec<f64>> {
    let (m, k) = (game.rows(), game.cols());
    match player {
        Player::Row => (0..m)
            .map(|a| (0..m).map(|d| (0..k).map(|b| joint.get(a, b) * (game.row_payoff(d, b) - game.row_payoff(a, b))).sum()).collect())
            .collect(),
        Player::Col => (0..k)
            .map(|b| (0..k).map(|d| (0..m).map(|a| joint.get(a, b) * (game.col_payoff(d, a) - game.col_payoff(b, a))).sum()).collect())
            .collect(),
    }
}

fn cce_side(gains: &[Vec<f64>]) -> (f64, usize) {
    let k = gains.len();
    let totals: Vec<f64> = (0..k).map(|d| gains.iter().map(|g| g[d]).sum()).collect();
    let d = argmax(&totals);
    (totals[d], d)
}

fn ce_side(gains: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let map: Vec<usize> = gains.iter().map(|g| argmax(g)).collect();
    (gains.iter().zip(&map).map(|(g, &d)| g[d]).sum(), map)
}

/// Best ex-ante fixed deviation gain per player.
pub fn epsilon_cce(game: &BimatrixGame, joint: &JointDistribution) -> Result<CceReport> {
    joint.check(game)?;
    let (row, row_deviation) = cce_side(&deviation_gains(game, joint, Player::Row));
    let (col, col_deviation) = cce_side(&deviation_gains(game, joint, Player::Col));
    Ok(CceReport { row, col, row_deviation, col_deviation })
}

/// Best swap-map gain per player, optimized per recommended action.
pub fn epsilon_ce(game: &BimatrixGame, joint: &JointDistribution) -> Result<CeReport> {
    joint.check(game)?;
    let (row, row_map) = ce_side(&deviation_gains(game, joint, Player::Row));
    let (col, col_map) = ce_side(&deviation_gains(game, joint, Player::Col));
    Ok(CeReport { row, col, row_map, col_map })
}

/// Simultaneous best responses; `pairs[0]` is `start`, `pairs.len() == n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace {
    pub pairs: Vec<(usize, usize)>,
    pub joint: JointDistribution,
}

pub fn best_response_dynamics(game: &BimatrixGame, start: (usize, usize), n: usize) -> Result<DynamicsTrace> {
    if start.0 >= game.rows() || start.1 >= game.cols() {
        return Err(Error::Domain(format!("start pair {start:?} outside the game")));
    }
    if n == 0 {
        return Err(Error::Domain("need at least one round".into()));
    }
    let mut pairs = Vec::with_capacity(n);
    let mut cur = start;
    for _ in 0..n {
        pairs.push(cur);
        cur = (game.row_best_response(cur.1), game.col_best_response(cur.0));
    }
    let joint = JointDistribution::uniform_over(game.rows(), game.cols(), &pairs)?;
    Ok(DynamicsTrace { pairs, joint })
}
