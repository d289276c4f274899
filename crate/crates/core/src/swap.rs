//! Stationary Delegation: `k` delegate learners whose recommendations form a
//! row-stochastic matrix; play its stationary distribution.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::learners::{ew_horizon_epsilon, Learner, LearnerKind, LearnerState, LearningRate};
use crate::types::{ActionDistribution, PayoffVector};

pub const STATIONARY_TOL: f64 = 1e-10;

/// Row `a` is delegate `a`'s recommendation.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationMatrix {
    rows: Vec<ActionDistribution>,
}

impl RecommendationMatrix {
    pub fn new(rows: Vec<ActionDistribution>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::Domain("empty recommendation matrix".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::LengthMismatch { expected: k, got: r.len() });
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(ActionDistribution::new).collect::<Result<_>>()?)
    }

    pub fn rows(&self) -> &[ActionDistribution] {
        &self.rows
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// `αA`.
    pub fn left_multiply(&self, alpha: &[f64]) -> Vec<f64> {
        let k = self.size();
        let mut out = vec![0.0; k];
        for (w, row) in alpha.iter().zip(&self.rows) {
            for (o, p) in out.iter_mut().zip(row.probs()) {
                *o += w * p;
            }
        }
        out
    }

    /// `‖αA − α‖∞`.
    pub fn residual(&self, alpha: &[f64]) -> f64 {
        self.left_multiply(alpha).iter().zip(alpha).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// Solves `(Aᵀ − I)α = 0, Σα = 1` directly; falls back to lazy power
/// iteration from uniform when that system is singular (several closed
/// classes), which makes the choice among stationary distributions deterministic.
pub fn stationary_distribution(m: &RecommendationMatrix, tol: f64) -> Result<(ActionDistribution, f64)> {
    let k = m.size();
    if k == 1 {
        return Ok((ActionDistribution::uniform(1), 0.0));
    }
    if let Some(alpha) = direct_solve(m) {
        let r = m.residual(&alpha);
        if r <= tol {
            return Ok((ActionDistribution::new(alpha)?, r));
        }
    }
    power_iteration(m, tol)
}

fn normalize(mut alpha: Vec<f64>) -> Option<Vec<f64>> {
    if alpha.iter().any(|x| !x.is_finite() || *x < -1e-9) {
        return None;
    }
    for x in alpha.iter_mut() {
        *x = x.max(0.0);
    }
    let s: f64 = alpha.iter().sum();
    if s <= 0.0 {
        return None;
    }
    for x in alpha.iter_mut() {
        *x /= s;
    }
    Some(alpha)
}

fn direct_solve(m: &RecommendationMatrix) -> Option<Vec<f64>> {
    let k = m.size();
    // Row j of the system: Σ_a A[a][j]·α_a − α_j = 0; last row replaced by Σα = 1.
    let mut sys = vec![vec![0.0; k + 1]; k];
    for (j, eq) in sys.iter_mut().enumerate().take(k - 1) {
        for (a, row) in m.rows().iter().enumerate() {
            eq[a] = row.prob(j);
        }
        eq[j] -= 1.0;
    }
    sys[k - 1] = vec![1.0; k + 1];

    for col in 0..k {
        let pivot = (col..k).max_by(|&x, &y| sys[x][col].abs().total_cmp(&sys[y][col].abs()))?;
        if sys[pivot][col].abs() < 1e-12 {
            return None;
        }
        sys.swap(col, pivot);
        for r in 0..k {
            if r != col {
                let f = sys[r][col] / sys[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        sys[r][c] -= f * sys[col][c];
                    }
                }
            }
        }
    }
    normalize((0..k).map(|j| sys[j][k] / sys[j][j]).collect())
}

fn power_iteration(m: &RecommendationMatrix, tol: f64) -> Result<(ActionDistribution, f64)> {
    let k = m.size();
    let mut alpha = vec![1.0 / k as f64; k];
    let mut r = m.residual(&alpha);
    for _ in 0..1_000_000 {
        if r <= tol {
            break;
        }
        let next = m.left_multiply(&alpha);
        for (a, n) in alpha.iter_mut().zip(next) {
            *a = 0.5 * (*a + n);
        }
        r = m.residual(&alpha);
    }
    if r > tol {
        return Err(Error::NonConvergence { residual: r });
    }
    let alpha = normalize(alpha).ok_or(Error::NonConvergence { residual: r })?;
    let r = m.residual(&alpha);
    Ok((ActionDistribution::new(alpha)?, r))
}

/// One SDA decision, sampled through the delegation path.
#[derive(Debug, Clone, PartialEq)]
pub struct SdaDecision {
    pub distribution: ActionDistribution,
    pub action: usize,
    pub delegate: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Sda {
    delegates: Vec<LearnerState>,
    last_stationary: ActionDistribution,
    last_residual: Option<f64>,
    tol: f64,
}

impl Sda {
    pub fn new(delegates: Vec<LearnerState>) -> Result<Self> {
        let k = delegates.len();
        if k == 0 {
            return Err(Error::Config("SDA needs at least one delegate".into()));
        }
        if let Some(d) = delegates.iter().find(|d| d.num_actions() != k) {
            return Err(Error::LengthMismatch { expected: k, got: d.num_actions() });
        }
        let c = delegates[0].ceiling();
        if delegates.iter().any(|d| d.ceiling() != c) {
            return Err(Error::Config("SDA delegates must share a payoff ceiling".into()));
        }
        Ok(Self { delegates, last_stationary: ActionDistribution::uniform(k), last_residual: None, tol: STATIONARY_TOL })
    }

    /// EW delegates with a fixed rate.
    pub fn ew(k: usize, ceiling: f64, epsilon: f64) -> Result<Self> {
        let d = LearnerState::new(LearnerKind::Ew, k, ceiling, LearningRate::Fixed(epsilon))?;
        Self::new(vec![d; k])
    }

    /// EW delegates with the horizon-tuned rate `√(ln k / n)`.
    pub fn ew_for_horizon(k: usize, ceiling: f64, n: usize) -> Result<Self> {
        Self::ew(k, ceiling, ew_horizon_epsilon(k, n))
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn delegates(&self) -> &[LearnerState] {
        &self.delegates
    }

    pub fn last_stationary(&self) -> &ActionDistribution {
        &self.last_stationary
    }

    pub fn recommendation_matrix(&self) -> Result<RecommendationMatrix> {
        RecommendationMatrix::new(self.delegates.iter().map(LearnerState::step).collect::<Result<_>>()?)
    }

    /// Stationary distribution of the current recommendations; fixes the weights for the next update.
    pub fn stationary(&mut self) -> Result<(ActionDistribution, RecommendationMatrix)> {
        let m = self.recommendation_matrix()?;
        let (alpha, r) = stationary_distribution(&m, self.tol)?;
        self.last_stationary = alpha.clone();
        self.last_residual = Some(r);
        Ok((alpha, m))
    }

    /// Picks delegate `a` with probability `α_a`, then an action from its recommendation.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<SdaDecision> {
        let (alpha, m) = self.stationary()?;
        let delegate = alpha.sample(rng);
        let action = m.rows()[delegate].sample(rng);
        Ok(SdaDecision { distribution: alpha, action, delegate, residual: self.last_residual.unwrap_or(0.0) })
    }

    /// Delegate `a` receives `α_a · v`.
    pub fn update(&mut self, payoffs: &[f64]) -> Result<()> {
        let k = self.delegates.len();
        if payoffs.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: payoffs.len() });
        }
        let alpha = self.last_stationary.probs().to_vec();
        for (d, w) in self.delegates.iter_mut().zip(alpha) {
            let scaled: Vec<f64> = payoffs.iter().map(|u| w * u).collect();
            d.update_entries(&scaled)?;
        }
        Ok(())
    }
}

impl Learner for Sda {
    fn num_actions(&self) -> usize {
        self.delegates.len()
    }

    fn ceiling(&self) -> f64 {
        self.delegates[0].ceiling()
    }

    fn distribution(&mut self, _rng: &mut dyn RngCore) -> Result<ActionDistribution> {
        Ok(self.stationary()?.0)
    }

    fn observe(&mut self, payoffs: &PayoffVector) -> Result<()> {
        self.update(payoffs.entries())
    }

    fn last_residual(&self) -> Option<f64> {
        self.last_residual
    }
}
