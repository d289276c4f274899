//! Best-in-hindsight and swap regret of a recorded play log.
//!
//! Both calculators work in one of two modes. [`RegretMode::Distribution`]
//! scores the algorithm by its expected payoff `p^i · u^i` and weights swap
//! deviations by the sampling probabilities; [`RegretMode::Realized`] uses the
//! drawn actions (indicator weights). Argmax ties go to the lowest index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{argmax, Deviation, PlayLog, RegretReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    #[default]
    Distribution,
    Realized,
}

fn full_rounds(log: &PlayLog) -> Result<Vec<(&[f64], &[f64], usize)>> {
    if log.is_empty() {
        return Err(Error::Domain("regret of an empty log".into()));
    }
    log.rounds().iter().map(|r| r.full_payoffs().map(|u| (u, r.sampling_probs().probs(), r.action)).ok_or(Error::BanditLog)).collect()
}

fn algorithm_payoff(rounds: &[(&[f64], &[f64], usize)], mode: RegretMode) -> f64 {
    rounds
        .iter()
        .map(|(u, p, a)| match mode {
            RegretMode::Distribution => u.iter().zip(p.iter()).map(|(x, y)| x * y).sum::<f64>(),
            RegretMode::Realized => u[*a],
        })
        .sum()
}

/// Regret against the best fixed action in hindsight.
pub fn best_in_hindsight_regret(log: &PlayLog, mode: RegretMode) -> Result<RegretReport> {
    let rounds = full_rounds(log)?;
    let k = log.num_actions();
    let mut totals = vec![0.0; k];
    for (u, _, _) in &rounds {
        for (t, x) in totals.iter_mut().zip(u.iter()) {
            *t += x;
        }
    }
    let best = argmax(&totals);
    Ok(RegretReport::new(algorithm_payoff(&rounds, mode), totals[best], Deviation::Fixed(best), rounds.len()))
}

/// `gains[a][b]`: total payoff of `b` on the rounds (or probability mass) where `a` was played.
pub fn conditional_payoffs(log: &PlayLog, mode: RegretMode) -> Result<Vec<Vec<f64>>> {
    let rounds = full_rounds(log)?;
    Ok(conditional_from_rounds(&rounds, log.num_actions(), mode))
}

fn conditional_from_rounds(rounds: &[(&[f64], &[f64], usize)], k: usize, mode: RegretMode) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; k]; k];
    for (u, p, played) in rounds {
        match mode {
            RegretMode::Distribution => {
                for (a, row) in table.iter_mut().enumerate() {
                    let w = p[a];
                    if w > 0.0 {
                        for (cell, x) in row.iter_mut().zip(u.iter()) {
                            *cell += w * x;
                        }
                    }
                }
            }
            RegretMode::Realized => {
                for (cell, x) in table[*played].iter_mut().zip(u.iter()) {
                    *cell += x;
                }
            }
        }
    }
    table
}

/// Regret against the best swap map `f`, optimized per source action.
pub fn swap_regret(log: &PlayLog, mode: RegretMode) -> Result<RegretReport> {
    let rounds = full_rounds(log)?;
    let table = conditional_from_rounds(&rounds, log.num_actions(), mode);
    let map: Vec<usize> = table.iter().map(|row| argmax(row)).collect();
    let benchmark = table.iter().zip(&map).map(|(row, &b)| row[b]).sum();
    Ok(RegretReport::new(algorithm_payoff(&rounds, mode), benchmark, Deviation::Swap(map), rounds.len()))
}

/// Cumulative algorithm and best-fixed-action payoffs after each round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub round: usize,
    pub alg_payoff: f64,
    pub opt_payoff: f64,
    pub regret: f64,
}

pub fn regret_curve(log: &PlayLog, mode: RegretMode) -> Result<Vec<CurvePoint>> {
    let rounds = full_rounds(log)?;
    let mut totals = vec![0.0; log.num_actions()];
    let mut alg = 0.0;
    let mut curve = Vec::with_capacity(rounds.len());
    for (i, r) in rounds.iter().enumerate() {
        alg += algorithm_payoff(std::slice::from_ref(r), mode);
        for (t, x) in totals.iter_mut().zip(r.0.iter()) {
            *t += x;
        }
        let opt = totals[argmax(&totals)];
        curve.push(CurvePoint { round: i + 1, alg_payoff: alg, opt_payoff: opt, regret: opt - alg });
    }
    Ok(curve)
}
