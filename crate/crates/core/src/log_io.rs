//! CSV and JSON encodings of [`PlayLog`].
//!
//! CSV columns: `round, action, u_1..u_k` (or `u_observed` for bandit logs),
//! `p_1..p_k`, optional `expl_1..expl_k`, optional `residual`. Rounds are
//! numbered from 1, actions from 0. Floats are written in shortest
//! round-trip form, so a write/read cycle is bit-exact. The payoff ceiling is
//! not part of the CSV and must be supplied when reading.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::types::{ActionDistribution, Feedback, PlayLog, Round};

pub fn write_csv<W: Write>(log: &PlayLog, writer: W) -> Result<()> {
    let k = log.num_actions();
    let full = log.is_full_feedback();
    let with_expl = log.rounds().iter().any(|r| r.exploration.is_some());
    let with_residual = log.rounds().iter().any(|r| r.residual.is_some());
    let mut w = csv::Writer::from_writer(writer);

    let mut header = vec!["round".to_string(), "action".to_string()];
    if full {
        header.extend((1..=k).map(|a| format!("u_{a}")));
    } else {
        header.push("u_observed".into());
    }
    header.extend((1..=k).map(|a| format!("p_{a}")));
    if with_expl {
        header.extend((1..=k).map(|a| format!("expl_{a}")));
    }
    if with_residual {
        header.push("residual".into());
    }
    w.write_record(&header)?;

    for (i, r) in log.rounds().iter().enumerate() {
        let mut rec = vec![(i + 1).to_string(), r.action.to_string()];
        if full {
            rec.extend(r.full_payoffs().unwrap_or(&[]).iter().map(f64::to_string));
        } else {
            rec.push(r.realized_payoff().to_string());
        }
        rec.extend(r.distribution.probs().iter().map(f64::to_string));
        if with_expl {
            match &r.exploration {
                Some(e) => rec.extend(e.probs().iter().map(f64::to_string)),
                None => rec.extend(std::iter::repeat(String::new()).take(k)),
            }
        }
        if with_residual {
            rec.push(r.residual.map(|x| x.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, column: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("line {line}: column {column}: `{s}` is not a number")))
}

pub fn read_csv<R: Read>(reader: R, ceiling: f64) -> Result<PlayLog> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let indexed = |prefix: &str| -> Vec<usize> { (1..).map_while(|a| col(&format!("{prefix}_{a}"))).collect() };

    let action_col = col("action").ok_or_else(|| Error::Parse("missing `action` column".into()))?;
    let probs = indexed("p");
    if probs.is_empty() {
        return Err(Error::Parse("missing p_1..p_k columns".into()));
    }
    let k = probs.len();
    let payoffs = indexed("u");
    let observed = col("u_observed");
    if payoffs.is_empty() == observed.is_none() {
        return Err(Error::Parse("need exactly one of u_1..u_k or u_observed".into()));
    }
    if !payoffs.is_empty() && payoffs.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: payoffs.len() });
    }
    let expl = indexed("expl");
    if !expl.is_empty() && expl.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: expl.len() });
    }
    let residual_col = col("residual");

    let mut log = PlayLog::new(k, ceiling)?;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let action: usize =
            field(action_col).trim().parse().map_err(|_| Error::Parse(format!("line {line}: bad action `{}`", field(action_col))))?;
        let numbers = |cols: &[usize], name: &str| -> Result<Vec<f64>> { cols.iter().map(|&c| parse_f64(field(c), name, line)).collect() };
        let distribution = ActionDistribution::new(numbers(&probs, "p")?)?;
        let feedback = match observed {
            Some(c) => Feedback::Bandit(parse_f64(field(c), "u_observed", line)?),
            None => Feedback::Full(numbers(&payoffs, "u")?),
        };
        let exploration = if expl.is_empty() || field(expl[0]).trim().is_empty() {
            None
        } else {
            Some(ActionDistribution::new(numbers(&expl, "expl")?)?)
        };
        let residual = match residual_col.map(field) {
            Some(s) if !s.trim().is_empty() => Some(parse_f64(s, "residual", line)?),
            _ => None,
        };
        log.push(Round { distribution, action, feedback, exploration, residual })?;
    }
    Ok(log)
}

pub fn write_json<W: Write>(log: &PlayLog, writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, log)?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<PlayLog> {
    Ok(serde_json::from_reader(reader)?)
}
