//! `rounds.csv` encoding and decoding.
//!
//! The column set is fixed; readers reject files whose header differs.

use crate::aggregation::RuleId;
use crate::diagnostics::StateVector;
use crate::error::{Error, Result};
use crate::orchestrator::RoundLog;

pub const ROUNDS_CSV_HEADER: [&str; 15] = [
    "round",
    "chosen_rule",
    "norm_variance",
    "avg_cos_sim",
    "mean_update_norm",
    "scaled_s1",
    "scaled_s2",
    "scaled_s3",
    "val_accuracy",
    "test_accuracy",
    "reward",
    "ucb_fedavg",
    "ucb_median",
    "ucb_krum",
    "wall_time_ms",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rounds_csv<W: std::io::Write>(rounds: &[RoundLog], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv write: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROUNDS_CSV_HEADER).map_err(io)?;
    for r in rounds {
        let ucb = r.ucb_scores;
        let record = [
            r.round.to_string(),
            r.chosen_rule.index().to_string(),
            r.state.norm_variance.to_string(),
            r.state.avg_cosine_similarity.to_string(),
            r.state.mean_update_norm.to_string(),
            r.scaled_state[0].to_string(),
            r.scaled_state[1].to_string(),
            r.scaled_state[2].to_string(),
            r.val_accuracy.to_string(),
            r.test_accuracy.to_string(),
            r.reward.to_string(),
            opt(ucb.map(|u| u[0])),
            opt(ucb.map(|u| u[1])),
            opt(ucb.map(|u| u[2])),
            opt(r.wall_time_ms),
        ];
        w.write_record(&record).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("csv flush: {e}")))?;
    Ok(())
}

pub fn rounds_csv_string(rounds: &[RoundLog]) -> String {
    let mut buf = Vec::new();
    write_rounds_csv(rounds, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_rounds_csv<R: std::io::Read>(input: R) -> Result<Vec<RoundLog>> {
    let bad = |msg: String| Error::InvalidArgument(msg);
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| bad(format!("csv header: {e}")))?;
    if header.iter().ne(ROUNDS_CSV_HEADER.iter().copied()) {
        return Err(bad("unexpected rounds.csv header".into()));
    }
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: bad `{}`", line + 1, ROUNDS_CSV_HEADER[i])))
        };
        let opt_num = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let rule_idx: usize = rec[1]
            .parse()
            .map_err(|_| bad(format!("row {}: bad chosen_rule", line + 1)))?;
        let ucb = match (opt_num(11)?, opt_num(12)?, opt_num(13)?) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            (None, None, None) => None,
            _ => return Err(bad(format!("row {}: partial ucb columns", line + 1))),
        };
        out.push(RoundLog {
            round: rec[0]
                .parse()
                .map_err(|_| bad(format!("row {}: bad round", line + 1)))?,
            chosen_rule: RuleId::from_index(rule_idx)
                .ok_or_else(|| bad(format!("row {}: unknown rule {rule_idx}", line + 1)))?,
            state: StateVector {
                norm_variance: num(2)?,
                avg_cosine_similarity: num(3)?,
                mean_update_norm: num(4)?,
            },
            scaled_state: [num(5)?, num(6)?, num(7)?],
            val_accuracy: num(8)?,
            test_accuracy: num(9)?,
            reward: num(10)?,
            ucb_scores: ucb,
            wall_time_ms: opt_num(14)?,
        });
    }
    Ok(out)
}
