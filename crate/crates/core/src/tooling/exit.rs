//! Expert-iteration training data: one sample per logged decision.

use std::io::{self, Write};

use serde::Serialize;

use crate::engine::Side;
use crate::evaluation::{GameResult, LoggedDecision};
use crate::scenario::FeatureVector;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExItSample {
    pub game: usize,
    pub tick: u64,
    pub side: Side,
    pub features: FeatureVector,
    /// Visit counts normalized over the decision's candidates; one-hot on
    /// the chosen candidate when nothing was visited.
    pub policy_target: Vec<f64>,
    /// The acting side's final outcome.
    pub value_target: f64,
}

pub fn policy_target(visits: &[u64], chosen: usize) -> Vec<f64> {
    let total: u64 = visits.iter().sum();
    if total == 0 {
        return (0..visits.len()).map(|i| if i == chosen { 1.0 } else { 0.0 }).collect();
    }
    visits.iter().map(|v| *v as f64 / total as f64).collect()
}

pub fn exit_samples(games: &[(GameResult, Vec<LoggedDecision>)]) -> Vec<ExItSample> {
    games
        .iter()
        .enumerate()
        .flat_map(|(g, (result, decisions))| {
            decisions.iter().map(move |d| {
                let visits: Vec<u64> = d.record.candidates.iter().map(|c| c.visits).collect();
                ExItSample {
                    game: g,
                    tick: d.record.tick,
                    side: d.record.side,
                    features: d.features,
                    policy_target: policy_target(&visits, d.record.chosen),
                    value_target: result.outcome(d.record.side),
                }
            })
        })
        .collect()
}

/// One JSON sample per line.
pub fn write_exit_dataset(out: &mut impl Write, samples: &[ExItSample]) -> io::Result<()> {
    for s in samples {
        serde_json::to_writer(&mut *out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
