//! Flags unusual games: victory-point margins far from their cell's mean,
//! and units lost before the first command cycle ended.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::engine::Side;
use crate::evaluation::GameResult;

pub const DEFAULT_Z: f64 = 2.5;
pub const MIN_CELL_SIZE: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Anomaly {
    /// Index into the results passed in.
    pub run: usize,
    /// `margin`, `earlyLossBlue` or `earlyLossRed`.
    pub metric: String,
    pub value: f64,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AnomalyError {
    #[error("cell {scenario}/{blue}/{red} has {count} results, need {MIN_CELL_SIZE}")]
    InsufficientSample {
        scenario: String,
        blue: String,
        red: String,
        count: usize,
    },
}

/// Results are grouped by (scenario, blue, red). A cell with zero spread
/// never flags on margin.
pub fn detect_anomalies(results: &[GameResult], z: f64) -> Result<Vec<Anomaly>, AnomalyError> {
    let mut cells: BTreeMap<(&str, &str, &str), Vec<usize>> = BTreeMap::new();
    for (i, r) in results.iter().enumerate() {
        cells.entry((&r.scenario, &r.blue, &r.red)).or_default().push(i);
    }
    let mut flags = Vec::new();
    for ((scenario, blue, red), runs) in &cells {
        if runs.len() < MIN_CELL_SIZE {
            return Err(AnomalyError::InsufficientSample {
                scenario: scenario.to_string(),
                blue: blue.to_string(),
                red: red.to_string(),
                count: runs.len(),
            });
        }
        let n = runs.len() as f64;
        let mean = runs.iter().map(|&i| results[i].margin()).sum::<f64>() / n;
        let var = runs.iter().map(|&i| (results[i].margin() - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        for &i in runs {
            let m = results[i].margin();
            if std > 0.0 && (m - mean).abs() > z * std {
                flags.push(Anomaly {
                    run: i,
                    metric: "margin".into(),
                    value: m,
                });
            }
            for side in Side::BOTH {
                if let Some(t) = results[i].first_loss_tick[side.index()] {
                    if t < results[i].ticks_per_command as u64 {
                        flags.push(Anomaly {
                            run: i,
                            metric: if side == Side::Blue {
                                "earlyLossBlue"
                            } else {
                                "earlyLossRed"
                            }
                            .into(),
                            value: t as f64,
                        });
                    }
                }
            }
        }
    }
    flags.sort_by(|a, b| a.run.cmp(&b.run).then(a.metric.cmp(&b.metric)));
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ScoreVector;

    fn result(margin: f64, first_loss: Option<u64>) -> GameResult {
        GameResult {
            scenario: "s".into(),
            seed: 0,
            blue: "a".into(),
            red: "b".into(),
            score: ScoreVector::default(),
            vp: [margin, 0.0],
            outcome_blue: 0.5,
            ticks: 100,
            termination: None,
            forfeit: None,
            first_loss_tick: [first_loss, None],
            ticks_per_command: 10,
            final_hash: 0,
            replay: None,
        }
    }

    #[test]
    fn identical_results_raise_nothing() {
        let rs: Vec<_> = (0..12).map(|_| result(1.0, None)).collect();
        assert!(detect_anomalies(&rs, DEFAULT_Z).unwrap().is_empty());
    }

    #[test]
    fn single_outlier_is_flagged() {
        let mut rs: Vec<_> = (0..50)
            .map(|i| result(if i % 2 == 0 { 1.0 } else { -1.0 }, None))
            .collect();
        rs[17] = result(5.0, None);
        let flags = detect_anomalies(&rs, DEFAULT_Z).unwrap();
        assert_eq!(flags.len(), 1);
        assert_eq!((flags[0].run, flags[0].metric.as_str()), (17, "margin"));
    }

    #[test]
    fn early_loss_is_flagged() {
        let mut rs: Vec<_> = (0..10).map(|_| result(0.0, Some(40))).collect();
        rs[4] = result(0.0, Some(3));
        let flags = detect_anomalies(&rs, DEFAULT_Z).unwrap();
        assert_eq!(
            flags,
            vec![Anomaly {
                run: 4,
                metric: "earlyLossBlue".into(),
                value: 3.0
            }]
        );
    }

    #[test]
    fn small_cells_are_rejected() {
        let rs: Vec<_> = (0..9).map(|_| result(0.0, None)).collect();
        assert!(matches!(
            detect_anomalies(&rs, DEFAULT_Z),
            Err(AnomalyError::InsufficientSample { count: 9, .. })
        ));
    }
}
