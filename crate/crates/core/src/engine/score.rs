use serde::{Deserialize, Serialize};

use super::rules::VictoryWeights;
use super::unit::Side;

/// Per-side accumulators, indexed by `Side::index()`. All components only
/// ever grow during a game.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScoreVector {
    /// Objective weight accrued per tick an objective is held.
    pub objectives_held: [f64; 2],
    pub strength_inflicted: [u32; 2],
    pub strength_suffered: [u32; 2],
    pub mp_expended: [u64; 2],
}

impl ScoreVector {
    pub fn victory_points(&self, side: Side, w: &VictoryWeights) -> f64 {
        let i = side.index();
        w.hold * self.objectives_held[i]
            + w.inflicted * self.strength_inflicted[i] as f64
            + w.suffered * self.strength_suffered[i] as f64
            + w.moved * self.mp_expended[i] as f64
    }
}
