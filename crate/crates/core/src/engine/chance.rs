//! The chance player: every random outcome is a recorded event.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::unit::UnitId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChancePurpose {
    Combat,
    Spotting,
}

/// One resolved stochastic event. `subjects` is `(attacker, defender)` for
/// combat and `(observer, target)` for spotting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChanceEvent {
    pub tick: u64,
    pub seq: u64,
    pub purpose: ChancePurpose,
    pub subjects: [UnitId; 2],
    /// Raw 64-bit generator output; the uniform is its top 53 bits.
    pub drawn: u64,
    pub outcome: u32,
}

/// Raw value recorded for an externally supplied uniform.
pub fn raw_from_uniform(u: f64) -> u64 {
    ((u * (1u64 << 53) as f64) as u64) << 11
}

/// Raw value of the fixed median draw used by deterministic-combat games.
pub const MEDIAN_DRAW: u64 = 1 << 63;

/// Where chance outcomes come from.
#[derive(Clone, Debug, Default)]
pub enum ChanceMode {
    /// Draw from the in-state generator, keep no log. Used by planners.
    #[default]
    Live,
    /// Draw from the generator and append every event to the log.
    Record,
    /// Take outcomes from a recorded stream, bypassing the generator.
    Replay(ReplayFeed),
}

#[derive(Clone, Debug)]
pub struct ReplayFeed {
    pub(crate) events: Arc<[ChanceEvent]>,
    pub(crate) cursor: usize,
    pub(crate) first_mismatch: Option<u64>,
}

impl ReplayFeed {
    pub fn new(events: impl Into<Arc<[ChanceEvent]>>) -> Self {
        ReplayFeed {
            events: events.into(),
            cursor: 0,
            first_mismatch: None,
        }
    }

    pub fn consumed(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.events.len() - self.cursor
    }

    /// Tick of the first recorded event that disagreed with the simulation.
    pub fn first_mismatch(&self) -> Option<u64> {
        self.first_mismatch
    }
}
