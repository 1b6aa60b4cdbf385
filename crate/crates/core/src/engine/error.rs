use thiserror::Error;

use super::map::MapError;
use super::unit::{Side, UnitId};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Map(MapError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid placement: {0}")]
    Placement(String),
    #[error("cannot step a terminal state")]
    Terminal,
    #[error("orders may only be applied in a command phase (tick {tick}, cycle {cycle})")]
    NotCommandPhase { tick: u64, cycle: u32 },
    #[error("unknown unit {0:?}")]
    UnknownUnit(UnitId),
    #[error("unit {0:?} is destroyed")]
    DeadUnit(UnitId),
    #[error("unit {unit:?} does not belong to {side}")]
    WrongSide { unit: UnitId, side: Side },
    #[error("illegal order for {unit:?}: {reason}")]
    IllegalOrder { unit: UnitId, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
}
