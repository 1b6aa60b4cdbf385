//! Deterministic, headless, copyable forward model of a hex-grid wargame.
//!
//! Time advances in ticks. Every `ticks_per_command` ticks a command phase
//! opens and each side may replace the orders of its units; in between,
//! units execute their standing orders. All randomness (spotting and combat)
//! goes through the chance player, which draws from the SplitMix64 state
//! carried inside [`GameState`] and can record or replay every outcome.

pub mod chance;
pub mod combat;
mod error;
pub mod hex;
pub mod map;
pub mod rng;
pub mod rules;
pub mod score;
pub mod state;
pub mod unit;

pub use chance::{ChanceEvent, ChanceMode, ChancePurpose, ReplayFeed};
pub use error::EngineError;
pub use hex::Hex;
pub use map::{GameMap, MapError, Terrain};
pub use rng::SplitMix64;
pub use rules::{Objective, RosterEntry, Rules, VictoryWeights};
pub use score::ScoreVector;
pub use state::{fnv1a64, forward_calls, ContactRecord, GameState, TerminationReason};
pub use unit::{GlobalAction, Side, Stance, Unit, UnitId, UnitOrder, UnitType, Waypoints};
