//! A headless, deterministic hex-grid wargame with a forward-planning agent
//! suite, evaluation harness and parameter tuner.

pub mod agents;
pub mod belief;
pub mod engine;
pub mod evaluation;
pub mod interface;
pub mod scenario;
pub mod scripts;
pub mod tooling;
pub mod tuning;

pub use engine::{
    EngineError, GameState, GlobalAction, Hex, Side, SplitMix64, TerminationReason, Terrain, UnitId, UnitOrder,
};
pub use interface::{observe, Observation, ObservationLevel};
pub use scenario::{parse_scenario, serialize_scenario, ScenarioDoc};
