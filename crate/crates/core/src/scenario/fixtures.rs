//! The scenarios shipped with the crate, embedded as text.

use super::{parse_scenario, ScenarioDoc};

pub const TINY_DUEL: &str = include_str!("../../scenarios/tiny-duel.wg");
pub const RIVER_CROSSING: &str = include_str!("../../scenarios/river-crossing.wg");
pub const OBJECTIVE_HOLD: &str = include_str!("../../scenarios/objective-hold.wg");

/// `(name, text)` for every shipped scenario.
pub const ALL: [(&str, &str); 3] = [
    ("tiny-duel", TINY_DUEL),
    ("river-crossing", RIVER_CROSSING),
    ("objective-hold", OBJECTIVE_HOLD),
];

/// Text of a shipped scenario by name, with or without the `.wg` suffix.
pub fn text(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".wg").unwrap_or(name);
    ALL.iter().find(|(n, _)| *n == stem).map(|(_, t)| *t)
}

/// Parse a shipped scenario. Panics only if the embedded text is broken,
/// which the crate's own tests rule out.
pub fn load(name: &str) -> Option<ScenarioDoc> {
    text(name).map(|t| parse_scenario(t).expect("shipped scenario parses"))
}

pub fn tiny_duel() -> ScenarioDoc {
    load("tiny-duel").unwrap()
}

pub fn river_crossing() -> ScenarioDoc {
    load("river-crossing").unwrap()
}

pub fn objective_hold() -> ScenarioDoc {
    load("objective-hold").unwrap()
}
