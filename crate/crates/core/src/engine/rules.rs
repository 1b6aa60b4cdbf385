//! Static, validated game setup shared (via `Arc`) by every state of a game.

use serde::{Deserialize, Serialize};

use super::error::EngineError;
use super::hex::Hex;
use super::map::GameMap;
use super::unit::{Side, UnitId, UnitType};
use crate::scenario::{ErrorKind, ScenarioDoc};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub side: Side,
    pub hex: Hex,
    pub weight: f64,
}

/// Per-side weights turning score components into scalar victory points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VictoryWeights {
    pub hold: f64,
    pub inflicted: f64,
    pub suffered: f64,
    pub moved: f64,
}

impl Default for VictoryWeights {
    fn default() -> Self {
        VictoryWeights {
            hold: 1.0,
            inflicted: 1.0,
            suffered: 0.0,
            moved: 0.0,
        }
    }
}

/// A unit as declared by the scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct RosterEntry {
    pub name: String,
    pub side: Side,
    pub kind: u16,
    pub start: Hex,
    pub strength: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rules {
    pub name: String,
    pub map: GameMap,
    pub unit_types: Vec<UnitType>,
    /// Sorted by `name`; `UnitId(i)` is `roster[i]`.
    pub roster: Vec<RosterEntry>,
    pub objectives: Vec<Objective>,
    pub victory: [VictoryWeights; 2],
    pub ticks_per_command: u32,
    pub max_ticks: u32,
    pub deterministic_combat: bool,
    side_units: [Vec<UnitId>; 2],
}

impl Rules {
    pub fn from_doc(doc: &ScenarioDoc) -> Result<Rules, EngineError> {
        doc.validate().map_err(|e| match e.kind {
            ErrorKind::Placement => EngineError::Placement(e.message),
            ErrorKind::Invalid => EngineError::InvalidScenario(e.message),
        })?;
        let mut map = GameMap::new(doc.width, doc.height, doc.default_terrain).map_err(EngineError::Map)?;
        for (h, t) in &doc.terrain {
            map.set_terrain(*h, *t).map_err(EngineError::Map)?;
        }
        let mut roster: Vec<RosterEntry> = doc
            .units()
            .map(|(side, p)| RosterEntry {
                name: p.id.clone(),
                side,
                kind: doc.unit_types.iter().position(|t| t.name == p.type_name).unwrap() as u16,
                start: p.pos,
                strength: p.strength,
            })
            .collect();
        roster.sort_by(|a, b| a.name.cmp(&b.name));
        let mut side_units = [Vec::new(), Vec::new()];
        for (i, r) in roster.iter().enumerate() {
            side_units[r.side.index()].push(UnitId(i as u16));
        }
        Ok(Rules {
            name: doc.name.clone(),
            map,
            unit_types: doc.unit_types.clone(),
            roster,
            objectives: doc.objectives.clone(),
            victory: doc.victory,
            ticks_per_command: doc.ticks_per_command,
            max_ticks: doc.max_ticks,
            deterministic_combat: doc.deterministic_combat,
            side_units,
        })
    }

    pub fn unit_type(&self, kind: u16) -> &UnitType {
        &self.unit_types[kind as usize]
    }

    pub fn unit_type_of(&self, id: UnitId) -> &UnitType {
        self.unit_type(self.roster[id.index()].kind)
    }

    /// Roster ids of one side, ascending.
    pub fn side_units(&self, side: Side) -> &[UnitId] {
        &self.side_units[side.index()]
    }

    pub fn unit_name(&self, id: UnitId) -> &str {
        &self.roster[id.index()].name
    }

    pub fn unit_by_name(&self, name: &str) -> Option<UnitId> {
        self.roster
            .binary_search_by(|r| r.name.as_str().cmp(name))
            .ok()
            .map(|i| UnitId(i as u16))
    }

    pub fn type_by_name(&self, name: &str) -> Option<u16> {
        self.unit_types.iter().position(|t| t.name == name).map(|i| i as u16)
    }

    pub fn objectives_of(&self, side: Side) -> impl Iterator<Item = &Objective> {
        self.objectives.iter().filter(move |o| o.side == side)
    }

    /// Initial total strength of one side.
    pub fn initial_strength(&self, side: Side) -> u32 {
        self.side_units(side)
            .iter()
            .map(|id| self.roster[id.index()].strength as u32)
            .sum()
    }
}
