use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{GameState, Hex, Rules, ScoreVector, Side, Unit, UnitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationLevel {
    /// Every live enemy is visible at its true position.
    Full,
    /// Only the side's contact table is visible.
    Fog,
}

impl FromStr for ObservationLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" | "off" => Ok(ObservationLevel::Full),
            "fog" | "on" => Ok(ObservationLevel::Fog),
            _ => Err(format!("unknown observation level {s:?}")),
        }
    }
}

/// What a side knows about one enemy unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Contact {
    pub enemy: UnitId,
    pub pos: Hex,
    pub last_seen_tick: u64,
    pub kind: u16,
    pub type_name: String,
    pub strength: u8,
    pub staleness: u64,
    /// Whether the side's contact table holds this unit, i.e. whether it may
    /// be named in an Attack order. Always true under fog.
    pub tracked: bool,
}

/// A side's view of the game. Terrain and the scenario are common knowledge
/// and shared through `rules`.
#[derive(Clone, Debug)]
pub struct Observation {
    pub side: Side,
    pub level: ObservationLevel,
    pub tick: u64,
    pub rules: Arc<Rules>,
    /// Live own units, ascending by id.
    pub own_units: Vec<Unit>,
    /// Ascending by enemy id.
    pub contacts: Vec<Contact>,
    /// Enemy units this side has destroyed.
    pub known_kills: Vec<UnitId>,
    /// Both sides' tallies; the scoreboard is public.
    pub score: ScoreVector,
}

impl Observation {
    pub fn own_unit(&self, id: UnitId) -> Option<&Unit> {
        self.own_units.iter().find(|u| u.id == id)
    }

    pub fn contact(&self, id: UnitId) -> Option<&Contact> {
        self.contacts.iter().find(|c| c.enemy == id)
    }

    pub fn is_command_phase(&self) -> bool {
        self.tick.is_multiple_of(self.rules.ticks_per_command as u64)
    }

    /// Canonical bytes identifying this observation.
    pub fn key_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(16 + self.own_units.len() * 16 + self.contacts.len() * 24);
        b.push(self.side as u8);
        b.extend_from_slice(&self.tick.to_le_bytes());
        for u in &self.own_units {
            b.extend_from_slice(&u.id.0.to_le_bytes());
            b.extend_from_slice(&u.pos.q.to_le_bytes());
            b.extend_from_slice(&u.pos.r.to_le_bytes());
            b.push(u.strength);
        }
        b.push(0xFE);
        for c in &self.contacts {
            b.extend_from_slice(&c.enemy.0.to_le_bytes());
            b.extend_from_slice(&c.pos.q.to_le_bytes());
            b.extend_from_slice(&c.pos.r.to_le_bytes());
            b.extend_from_slice(&c.last_seen_tick.to_le_bytes());
            b.push(c.strength);
        }
        b
    }
}

/// The view of `state` available to `side` at `level`. Pure.
pub fn observe(state: &GameState, side: Side, level: ObservationLevel) -> Observation {
    let rules = state.rules().clone();
    let tick = state.tick();
    let contact = |id: UnitId, pos: Hex, seen: u64, strength: u8| {
        let kind = state.units()[id.index()].kind;
        let tracked = state.contact(side, id).is_some();
        Contact {
            enemy: id,
            pos,
            last_seen_tick: seen,
            kind,
            type_name: rules.unit_type(kind).name.clone(),
            strength,
            staleness: tick - seen,
            tracked,
        }
    };
    let contacts = match level {
        ObservationLevel::Full => state
            .live_units(side.opponent())
            .map(|u| contact(u.id, u.pos, tick, u.strength))
            .collect(),
        ObservationLevel::Fog => state
            .contacts(side)
            .map(|(id, c)| contact(id, c.pos, c.tick, c.strength))
            .collect(),
    };
    let known_kills = match level {
        ObservationLevel::Full => state
            .rules()
            .side_units(side.opponent())
            .iter()
            .copied()
            .filter(|id| !state.units()[id.index()].alive())
            .collect(),
        ObservationLevel::Fog => state.known_kills(side).to_vec(),
    };
    Observation {
        side,
        level,
        tick,
        own_units: state.live_units(side).cloned().collect(),
        contacts,
        known_kills,
        score: *state.score(),
        rules,
    }
}
