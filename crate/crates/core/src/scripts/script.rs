use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{GlobalAction, Hex, UnitId, UnitOrder};
use crate::interface::{Observation, Policy};

/// The script portfolio. The discriminants are stable and used as indices by
/// the bandit and search agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ScriptId {
    AdvanceToObjective = 0,
    HoldPosition = 1,
    ScoutPatrol = 2,
    WithdrawIfOutnumbered = 3,
    AttackNearest = 4,
}

impl ScriptId {
    pub const COUNT: usize = 5;
    pub const ALL: [ScriptId; 5] = [
        ScriptId::AdvanceToObjective,
        ScriptId::HoldPosition,
        ScriptId::ScoutPatrol,
        ScriptId::WithdrawIfOutnumbered,
        ScriptId::AttackNearest,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ScriptId> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ScriptId::AdvanceToObjective => "advanceToObjective",
            ScriptId::HoldPosition => "holdPosition",
            ScriptId::ScoutPatrol => "scoutPatrol",
            ScriptId::WithdrawIfOutnumbered => "withdrawIfOutnumbered",
            ScriptId::AttackNearest => "attackNearest",
        }
    }
}

impl fmt::Display for ScriptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScriptId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown script {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScriptParams {
    /// Enemy-to-own local strength ratio tolerated before withdrawing, in [0, 2].
    pub aggression: f64,
    pub scout_radius: u32,
}

impl Default for ScriptParams {
    fn default() -> Self {
        ScriptParams {
            aggression: 1.0,
            scout_radius: 2,
        }
    }
}

impl ScriptParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=2.0).contains(&self.aggression) {
            return Err(format!("aggression {} outside [0, 2]", self.aggression));
        }
        if self.scout_radius < 1 {
            return Err("scout radius must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("unit {0:?} is not a live unit of the observing side")]
    UnknownUnit(UnitId),
}

/// Radius within which strengths count as local for withdrawal decisions.
const LOCAL_RADIUS: u32 = 3;

/// The order script `id` gives unit `unit`.
pub fn evaluate_script(
    id: ScriptId,
    params: &ScriptParams,
    obs: &Observation,
    unit: UnitId,
) -> Result<UnitOrder, ScriptError> {
    let u = obs.own_unit(unit).ok_or(ScriptError::UnknownUnit(unit))?;
    Ok(match id {
        ScriptId::HoldPosition => UnitOrder::Hold,
        ScriptId::ScoutPatrol => UnitOrder::Scout {
            anchor: u.pos,
            radius: params.scout_radius.max(1),
        },
        ScriptId::AdvanceToObjective => advance(obs, u.pos),
        ScriptId::AttackNearest => attack_nearest(obs, unit, u.pos),
        ScriptId::WithdrawIfOutnumbered => withdraw(obs, unit, u.pos, params.aggression),
    })
}

/// Move towards the nearest reachable own objective; Hold when standing on
/// it or when none is reachable. The engine follows the A* route.
fn advance(obs: &Observation, pos: Hex) -> UnitOrder {
    let map = &obs.rules.map;
    let mut goals: Vec<(u32, usize, Hex)> = obs
        .rules
        .objectives_of(obs.side)
        .enumerate()
        .map(|(i, o)| (pos.distance(o.hex), i, o.hex))
        .collect();
    goals.sort();
    for (d, _, h) in goals {
        if d == 0 {
            return UnitOrder::Hold;
        }
        if map.find_path(pos, h).is_ok() {
            return UnitOrder::move_to(h);
        }
    }
    UnitOrder::Hold
}

fn attack_nearest(obs: &Observation, unit: UnitId, pos: Hex) -> UnitOrder {
    let range = obs.rules.unit_type_of(unit).range;
    obs.contacts
        .iter()
        .filter(|c| c.tracked && pos.distance(c.pos) <= range)
        .min_by_key(|c| (pos.distance(c.pos), c.enemy))
        .map(|c| UnitOrder::Attack(c.enemy))
        .unwrap_or_else(|| advance(obs, pos))
}

fn cube(h: Hex) -> [f64; 3] {
    [h.q as f64, h.r as f64, h.s() as f64]
}

fn cube_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs()) / 2.0
}

fn withdraw(obs: &Observation, unit: UnitId, pos: Hex, aggression: f64) -> UnitOrder {
    let near: Vec<_> = obs
        .contacts
        .iter()
        .filter(|c| pos.distance(c.pos) <= LOCAL_RADIUS)
        .collect();
    let enemy: f64 = near.iter().map(|c| c.strength as f64).sum();
    let own: f64 = obs
        .own_units
        .iter()
        .filter(|o| pos.distance(o.pos) <= LOCAL_RADIUS)
        .map(|o| o.strength as f64)
        .sum();
    if near.is_empty() || enemy <= aggression * own {
        return attack_nearest(obs, unit, pos);
    }
    let mut centroid = [0.0; 3];
    for c in &near {
        let x = cube(c.pos);
        for k in 0..3 {
            centroid[k] += x[k] / near.len() as f64;
        }
    }
    let here = cube_distance(cube(pos), centroid);
    obs.rules
        .map
        .passable_neighbors(pos)
        .map(|h| (cube_distance(cube(h), centroid), h))
        .filter(|(d, _)| *d > here)
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|(_, h)| UnitOrder::move_to(h))
        .unwrap_or(UnitOrder::Hold)
}

/// One order per own live unit, each from the script `assign` picks for it.
pub fn scripted_action(
    obs: &Observation,
    params: &ScriptParams,
    mut assign: impl FnMut(usize, UnitId) -> ScriptId,
) -> GlobalAction {
    obs.own_units
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let s = assign(i, u.id);
            (u.id, evaluate_script(s, params, obs, u.id).expect("own unit"))
        })
        .collect()
}

/// Every own unit runs the same script.
pub fn uniform_scripted_action(obs: &Observation, params: &ScriptParams, script: ScriptId) -> GlobalAction {
    scripted_action(obs, params, |_, _| script)
}

/// A policy running one fixed script for every unit it controls.
#[derive(Clone, Debug)]
pub struct ScriptPolicy {
    name: String,
    pub script: ScriptId,
    pub params: ScriptParams,
}

impl ScriptPolicy {
    pub fn new(script: ScriptId, params: ScriptParams) -> Self {
        ScriptPolicy {
            name: format!("scripted:{}", script.name()),
            script,
            params,
        }
    }
}

impl Policy for ScriptPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn params(&self) -> Vec<(String, f64)> {
        vec![
            ("aggression".into(), self.params.aggression),
            ("scoutRadius".into(), self.params.scout_radius as f64),
        ]
    }

    fn decide(&self, obs: &Observation) -> GlobalAction {
        uniform_scripted_action(obs, &self.params, self.script)
    }
}
