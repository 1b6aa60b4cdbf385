//! Script-abstracted actions: a side's command-phase decision is one
//! script per roster unit, turned into concrete orders against the
//! current state.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::{GameState, GlobalAction, Side, SplitMix64, UnitId, UnitOrder};
use crate::interface::{observe, Observation, ObservationLevel};
use crate::scripts::{evaluate_script, ScriptId, ScriptParams};

/// One script per unit of a side's roster, in roster order. Entries of
/// destroyed units are ignored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<ScriptId>);

impl Assignment {
    /// `s` for every live unit, Hold for the dead.
    pub fn uniform(state: &GameState, side: Side, s: ScriptId) -> Self {
        Assignment(
            state
                .rules()
                .side_units(side)
                .iter()
                .map(|id| {
                    if state.units()[id.index()].alive() {
                        s
                    } else {
                        ScriptId::HoldPosition
                    }
                })
                .collect(),
        )
    }

    /// Independent uniform draws from `allowed` for live units; Hold for
    /// the dead so equivalent assignments compare equal.
    pub fn random(state: &GameState, side: Side, allowed: &[ScriptId], rng: &mut SplitMix64) -> Self {
        Assignment(
            state
                .rules()
                .side_units(side)
                .iter()
                .map(|id| {
                    if state.units()[id.index()].alive() {
                        *allowed.choose(rng).expect("non-empty script set")
                    } else {
                        ScriptId::HoldPosition
                    }
                })
                .collect(),
        )
    }

    /// Orders for the units visible in `obs`.
    pub fn orders(&self, obs: &Observation, params: &ScriptParams) -> GlobalAction {
        let roster = obs.rules.side_units(obs.side);
        obs.own_units
            .iter()
            .map(|u| {
                let s = slot(roster, u.id)
                    .and_then(|i| self.0.get(i))
                    .copied()
                    .unwrap_or(ScriptId::HoldPosition);
                (u.id, evaluate_script(s, params, obs, u.id).expect("own unit"))
            })
            .collect()
    }

    /// Orders computed from `side`'s fog-of-war view of `state`.
    pub fn orders_in(&self, state: &GameState, side: Side, params: &ScriptParams) -> GlobalAction {
        self.orders(&observe(state, side, ObservationLevel::Fog), params)
    }

    /// `b1:advanceToObjective,b2:holdPosition` for live units.
    pub fn summary(&self, state: &GameState, side: Side) -> String {
        let rules = state.rules();
        rules
            .side_units(side)
            .iter()
            .zip(&self.0)
            .filter(|(id, _)| state.units()[id.index()].alive())
            .map(|(id, s)| format!("{}:{}", rules.unit_name(*id), s.name()))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.0.iter().map(|s| s.name()).collect();
        write!(f, "{}", names.join(","))
    }
}

pub(crate) fn slot(roster: &[UnitId], id: UnitId) -> Option<usize> {
    roster.iter().position(|r| *r == id)
}

/// Apply `action`, dropping individual orders the engine rejects.
pub fn apply_orders_lenient(state: &mut GameState, side: Side, action: &GlobalAction) {
    if state.apply_orders(side, action).is_ok() {
        return;
    }
    let legal: GlobalAction = action
        .iter()
        .filter(|(id, o)| state.check_order(side, *id, o).is_ok())
        .map(|(id, o)| (id, *o))
        .collect();
    let _ = state.apply_orders(side, &legal);
}

/// Uniformly random script for every live unit of `side`.
pub fn random_script_orders(
    state: &GameState,
    side: Side,
    params: &ScriptParams,
    rng: &mut SplitMix64,
) -> GlobalAction {
    Assignment::random(state, side, &ScriptId::ALL, rng).orders_in(state, side, params)
}

/// A uniformly random legal order for every unit in `obs`, drawn from the
/// engine's enumeration.
pub fn random_legal_orders(state: &GameState, obs: &Observation, rng: &mut SplitMix64) -> GlobalAction {
    obs.own_units
        .iter()
        .map(|u| {
            let legal = state.legal_orders(u.id).unwrap_or_default();
            let o = if legal.is_empty() {
                UnitOrder::Hold
            } else {
                legal[rng.gen_range(0..legal.len())]
            };
            (u.id, o)
        })
        .collect()
}

/// Number of distinct assignments over the live units of `side`.
pub fn assignment_space(state: &GameState, side: Side, allowed: usize) -> u128 {
    let live = state.live_units(side).count() as u32;
    (allowed as u128).checked_pow(live).unwrap_or(u128::MAX)
}

/// Every assignment over live units (dead units hold), in lexicographic
/// order of `allowed` indices.
pub fn all_assignments(state: &GameState, side: Side, allowed: &[ScriptId]) -> Vec<Assignment> {
    let roster = state.rules().side_units(side);
    let live: Vec<usize> = (0..roster.len())
        .filter(|i| state.units()[roster[*i].index()].alive())
        .collect();
    let mut out = vec![Assignment(vec![ScriptId::HoldPosition; roster.len()])];
    for &i in &live {
        out = out
            .into_iter()
            .flat_map(|a| {
                allowed.iter().map(move |s| {
                    let mut b = a.clone();
                    b.0[i] = *s;
                    b
                })
            })
            .collect();
    }
    out
}
