use std::collections::HashSet;

use thiserror::Error;

use crate::engine::{GameState, Hex, Side, Stance, UnitId};

/// One hypothesized enemy unit. `unit` names the roster slot the hypothesis
/// fills, so a belief can only contain units the scenario declares.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypothesizedUnit {
    pub unit: UnitId,
    pub type_name: String,
    pub pos: Hex,
    pub strength: u8,
}

/// A guess at the enemy units a side cannot currently see.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BeliefAssumption {
    pub placements: Vec<HypothesizedUnit>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InjectError {
    #[error("placement of {unit:?} at {pos} is not an in-bounds passable hex")]
    Impassable { unit: UnitId, pos: Hex },
    #[error("placement of {unit:?} at {pos} collides with a known unit")]
    Collision { unit: UnitId, pos: Hex },
    #[error("{0:?} is not a hidden enemy unit of this side")]
    NotHidden(UnitId),
    #[error("unknown unit type {0}")]
    UnknownType(String),
    #[error("strength {strength} of {unit:?} outside 1..={max}")]
    Strength { unit: UnitId, strength: u8, max: u8 },
}

/// A planning copy of `state` in which every enemy unit that `side` does
/// not currently have in contact is replaced by the assumption.
///
/// Own units, terrain, contacts and score are untouched. Units in contact
/// keep their true state.
pub fn inject_belief(state: &GameState, side: Side, assumption: &BeliefAssumption) -> Result<GameState, InjectError> {
    let rules = state.rules().clone();
    let enemy = side.opponent();
    let hidden = |id: UnitId| {
        id.index() < rules.roster.len()
            && rules.roster[id.index()].side == enemy
            && state.contact(side, id).is_none()
            && !state.known_kills(side).contains(&id)
    };

    let mut occupied: HashSet<Hex> = state
        .units()
        .iter()
        .filter(|u| u.alive() && (u.side == side || !hidden(u.id)))
        .map(|u| u.pos)
        .collect();
    let mut seen = HashSet::new();
    let mut resolved = Vec::with_capacity(assumption.placements.len());
    for p in &assumption.placements {
        if !hidden(p.unit) || !seen.insert(p.unit) {
            return Err(InjectError::NotHidden(p.unit));
        }
        if !rules.map.passable(p.pos) {
            return Err(InjectError::Impassable {
                unit: p.unit,
                pos: p.pos,
            });
        }
        if !occupied.insert(p.pos) {
            return Err(InjectError::Collision {
                unit: p.unit,
                pos: p.pos,
            });
        }
        let kind = rules
            .type_by_name(&p.type_name)
            .ok_or_else(|| InjectError::UnknownType(p.type_name.clone()))?;
        let max = rules.unit_type(kind).max_strength;
        if p.strength < 1 || p.strength > max {
            return Err(InjectError::Strength {
                unit: p.unit,
                strength: p.strength,
                max,
            });
        }
        resolved.push((p.unit, kind, p.pos, p.strength));
    }

    let mut out = state.fork();
    for &id in rules.side_units(enemy) {
        if hidden(id) {
            out.units[id.index()].remove();
        }
    }
    for (id, kind, pos, strength) in resolved {
        let u = &mut out.units[id.index()];
        u.kind = kind;
        u.pos = pos;
        u.strength = strength;
        u.mp = 0;
        u.order = None;
        u.stance = Stance::Engage;
        u.leg = 0;
        u.route = None;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures;

    fn truth(state: &GameState, side: Side) -> BeliefAssumption {
        BeliefAssumption {
            placements: state
                .live_units(side.opponent())
                .map(|u| HypothesizedUnit {
                    unit: u.id,
                    type_name: state.rules().unit_type(u.kind).name.clone(),
                    pos: u.pos,
                    strength: u.strength,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_assumption_removes_every_hidden_enemy() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 7).unwrap();
        let c = inject_belief(&s, Side::Blue, &BeliefAssumption::default()).unwrap();
        assert_eq!(c.live_units(Side::Red).count(), 0);
        assert_eq!(c.live_units(Side::Blue).count(), 2);
    }

    #[test]
    fn true_assumption_matches_plain_copy() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 5).unwrap();
        let c = inject_belief(&s, Side::Red, &truth(&s, Side::Red)).unwrap();
        assert_eq!(c.canonical_bytes(false), s.fork().canonical_bytes(false));
    }

    #[test]
    fn water_placement_rejected() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 5).unwrap();
        let mut a = truth(&s, Side::Blue);
        a.placements[0].pos = Hex::new(6, 0);
        assert!(matches!(
            inject_belief(&s, Side::Blue, &a),
            Err(InjectError::Impassable { .. })
        ));
    }

    #[test]
    fn collisions_with_known_units_rejected() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 5).unwrap();
        let own = s.live_units(Side::Blue).next().unwrap().pos;
        let mut a = truth(&s, Side::Blue);
        a.placements[0].pos = own;
        assert!(matches!(
            inject_belief(&s, Side::Blue, &a),
            Err(InjectError::Collision { .. })
        ));
    }

    #[test]
    fn own_side_and_terrain_untouched() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 5).unwrap();
        let mut a = truth(&s, Side::Blue);
        for p in &mut a.placements {
            p.strength = 1;
        }
        let c = inject_belief(&s, Side::Blue, &a).unwrap();
        let own = |g: &GameState| g.live_units(Side::Blue).cloned().collect::<Vec<_>>();
        assert_eq!(own(&c), own(&s));
        assert_eq!(c.rules().map, s.rules().map);
        assert!(c.live_units(Side::Red).all(|u| u.strength == 1));
    }
}
