use std::collections::BTreeMap;

use crate::engine::{GameState, Side, UnitId};

/// Order counts of one live unit, grouped by order kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitActionSpace {
    pub unit: UnitId,
    pub name: String,
    pub count: usize,
    pub kinds: BTreeMap<&'static str, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpace {
    pub side: Side,
    pub units: Vec<UnitActionSpace>,
}

impl ActionSpace {
    /// Number of distinct global actions assigning one order to every unit;
    /// `None` on overflow.
    pub fn global_count(&self) -> Option<u128> {
        self.units
            .iter()
            .try_fold(1u128, |acc, u| acc.checked_mul(u.count as u128))
    }

    pub fn log10_global_count(&self) -> f64 {
        self.units.iter().map(|u| (u.count as f64).log10()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    pub name: &'static str,
    pub layout: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationSpace {
    pub fields: Vec<FieldDescriptor>,
}

pub fn describe_spaces(state: &GameState, side: Side) -> (ActionSpace, ObservationSpace) {
    let rules = state.rules();
    let units = state
        .live_units(side)
        .map(|u| {
            let orders = state.legal_orders(u.id).expect("live unit");
            let mut kinds = BTreeMap::new();
            for o in &orders {
                *kinds.entry(o.kind_name()).or_insert(0) += 1;
            }
            UnitActionSpace {
                unit: u.id,
                name: rules.unit_name(u.id).to_string(),
                count: orders.len(),
                kinds,
            }
        })
        .collect();
    let (w, h) = (rules.map.width(), rules.map.height());
    let f = |name, layout: String| FieldDescriptor { name, layout };
    let obs = ObservationSpace {
        fields: vec![
            f("side", "enum {blue, red}".into()),
            f("level", "enum {full, fog}".into()),
            f("tick", "u64".into()),
            f("map", format!("terrain[{w}x{h}]")),
            f(
                "ownUnits",
                format!(
                    "list[<= {}] of (id, kind, q, r, strength, mp, order, stance)",
                    rules.side_units(side).len()
                ),
            ),
            f(
                "contacts",
                format!(
                    "list[<= {}] of (enemy, q, r, lastSeenTick, kind, strength, staleness)",
                    rules.side_units(side.opponent()).len()
                ),
            ),
            f("knownKills", "list of enemy id".into()),
            f(
                "score",
                "(objectivesHeld[2], strengthInflicted[2], strengthSuffered[2], mpExpended[2])".into(),
            ),
        ],
    };
    (ActionSpace { side, units }, obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{GlobalAction, UnitOrder};
    use crate::scenario::fixtures;

    #[test]
    fn tiny_duel_blue_has_two_units() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 7).unwrap();
        let (a, o) = describe_spaces(&s, Side::Blue);
        assert_eq!(a.units.len(), 2);
        for u in &a.units {
            assert_eq!(u.count, s.legal_orders(u.unit).unwrap().len());
            assert_eq!(u.kinds.values().sum::<usize>(), u.count);
        }
        assert_eq!(o.fields.len(), 8);
    }

    #[test]
    fn global_count_is_product_of_unit_counts() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 7).unwrap();
        let (a, _) = describe_spaces(&s, Side::Blue);
        // Brute force: enumerate every combination and count distinct actions.
        let ids: Vec<_> = a.units.iter().map(|u| u.unit).collect();
        let per: Vec<Vec<UnitOrder>> = ids.iter().map(|id| s.legal_orders(*id).unwrap()).collect();
        let mut all = std::collections::HashSet::new();
        for x in &per[0] {
            for y in &per[1] {
                let g: GlobalAction = [(ids[0], *x), (ids[1], *y)].into_iter().collect();
                all.insert(g);
            }
        }
        assert_eq!(a.global_count(), Some(all.len() as u128));
    }

    #[test]
    fn dead_units_are_absent() {
        let mut doc = fixtures::tiny_duel();
        doc.forces[0][1].strength = 1;
        let mut s = GameState::instantiate(&doc, 7).unwrap();
        // Put b2 next to r2 and let deterministic combat run until it dies.
        let b2 = s.rules().unit_by_name("b2").unwrap();
        let r2 = s.rules().unit_by_name("r2").unwrap();
        let mut a = GlobalAction::new();
        a.set(b2, UnitOrder::move_to(s.unit(r2).unwrap().pos.neighbor(3)));
        s.apply_orders(Side::Blue, &a).unwrap();
        for _ in 0..20 {
            if !s.unit(b2).unwrap().alive() || s.terminal().is_some() {
                break;
            }
            s.step().unwrap();
        }
        assert!(!s.unit(b2).unwrap().alive());
        let (a, _) = describe_spaces(&s, Side::Blue);
        assert!(a.units.iter().all(|u| u.unit != b2));
    }
}
