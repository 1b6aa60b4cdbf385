use serde::{Deserialize, Serialize};

use crate::interface::Observation;

/// Six fixed-order features of one side's view of the game.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub own_strength_total: f64,
    /// Sum of the last-seen strengths of all contacts.
    pub known_enemy_strength: f64,
    /// Own objectives currently occupied by an own unit.
    pub objectives_held_count: f64,
    /// Mean over own units of the distance to the nearest own objective;
    /// zero when the side has no units or no objectives.
    pub mean_distance_to_nearest_objective: f64,
    /// Contacts seen this tick.
    pub visible_enemy_count: f64,
    pub tick_fraction: f64,
}

impl FeatureVector {
    pub const LEN: usize = 6;
    pub const NAMES: [&'static str; 6] = [
        "ownStrengthTotal",
        "knownEnemyStrength",
        "objectivesHeldCount",
        "meanDistanceToNearestObjective",
        "visibleEnemyCount",
        "tickFraction",
    ];

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.own_strength_total,
            self.known_enemy_strength,
            self.objectives_held_count,
            self.mean_distance_to_nearest_objective,
            self.visible_enemy_count,
            self.tick_fraction,
        ]
    }
}

pub fn extract_features(obs: &Observation) -> FeatureVector {
    let objectives: Vec<_> = obs.rules.objectives_of(obs.side).map(|o| o.hex).collect();
    let own_strength_total = obs.own_units.iter().map(|u| u.strength as f64).sum();
    let known_enemy_strength = obs.contacts.iter().map(|c| c.strength as f64).sum();
    let objectives_held_count = objectives
        .iter()
        .filter(|h| obs.own_units.iter().any(|u| u.pos == **h))
        .count() as f64;
    let mean_distance_to_nearest_objective = if objectives.is_empty() || obs.own_units.is_empty() {
        0.0
    } else {
        let total: u32 = obs
            .own_units
            .iter()
            .map(|u| objectives.iter().map(|h| u.pos.distance(*h)).min().unwrap())
            .sum();
        total as f64 / obs.own_units.len() as f64
    };
    let visible_enemy_count = obs.contacts.iter().filter(|c| c.staleness == 0).count() as f64;
    let max = obs.rules.max_ticks.max(1) as f64;
    FeatureVector {
        own_strength_total,
        known_enemy_strength,
        objectives_held_count,
        mean_distance_to_nearest_objective,
        visible_enemy_count,
        tick_fraction: (obs.tick as f64 / max).clamp(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{GameState, Side};
    use crate::interface::{observe, ObservationLevel};
    use crate::scenario::fixtures;

    #[test]
    fn tick_zero_has_no_known_enemies() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 7).unwrap();
        let f = extract_features(&observe(&s, Side::Blue, ObservationLevel::Fog));
        assert_eq!(f.known_enemy_strength, 0.0);
        assert_eq!(f.visible_enemy_count, 0.0);
        // b1 strength 4 and b2 strength 3.
        assert_eq!(f.own_strength_total, 7.0);
        assert_eq!(f.tick_fraction, 0.0);
        // b1 at (0,1) is three hexes from the objective at (2,2), b2 at (0,3) two.
        assert_eq!(f.mean_distance_to_nearest_objective, 2.5);
        assert_eq!(f.objectives_held_count, 0.0);
    }

    #[test]
    fn tick_fraction_is_a_ratio() {
        let mut doc = fixtures::tiny_duel();
        doc.max_ticks = 100;
        doc.forces[1].clear();
        doc.forces[1].push(crate::scenario::UnitPlacement {
            id: "r1".into(),
            type_name: "infantry".into(),
            pos: crate::engine::Hex::new(4, 4),
            strength: 1,
        });
        let mut s = GameState::instantiate(&doc, 1).unwrap();
        // Keep the lone red unit out of harm's way: nobody has orders.
        for _ in 0..50 {
            s.step().unwrap();
        }
        let f = extract_features(&observe(&s, Side::Blue, ObservationLevel::Fog));
        assert_eq!(f.tick_fraction, 0.5);
    }

    #[test]
    fn full_observation_counts_every_enemy() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 7).unwrap();
        let a = extract_features(&observe(&s, Side::Red, ObservationLevel::Full));
        assert_eq!(a.known_enemy_strength, 7.0);
        assert_eq!(a.visible_enemy_count, 2.0);
        assert_eq!(a, extract_features(&observe(&s, Side::Red, ObservationLevel::Full)));
    }
}
