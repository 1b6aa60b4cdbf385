use std::collections::HashSet;

use rand::seq::SliceRandom;
use thiserror::Error;

use super::doc::{ScenarioDoc, ValidationError};
use crate::engine::{Hex, SplitMix64};

/// Redraws allowed per unit when jitter lands on a blocked hex.
pub const MAX_REDRAWS: usize = 100;

/// How to perturb a scenario. The default is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    /// Each unit moves to a uniformly drawn hex within this distance.
    pub jitter_radius: u32,
    /// Every unit strength is multiplied by this and rounded, then clamped
    /// to `1..=maxStrength`.
    pub scale_strength: f64,
    /// Move objective `index` to a new hex.
    pub swap_objective: Option<(usize, Hex)>,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            jitter_radius: 0,
            scale_strength: 1.0,
            swap_objective: None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariantError {
    #[error("input scenario is invalid: {0}")]
    InvalidInput(String),
    #[error("strength scale factor {0} must be positive and finite")]
    BadScale(f64),
    #[error("objective index {0} does not exist")]
    NoSuchObjective(usize),
    #[error("no free passable hex for unit {0} after {MAX_REDRAWS} draws")]
    JitterExhausted(String),
    #[error("variant is invalid: {0}")]
    Invalid(String),
}

fn describe(e: ValidationError) -> String {
    e.message
}

/// A perturbed copy of `doc`, deterministic under `seed`.
pub fn generate_variant(doc: &ScenarioDoc, p: &Perturbation, seed: u64) -> Result<ScenarioDoc, VariantError> {
    doc.validate().map_err(|e| VariantError::InvalidInput(describe(e)))?;
    if !(p.scale_strength.is_finite() && p.scale_strength > 0.0) {
        return Err(VariantError::BadScale(p.scale_strength));
    }
    let mut out = doc.clone();
    let mut rng = SplitMix64::new(seed);

    if p.jitter_radius > 0 {
        let r = p.jitter_radius as i32;
        let origin = Hex::new(0, 0);
        let ball: Vec<Hex> = (-r..=r)
            .flat_map(|dq| (-r..=r).map(move |dr| Hex::new(dq, dr)))
            .filter(|h| h.distance(origin) <= p.jitter_radius)
            .collect();
        let mut taken: HashSet<Hex> = HashSet::new();
        for force in out.forces.iter_mut() {
            for unit in force.iter_mut() {
                let mut placed = None;
                for _ in 0..MAX_REDRAWS {
                    let d = *ball.choose(&mut rng).unwrap();
                    let cand = Hex::new(unit.pos.q + d.q, unit.pos.r + d.r);
                    let ok = doc.terrain_at(cand).is_some_and(|t| t.passable());
                    if ok && !taken.contains(&cand) {
                        placed = Some(cand);
                        break;
                    }
                }
                let Some(h) = placed else {
                    return Err(VariantError::JitterExhausted(unit.id.clone()));
                };
                taken.insert(h);
                unit.pos = h;
            }
        }
    }

    if p.scale_strength != 1.0 {
        for force in out.forces.iter_mut() {
            for unit in force.iter_mut() {
                let max = doc
                    .unit_types
                    .iter()
                    .find(|t| t.name == unit.type_name)
                    .map_or(1, |t| t.max_strength);
                let scaled = (unit.strength as f64 * p.scale_strength).round();
                unit.strength = scaled.clamp(1.0, max as f64) as u8;
            }
        }
    }

    if let Some((i, hex)) = p.swap_objective {
        let o = out.objectives.get_mut(i).ok_or(VariantError::NoSuchObjective(i))?;
        o.hex = hex;
    }

    out.validate().map_err(|e| VariantError::Invalid(describe(e)))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures;

    #[test]
    fn zero_jitter_is_identity() {
        let doc = fixtures::river_crossing();
        let p = Perturbation::default();
        assert_eq!(generate_variant(&doc, &p, 99).unwrap(), doc);
    }

    #[test]
    fn unit_scale_keeps_strengths() {
        let doc = fixtures::objective_hold();
        let p = Perturbation {
            scale_strength: 1.0,
            ..Perturbation::default()
        };
        let v = generate_variant(&doc, &p, 1).unwrap();
        let s = |d: &ScenarioDoc| d.units().map(|(_, u)| u.strength).collect::<Vec<_>>();
        assert_eq!(s(&v), s(&doc));
    }

    #[test]
    fn jitter_is_deterministic_and_local() {
        let doc = fixtures::river_crossing();
        let p = Perturbation {
            jitter_radius: 1,
            ..Perturbation::default()
        };
        let a = generate_variant(&doc, &p, 3).unwrap();
        let b = generate_variant(&doc, &p, 3).unwrap();
        assert_eq!(a, b);
        for ((_, before), (_, after)) in doc.units().zip(a.units()) {
            assert!(before.pos.distance(after.pos) <= 1);
        }
        let c = generate_variant(&doc, &p, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn scaling_clamps_to_type_bounds() {
        let doc = fixtures::tiny_duel();
        let up = Perturbation {
            scale_strength: 10.0,
            ..Perturbation::default()
        };
        let v = generate_variant(&doc, &up, 0).unwrap();
        assert_eq!(v.forces[0][0].strength, 4);
        let down = Perturbation {
            scale_strength: 0.01,
            ..Perturbation::default()
        };
        let v = generate_variant(&doc, &down, 0).unwrap();
        assert!(v.units().all(|(_, u)| u.strength == 1));
    }

    #[test]
    fn objective_swap_is_validated() {
        let doc = fixtures::river_crossing();
        let ok = Perturbation {
            swap_objective: Some((0, Hex::new(8, 8))),
            ..Perturbation::default()
        };
        assert_eq!(
            generate_variant(&doc, &ok, 0).unwrap().objectives[0].hex,
            Hex::new(8, 8)
        );
        let wet = Perturbation {
            swap_objective: Some((0, Hex::new(6, 0))),
            ..Perturbation::default()
        };
        assert!(matches!(generate_variant(&doc, &wet, 0), Err(VariantError::Invalid(_))));
        let missing = Perturbation {
            swap_objective: Some((40, Hex::new(0, 0))),
            ..Perturbation::default()
        };
        assert_eq!(
            generate_variant(&doc, &missing, 0),
            Err(VariantError::NoSuchObjective(40))
        );
    }

    #[test]
    fn boxed_in_unit_cannot_jitter() {
        let text = "scenario \"box\" version 1\nmap 3 3\nterrain default water\nterrain hex 1 1 clear\n\
                    unittype a atk 1 def 1 range 1 sight 1 mp 1 maxstr 2\nside blue\nunit b1 type a at 1 1 strength 1\n";
        let doc = crate::scenario::parse_scenario(text).unwrap();
        let p = Perturbation {
            jitter_radius: 1,
            ..Perturbation::default()
        };
        // The only passable hex is the unit's own, which the ball always
        // contains, so jitter succeeds by staying put.
        assert_eq!(generate_variant(&doc, &p, 5).unwrap(), doc);
        let line = "scenario \"line\" version 1\nmap 3 3\nterrain default water\n\
                    terrain hex 0 1 clear\nterrain hex 1 1 clear\nterrain hex 2 1 clear\n\
                    unittype a atk 1 def 1 range 1 sight 1 mp 1 maxstr 2\nside blue\n\
                    unit b1 type a at 0 1 strength 1\nunit b2 type a at 1 1 strength 1\n\
                    side red\nunit r1 type a at 2 1 strength 1\n";
        let doc = crate::scenario::parse_scenario(line).unwrap();
        // If b1 steps right and b2 follows, r1 is left with no free hex.
        let outcomes: Vec<_> = (0..50).map(|s| generate_variant(&doc, &p, s).is_ok()).collect();
        assert!(outcomes.contains(&false));
        assert!(outcomes.contains(&true));
    }
}
