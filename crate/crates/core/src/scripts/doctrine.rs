use std::str::FromStr;

use thiserror::Error;

use crate::engine::{GlobalAction, Terrain, Unit, UnitOrder};
use crate::interface::Observation;

/// A rule that vetoes orders. Vetoed orders become Hold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DoctrineRule {
    /// No Attack unless own strength / last-seen target strength >= ratio.
    ForbidAttackBelowOdds(f64),
    /// No Move whose route enters this terrain.
    ForbidEnterTerrain(Terrain),
    /// No Move or Scout reaching further than this from the unit's start hex.
    ForbidBeyondHex(u32),
}

impl DoctrineRule {
    fn allows(&self, unit: &Unit, order: &UnitOrder, obs: &Observation) -> bool {
        match (*self, order) {
            (_, UnitOrder::Hold) => true,
            (DoctrineRule::ForbidAttackBelowOdds(ratio), UnitOrder::Attack(t)) => match obs.contact(*t) {
                Some(c) if c.strength > 0 => unit.strength as f64 / c.strength as f64 >= ratio,
                _ => true,
            },
            (DoctrineRule::ForbidEnterTerrain(t), UnitOrder::Move(wps)) => {
                let map = &obs.rules.map;
                let mut from = unit.pos;
                for &w in wps.iter() {
                    match map.find_path(from, w) {
                        Ok(path) => {
                            if path.iter().any(|h| map.terrain(*h).ok() == Some(t)) {
                                return false;
                            }
                        }
                        Err(_) => return map.terrain(w).ok() != Some(t),
                    }
                    from = w;
                }
                true
            }
            (DoctrineRule::ForbidBeyondHex(d), UnitOrder::Move(wps)) => {
                let start = obs.rules.roster[unit.id.index()].start;
                wps.iter().all(|h| start.distance(*h) <= d)
            }
            (DoctrineRule::ForbidBeyondHex(d), UnitOrder::Scout { anchor, radius }) => {
                let start = obs.rules.roster[unit.id.index()].start;
                start.distance(*anchor) + radius <= d
            }
            _ => true,
        }
    }
}

/// Replace every order that breaks a rule by Hold. Orders for units the
/// observation does not show as own live units pass through untouched.
pub fn filter_doctrine(orders: &GlobalAction, rules: &[DoctrineRule], obs: &Observation) -> GlobalAction {
    if rules.is_empty() {
        return orders.clone();
    }
    orders
        .iter()
        .map(|(id, o)| {
            let keep = match obs.own_unit(id) {
                Some(u) => rules.iter().all(|r| r.allows(u, o, obs)),
                None => true,
            };
            (id, if keep { *o } else { UnitOrder::Hold })
        })
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("doctrine line {line}: {message}")]
pub struct DoctrineError {
    pub line: usize,
    pub message: String,
}

/// One rule per line: `forbidAttackBelowOdds <ratio>`,
/// `forbidEnterTerrain <terrain>` or `forbidBeyondHex <distance>`.
/// `#` starts a comment.
pub fn parse_doctrine(text: &str) -> Result<Vec<DoctrineRule>, DoctrineError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| DoctrineError { line: i + 1, message };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(err(format!("expected `<rule> <argument>`, got {line:?}")));
        }
        let rule = match toks[0] {
            "forbidAttackBelowOdds" => {
                let r = f64::from_str(toks[1]).map_err(|e| err(e.to_string()))?;
                if !(r.is_finite() && r >= 0.0) {
                    return Err(err(format!("odds ratio {r} must be a non-negative number")));
                }
                DoctrineRule::ForbidAttackBelowOdds(r)
            }
            "forbidEnterTerrain" => DoctrineRule::ForbidEnterTerrain(Terrain::from_str(toks[1]).map_err(err)?),
            "forbidBeyondHex" => DoctrineRule::ForbidBeyondHex(u32::from_str(toks[1]).map_err(|e| err(e.to_string()))?),
            other => return Err(err(format!("unknown doctrine rule {other:?}"))),
        };
        out.push(rule);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{GameState, Hex, Side, UnitId};
    use crate::interface::{observe, ObservationLevel};
    use crate::scenario::parse_scenario;

    fn setup() -> (GameState, UnitId, UnitId) {
        let text = "scenario \"d\" version 1\nmap 8 8\nterrain hex 3 2 woods\n\
                    unittype inf atk 4 def 4 range 1 sight 4 mp 1 maxstr 6\n\
                    side blue\nunit b1 type inf at 2 2 strength 4\n\
                    side red\nunit r1 type inf at 2 3 strength 3\n";
        let mut s = GameState::instantiate(&parse_scenario(text).unwrap(), 1).unwrap();
        let b1 = s.rules().unit_by_name("b1").unwrap();
        let r1 = s.rules().unit_by_name("r1").unwrap();
        s.spot_attempt(b1, r1, 0.0).unwrap();
        (s, b1, r1)
    }

    #[test]
    fn no_rules_is_identity() {
        let (s, b1, r1) = setup();
        let o = observe(&s, Side::Blue, ObservationLevel::Fog);
        let a: GlobalAction = [(b1, UnitOrder::Attack(r1))].into_iter().collect();
        assert_eq!(filter_doctrine(&a, &[], &o), a);
    }

    #[test]
    fn entering_woods_forbidden() {
        let (s, b1, _) = setup();
        let o = observe(&s, Side::Blue, ObservationLevel::Fog);
        let rules = [DoctrineRule::ForbidEnterTerrain(Terrain::Woods)];
        let into: GlobalAction = [(b1, UnitOrder::move_to(Hex::new(3, 2)))].into_iter().collect();
        assert_eq!(filter_doctrine(&into, &rules, &o).get(b1), Some(&UnitOrder::Hold));
        let clear: GlobalAction = [(b1, UnitOrder::move_to(Hex::new(1, 2)))].into_iter().collect();
        assert_eq!(filter_doctrine(&clear, &rules, &o), clear);
    }

    #[test]
    fn attack_below_odds_forbidden() {
        let (s, b1, r1) = setup();
        let o = observe(&s, Side::Blue, ObservationLevel::Fog);
        let a: GlobalAction = [(b1, UnitOrder::Attack(r1))].into_iter().collect();
        // 4 against 3 is 1.33.
        let strict = [DoctrineRule::ForbidAttackBelowOdds(1.5)];
        assert_eq!(filter_doctrine(&a, &strict, &o).get(b1), Some(&UnitOrder::Hold));
        let lax = [DoctrineRule::ForbidAttackBelowOdds(1.3)];
        assert_eq!(filter_doctrine(&a, &lax, &o), a);
    }

    #[test]
    fn beyond_hex_forbidden() {
        let (s, b1, _) = setup();
        let o = observe(&s, Side::Blue, ObservationLevel::Fog);
        let rules = [DoctrineRule::ForbidBeyondHex(2)];
        let far: GlobalAction = [(b1, UnitOrder::move_to(Hex::new(6, 2)))].into_iter().collect();
        assert_eq!(filter_doctrine(&far, &rules, &o).get(b1), Some(&UnitOrder::Hold));
        let scout: GlobalAction = [(
            b1,
            UnitOrder::Scout {
                anchor: Hex::new(2, 2),
                radius: 2,
            },
        )]
        .into_iter()
        .collect();
        assert_eq!(filter_doctrine(&scout, &rules, &o), scout);
    }

    #[test]
    fn filtering_is_idempotent() {
        let (s, b1, r1) = setup();
        let o = observe(&s, Side::Blue, ObservationLevel::Fog);
        let rules = [
            DoctrineRule::ForbidAttackBelowOdds(1.5),
            DoctrineRule::ForbidEnterTerrain(Terrain::Woods),
            DoctrineRule::ForbidBeyondHex(3),
        ];
        for order in [
            UnitOrder::Attack(r1),
            UnitOrder::move_to(Hex::new(3, 2)),
            UnitOrder::move_to(Hex::new(7, 7)),
            UnitOrder::move_to(Hex::new(1, 1)),
            UnitOrder::Hold,
        ] {
            let a: GlobalAction = [(b1, order)].into_iter().collect();
            let once = filter_doctrine(&a, &rules, &o);
            assert_eq!(filter_doctrine(&once, &rules, &o), once);
        }
    }

    #[test]
    fn doctrine_text_parses() {
        let rules =
            parse_doctrine("# rules\nforbidAttackBelowOdds 1.5\nforbidEnterTerrain woods\n\nforbidBeyondHex 4 # far\n")
                .unwrap();
        assert_eq!(
            rules,
            vec![
                DoctrineRule::ForbidAttackBelowOdds(1.5),
                DoctrineRule::ForbidEnterTerrain(Terrain::Woods),
                DoctrineRule::ForbidBeyondHex(4),
            ]
        );
        assert_eq!(parse_doctrine("forbidFun 1").unwrap_err().line, 1);
        assert_eq!(parse_doctrine("\nforbidEnterTerrain lava").unwrap_err().line, 2);
    }
}
