//! Text rendering. One glyph per hex, separated by spaces; row `r` is
//! indented by `r` columns so that axial neighbours touch. Units are shown
//! by roster slot: own (or blue, for the full state) as `A`, `B`, ...;
//! enemies and contacts as `a`, `b`, ...

use crate::engine::{GameState, Hex, Rules, Side, UnitId};
use crate::interface::Observation;

fn slot_glyph(rules: &Rules, id: UnitId, upper: bool) -> char {
    let side = rules.roster[id.index()].side;
    let slot = rules.side_units(side).iter().position(|u| *u == id).unwrap_or(0);
    let base = if upper { b'A' } else { b'a' };
    (base + (slot % 26) as u8) as char
}

fn grid(rules: &Rules, marks: &[(Hex, char)]) -> String {
    let map = &rules.map;
    let mut out = String::new();
    for r in 0..map.height() {
        out.push_str(&" ".repeat(r as usize));
        for q in 0..map.width() {
            let h = Hex::new(q, r);
            let c = marks
                .iter()
                .rev()
                .find(|(m, _)| *m == h)
                .map(|(_, c)| *c)
                .unwrap_or_else(|| map.terrain(h).map(|t| t.glyph()).unwrap_or('?'));
            if q > 0 {
                out.push(' ');
            }
            out.push(c);
        }
        out.push('\n');
    }
    out
}

/// The true state: blue units uppercase, red units lowercase.
pub fn render_state(state: &GameState) -> String {
    let rules = state.rules();
    let marks: Vec<(Hex, char)> = Side::BOTH
        .iter()
        .flat_map(|s| state.live_units(*s))
        .map(|u| (u.pos, slot_glyph(rules, u.id, u.side == Side::Blue)))
        .collect();
    grid(rules, &marks)
}

/// What one side sees: own units uppercase, contacts lowercase at their
/// last known position.
pub fn render_observation(obs: &Observation) -> String {
    let rules = &obs.rules;
    let mut marks: Vec<(Hex, char)> = obs
        .contacts
        .iter()
        .map(|c| (c.pos, slot_glyph(rules, c.enemy, false)))
        .collect();
    marks.extend(obs.own_units.iter().map(|u| (u.pos, slot_glyph(rules, u.id, true))));
    grid(rules, &marks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::{observe, ObservationLevel};
    use crate::scenario::{fixtures, parse_scenario};

    #[test]
    fn empty_clear_map() {
        let doc = parse_scenario(
            "scenario \"e\" version 1\nmap 3 3\nunittype i atk 1 def 1 range 1 sight 1 mp 1 maxstr 1\n\
             side blue\nunit b type i at 0 0 strength 1\nside red\nunit r type i at 2 2 strength 1\n\
             ticks_per_command 1\nmax_ticks 2\n",
        )
        .unwrap();
        let s = GameState::instantiate(&doc, 1).unwrap();
        let obs = observe(&s, Side::Blue, ObservationLevel::Fog);
        let mut own_only = obs.clone();
        own_only.own_units.clear();
        assert_eq!(render_observation(&own_only), ". . .\n . . .\n  . . .\n");
        assert_eq!(render_state(&s), "A . .\n . . .\n  . . a\n");
    }

    #[test]
    fn fog_hides_unspotted_enemies() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 4).unwrap();
        let text = render_observation(&observe(&s, Side::Blue, ObservationLevel::Fog));
        assert!(!text.chars().any(|c| c.is_ascii_lowercase()));
        assert_eq!(
            text,
            render_observation(&observe(&s, Side::Blue, ObservationLevel::Fog))
        );
        let full = render_observation(&observe(&s, Side::Blue, ObservationLevel::Full));
        assert_eq!(full.chars().filter(|c| c.is_ascii_lowercase()).count(), 5);
    }
}
