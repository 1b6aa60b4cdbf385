use rand::Rng;
use serde::{Deserialize, Serialize};

use super::actions::{apply_orders_lenient, random_script_orders};
use super::budget::Forward;
use crate::engine::{GameState, Side, SplitMix64};
use crate::interface::{observe, ObservationLevel};
use crate::scripts::{uniform_scripted_action, ScriptId, ScriptParams};

/// Weights `(w1, w2, w3, w4)` of the static evaluation: victory-point
/// margin, strength margin, spotted fraction and objective proximity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicWeights(pub [f64; 4]);

impl Default for HeuristicWeights {
    fn default() -> Self {
        HeuristicWeights([1.0, 0.5, 0.1, 0.2])
    }
}

/// Static evaluation of `state` for `side`.
///
/// The enemy strength term uses what the side can know for certain: the
/// roster strength minus everything it has inflicted.
pub fn heuristic_value(state: &GameState, side: Side, w: &HeuristicWeights) -> f64 {
    let rules = state.rules();
    let opp = side.opponent();
    let [w1, w2, w3, w4] = w.0;
    let vp = state.victory_points(side) - state.victory_points(opp);
    let own = state.total_strength(side) as f64;
    let known_enemy = rules.initial_strength(opp) as f64 - state.score().strength_inflicted[side.index()] as f64;
    let roster = rules.side_units(opp).len().max(1) as f64;
    let spotted = state.contacts(side).count() as f64 / roster;
    let objectives: Vec<_> = rules.objectives_of(side).map(|o| o.hex).collect();
    let mut dist_sum = 0.0;
    let mut n = 0usize;
    if !objectives.is_empty() {
        for u in state.live_units(side) {
            dist_sum += objectives.iter().map(|h| u.pos.distance(*h)).min().unwrap() as f64;
            n += 1;
        }
    }
    let mean_dist = if n == 0 { 0.0 } else { dist_sum / n as f64 };
    let diameter = rules.map.diameter().max(1) as f64;
    w1 * vp + w2 * (own - known_enemy) + w3 * spotted + w4 * (-mean_dist / diameter)
}

/// `+1` win, `-1` loss, `0` draw by victory points.
pub fn outcome_sign(state: &GameState, side: Side) -> f64 {
    let d = state.victory_points(side) - state.victory_points(side.opponent());
    if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Heuristic plus a `w1`-scaled win/loss bonus.
pub fn terminal_value(state: &GameState, side: Side, w: &HeuristicWeights) -> f64 {
    heuristic_value(state, side, w) + w.0[0] * outcome_sign(state, side)
}

/// Terminal value for finished games, heuristic otherwise.
pub fn leaf_value(state: &GameState, side: Side, w: &HeuristicWeights) -> f64 {
    if state.terminal().is_some() {
        terminal_value(state, side, w)
    } else {
        heuristic_value(state, side, w)
    }
}

/// How both sides act during rollouts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RolloutPolicy {
    /// Every unit draws a script uniformly each cycle.
    #[default]
    RandomScripts,
    /// Every unit of both sides runs the same script.
    Script(ScriptId),
}

impl RolloutPolicy {
    pub fn orders(
        &self,
        state: &GameState,
        side: Side,
        params: &ScriptParams,
        rng: &mut SplitMix64,
    ) -> crate::engine::GlobalAction {
        match self {
            RolloutPolicy::RandomScripts => random_script_orders(state, side, params, rng),
            RolloutPolicy::Script(s) => {
                uniform_scripted_action(&observe(state, side, ObservationLevel::Fog), params, *s)
            }
        }
    }
}

/// Shared settings of every rollout.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct RolloutSpec {
    pub policy: RolloutPolicy,
    pub weights: HeuristicWeights,
    pub params: ScriptParams,
}

/// Continue an already-copied planning state. Sides flagged in `pending`
/// still owe orders for the current command phase. Runs `cycles` command
/// cycles (fewer if the game ends or the budget runs out) and evaluates.
pub fn finish_rollout(
    mut state: GameState,
    side: Side,
    mut pending: [bool; 2],
    cycles: u32,
    spec: &RolloutSpec,
    rng: &mut SplitMix64,
    fwd: &mut Forward,
) -> f64 {
    for _ in 0..cycles {
        if state.terminal().is_some() {
            break;
        }
        for s in Side::BOTH {
            if pending[s.index()] {
                let a = spec.policy.orders(&state, s, &spec.params, rng);
                apply_orders_lenient(&mut state, s, &a);
            }
        }
        pending = [true, true];
        if !fwd.advance_cycle(&mut state) {
            break;
        }
    }
    leaf_value(&state, side, &spec.weights)
}

/// Value of `state` for `side` after `depth` command cycles of the rollout
/// policy, with chance redrawn from `seed`.
pub fn rollout_value(
    state: &GameState,
    side: Side,
    depth: u32,
    seed: u64,
    spec: &RolloutSpec,
    fwd: &mut Forward,
) -> f64 {
    if state.terminal().is_some() {
        return terminal_value(state, side, &spec.weights);
    }
    if depth == 0 {
        return heuristic_value(state, side, &spec.weights);
    }
    let Some(mut copy) = fwd.copy(state) else {
        return heuristic_value(state, side, &spec.weights);
    };
    let mut rng = SplitMix64::new(seed);
    copy.reseed(rng.gen());
    finish_rollout(copy, side, [true, true], depth, spec, &mut rng, fwd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::budget::SearchBudget;
    use crate::scenario::fixtures;

    #[test]
    fn tiny_duel_initial_value() {
        // Scores, strengths and spotting are all level at tick 0. Blue's
        // units at (0,1) and (0,3) are 3 and 2 hexes from (2,2) on a map of
        // diameter 8, so V = 0.2 * -(2.5 / 8).
        let s = GameState::instantiate(&fixtures::tiny_duel(), 1).unwrap();
        let v = heuristic_value(&s, Side::Blue, &HeuristicWeights::default());
        assert!((v - (-0.0625)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn depth_zero_is_the_heuristic() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 4).unwrap();
        let spec = RolloutSpec::default();
        let mut f = Forward::new(&SearchBudget::calls(100));
        let v = rollout_value(&s, Side::Red, 0, 9, &spec, &mut f);
        assert_eq!(v, heuristic_value(&s, Side::Red, &spec.weights));
        assert_eq!(f.used(), 0);
    }

    #[test]
    fn rollouts_are_seeded() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 4).unwrap();
        let spec = RolloutSpec::default();
        let run = |seed| {
            let mut f = Forward::new(&SearchBudget::calls(1000));
            rollout_value(&s, Side::Blue, 3, seed, &spec, &mut f)
        };
        assert_eq!(run(5), run(5));
        let h = s.state_hash();
        let _ = run(6);
        assert_eq!(s.state_hash(), h);
    }

    #[test]
    fn finished_games_score_terminally() {
        let mut s = GameState::instantiate(&fixtures::tiny_duel(), 4).unwrap();
        while s.terminal().is_none() {
            s.step().unwrap();
        }
        let spec = RolloutSpec::default();
        let mut f = Forward::new(&SearchBudget::calls(10));
        let v = rollout_value(&s, Side::Blue, 3, 1, &spec, &mut f);
        assert_eq!(v, terminal_value(&s, Side::Blue, &spec.weights));
        assert_eq!(f.used(), 0);
    }
}
