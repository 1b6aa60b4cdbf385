//! Fixed-seed evaluation of candidate plans, shared by the population,
//! bandit and stratified planners.

use super::actions::{apply_orders_lenient, Assignment};
use super::budget::Forward;
use super::value::{finish_rollout, leaf_value, RolloutSpec};
use crate::engine::{GameState, GlobalAction, Side, SplitMix64};

/// Upper bound on the calls one evaluation of `cycles` command cycles costs.
pub fn evaluation_cost(state: &GameState, cycles: u32) -> u64 {
    1 + cycles as u64 * state.rules().ticks_per_command as u64
}

/// Play `own` for the first cycle while the opponent follows the rollout
/// policy, then `extra` more rollout cycles, and evaluate. `None` when the
/// evaluation does not fit the remaining budget.
pub fn evaluate_orders(
    root: &GameState,
    side: Side,
    own: &GlobalAction,
    extra: u32,
    seed: u64,
    spec: &RolloutSpec,
    fwd: &mut Forward,
) -> Option<f64> {
    if root.terminal().is_some() {
        return Some(leaf_value(root, side, &spec.weights));
    }
    if !fwd.can_afford(evaluation_cost(root, 1 + extra)) {
        return None;
    }
    let mut s = fwd.copy(root)?;
    let mut rng = SplitMix64::new(seed);
    s.reseed(seed);
    apply_orders_lenient(&mut s, side, own);
    let mut pending = [true, true];
    pending[side.index()] = false;
    Some(finish_rollout(s, side, pending, 1 + extra, spec, &mut rng, fwd))
}

/// Execute one assignment per command cycle for `side` and evaluate after
/// the last. `None` when the plan does not fit the remaining budget.
pub fn evaluate_plan(
    root: &GameState,
    side: Side,
    plan: &[Assignment],
    seed: u64,
    spec: &RolloutSpec,
    fwd: &mut Forward,
) -> Option<f64> {
    if root.terminal().is_some() {
        return Some(leaf_value(root, side, &spec.weights));
    }
    if !fwd.can_afford(evaluation_cost(root, plan.len() as u32)) {
        return None;
    }
    let mut s = fwd.copy(root)?;
    let mut rng = SplitMix64::new(seed);
    s.reseed(seed);
    for a in plan {
        if s.terminal().is_some() {
            break;
        }
        let own = a.orders_in(&s, side, &spec.params);
        apply_orders_lenient(&mut s, side, &own);
        let opp = spec.policy.orders(&s, side.opponent(), &spec.params, &mut rng);
        apply_orders_lenient(&mut s, side.opponent(), &opp);
        if !fwd.advance_cycle(&mut s) {
            break;
        }
    }
    Some(leaf_value(&s, side, &spec.weights))
}
