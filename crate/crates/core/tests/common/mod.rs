//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use wargame::agents::{all_assignments, apply_orders_lenient, leaf_value, Assignment, HeuristicWeights};
use wargame::engine::{GameState, GlobalAction, Side, SplitMix64};
use wargame::scenario::fixtures;
use wargame::scripts::{ScriptId, ScriptParams};

/// Step until the next command phase or the end of the game.
pub fn advance_cycle(s: &mut GameState) {
    loop {
        s.step().unwrap();
        if s.terminal().is_some() || s.is_command_phase() {
            return;
        }
    }
}

/// Distinct order sets reachable by script assignments for `mover`.
fn distinct_orders(s: &GameState, mover: Side, params: &ScriptParams) -> Vec<(Assignment, GlobalAction)> {
    let mut seen = HashSet::new();
    all_assignments(s, mover, &ScriptId::ALL)
        .into_iter()
        .map(|a| {
            let o = a.orders_in(s, mover, params);
            (a, o)
        })
        .filter(|(_, o)| seen.insert(o.clone()))
        .collect()
}

/// Paranoid minimax over `plies` alternating script-assignment plies from
/// `side`'s perspective. A cycle runs after every second ply.
fn minimax(s: &GameState, side: Side, mover: Side, plies: u32, w: &HeuristicWeights, params: &ScriptParams) -> f64 {
    if plies == 0 || s.terminal().is_some() {
        return leaf_value(s, side, w);
    }
    let mut best: Option<f64> = None;
    for (_, o) in distinct_orders(s, mover, params) {
        let mut c = s.fork();
        apply_orders_lenient(&mut c, mover, &o);
        if mover != side {
            advance_cycle(&mut c);
        }
        let v = minimax(&c, side, mover.opponent(), plies - 1, w, params);
        best = Some(match best {
            None => v,
            Some(b) if mover == side => b.max(v),
            Some(b) => b.min(v),
        });
    }
    best.unwrap_or_else(|| leaf_value(s, side, w))
}

/// The exact value of every root assignment of `side`.
pub fn minimax_root(s: &GameState, side: Side, plies: u32) -> Vec<(GlobalAction, f64)> {
    let w = HeuristicWeights::default();
    let params = ScriptParams::default();
    distinct_orders(s, side, &params)
        .into_iter()
        .map(|(_, o)| {
            let mut c = s.fork();
            apply_orders_lenient(&mut c, side, &o);
            let v = minimax(&c, side, side.opponent(), plies - 1, &w, &params);
            (o, v)
        })
        .collect()
}

/// Non-terminal command-phase tiny-duel states reached by random script play.
pub fn tiny_duel_instances(n: usize) -> Vec<GameState> {
    let params = ScriptParams::default();
    let mut out = Vec::new();
    let mut k = 0u64;
    while out.len() < n {
        let mut s = GameState::instantiate(&fixtures::tiny_duel(), k).unwrap();
        let mut rng = SplitMix64::new(1000 + k);
        let cycles = k % 6;
        k += 1;
        for _ in 0..cycles {
            for side in Side::BOTH {
                let o = wargame::agents::random_script_orders(&s, side, &params, &mut rng);
                apply_orders_lenient(&mut s, side, &o);
            }
            advance_cycle(&mut s);
            if s.terminal().is_some() {
                break;
            }
        }
        if s.terminal().is_none() {
            out.push(s);
        }
    }
    out
}
