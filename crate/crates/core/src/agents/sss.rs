//! Stratified strategy selection and its two-stage refinement.
//!
//! Units are grouped by type, by whether an own objective is within three
//! hexes and by whether they keep at least half their maximum strength.
//! Every unit of a stratum runs the same script; the search is over one
//! script per stratum by first-improvement hill climbing with random
//! restarts. All evaluations of a decision share one rollout seed.

use std::cell::Cell;
use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;

use super::actions::{slot, Assignment};
use super::budget::{Forward, SearchBudget};
use super::plan::evaluate_orders;
use super::value::RolloutSpec;
use super::{AgentError, Candidate, DecisionRecord};
use crate::engine::rng::derive_seed;
use crate::engine::{GameState, GlobalAction, Side, SplitMix64, UnitId, UnitOrder};
use crate::interface::{observe, ObservationLevel};
use crate::scripts::ScriptId;

#[derive(Clone, Debug, PartialEq)]
pub struct SssParams {
    pub rollout_depth: u32,
    pub scripts: Vec<ScriptId>,
    pub spec: RolloutSpec,
}

impl Default for SssParams {
    fn default() -> Self {
        SssParams {
            rollout_depth: 1,
            scripts: ScriptId::ALL.to_vec(),
            spec: RolloutSpec::default(),
        }
    }
}

/// `(type name, near an objective, at least half strength)`.
pub type StratumKey = (String, bool, bool);

/// Live units of `side` grouped into strata, in key order.
pub fn strata(state: &GameState, side: Side) -> Vec<(StratumKey, Vec<UnitId>)> {
    let rules = state.rules();
    let objectives: Vec<_> = rules.objectives_of(side).map(|o| o.hex).collect();
    let mut m: BTreeMap<StratumKey, Vec<UnitId>> = BTreeMap::new();
    for u in state.live_units(side) {
        let ty = rules.unit_type(u.kind);
        let near = objectives.iter().any(|h| u.pos.distance(*h) <= 3);
        let healthy = 2 * u.strength as u32 >= ty.max_strength as u32;
        m.entry((ty.name.clone(), near, healthy)).or_default().push(u.id);
    }
    m.into_iter().collect()
}

pub struct SssOutcome {
    pub chosen: Assignment,
    pub value: f64,
    /// The rollout seed every evaluation of this decision used.
    pub eval_seed: u64,
    pub record: DecisionRecord,
}

fn expand(groups: &[(StratumKey, Vec<UnitId>)], roster: &[UnitId], choice: &[ScriptId]) -> Assignment {
    let mut a = Assignment(vec![ScriptId::HoldPosition; roster.len()]);
    for (g, s) in groups.iter().zip(choice) {
        for id in &g.1 {
            if let Some(i) = slot(roster, *id) {
                a.0[i] = *s;
            }
        }
    }
    a
}

pub fn sss_search(
    root: &GameState,
    side: Side,
    budget: &SearchBudget,
    p: &SssParams,
    seed: u64,
) -> Result<SssOutcome, AgentError> {
    if p.scripts.is_empty() {
        return Err(AgentError::Config("empty script set".into()));
    }
    let groups = strata(root, side);
    let roster = root.rules().side_units(side);
    let k = groups.len();
    let space = (p.scripts.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    let mut fwd = Forward::new(budget);
    let mut rng = SplitMix64::new(seed);
    let eval_seed = derive_seed(seed, 0x555);
    let mut cache: HashMap<Vec<ScriptId>, f64> = HashMap::new();
    let mut order: Vec<Vec<ScriptId>> = Vec::new();
    let max_evals = budget.max_iterations.unwrap_or(u64::MAX);
    let evaluated = Cell::new(0u128);
    let mut eval = |c: &Vec<ScriptId>, fwd: &mut Forward| -> Option<f64> {
        if let Some(v) = cache.get(c) {
            return Some(*v);
        }
        if cache.len() as u64 >= max_evals {
            return None;
        }
        let own = expand(&groups, roster, c).orders_in(root, side, &p.spec.params);
        let v = evaluate_orders(root, side, &own, p.rollout_depth, eval_seed, &p.spec, fwd)?;
        cache.insert(c.clone(), v);
        order.push(c.clone());
        evaluated.set(evaluated.get() + 1);
        Some(v)
    };

    let mut best: Option<(Vec<ScriptId>, f64)> = None;
    'restarts: loop {
        let mut current: Vec<ScriptId> = (0..k).map(|_| *p.scripts.choose(&mut rng).unwrap()).collect();
        let Some(mut value) = eval(&current, &mut fwd) else {
            break;
        };
        loop {
            if best.as_ref().is_none_or(|b| value > b.1) {
                best = Some((current.clone(), value));
            }
            let mut moves: Vec<(usize, ScriptId)> = (0..k)
                .flat_map(|i| p.scripts.iter().map(move |s| (i, *s)))
                .filter(|(i, s)| current[*i] != *s)
                .collect();
            moves.shuffle(&mut rng);
            let mut improved = false;
            for (i, s) in moves {
                let mut n = current.clone();
                n[i] = s;
                let Some(v) = eval(&n, &mut fwd) else {
                    break 'restarts;
                };
                if v > value {
                    current = n;
                    value = v;
                    improved = true;
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        if evaluated.get() >= space {
            break;
        }
    }
    let Some((choice, value)) = best else {
        return Err(AgentError::BudgetTooSmall("no evaluation fits the budget".into()));
    };
    let chosen_idx = order.iter().position(|c| *c == choice).unwrap();
    let candidates = order
        .iter()
        .map(|c| {
            let v = cache[c];
            Candidate {
                action: expand(&groups, roster, c).summary(root, side),
                visits: 1,
                mean: v,
                min: v,
                max: v,
            }
        })
        .collect();
    Ok(SssOutcome {
        chosen: expand(&groups, roster, &choice),
        value,
        eval_seed,
        record: DecisionRecord {
            tick: root.tick(),
            side,
            agent: String::new(),
            candidates,
            chosen: chosen_idx,
            forward_calls: fwd.used(),
            iterations: order.len() as u64,
        },
    })
}

pub struct TwoStageOutcome {
    pub action: GlobalAction,
    pub stage_one: GlobalAction,
    pub stage_one_value: f64,
    pub value: f64,
    pub record: DecisionRecord,
}

/// Radius around a tracked contact within which units are refined.
const CONTACT_RADIUS: u32 = 3;

/// Stratified search on half the budget, then greedy per-unit refinement of
/// the units near known enemies, visiting them round-robin and keeping only
/// improvements.
pub fn two_stage_search(
    root: &GameState,
    side: Side,
    budget: &SearchBudget,
    p: &SssParams,
    seed: u64,
) -> Result<TwoStageOutcome, AgentError> {
    let first = sss_search(root, side, &budget.fraction(0.5), p, seed)?;
    let stage_one = first.chosen.orders_in(root, side, &p.spec.params);
    let mut rest = *budget;
    if rest.max_forward_calls != u64::MAX {
        rest.max_forward_calls -= first.record.forward_calls;
    }
    if let Some(m) = rest.max_iterations.as_mut() {
        *m = m.saturating_sub(first.record.iterations);
    }
    let mut fwd = Forward::new(&rest);
    let obs = observe(root, side, ObservationLevel::Fog);
    let near: Vec<UnitId> = obs
        .own_units
        .iter()
        .filter(|u| {
            obs.contacts
                .iter()
                .any(|c| c.tracked && u.pos.distance(c.pos) <= CONTACT_RADIUS)
        })
        .map(|u| u.id)
        .collect();
    let mut queues: Vec<(UnitId, Vec<UnitOrder>)> = near
        .iter()
        .map(|id| {
            let current = stage_one.get(*id).copied();
            let legal = root.legal_orders(*id).unwrap_or_default();
            (*id, legal.into_iter().filter(|o| Some(*o) != current).rev().collect())
        })
        .collect();
    let mut action = stage_one.clone();
    let mut value = first.value;
    let mut tried = 0u64;
    let mut candidates = Vec::new();
    'refine: loop {
        let mut any = false;
        for (id, q) in queues.iter_mut() {
            let Some(o) = q.pop() else {
                continue;
            };
            any = true;
            if rest.max_iterations.is_some_and(|m| tried >= m) {
                break 'refine;
            }
            let mut trial = action.clone();
            trial.set(*id, o);
            let Some(v) = evaluate_orders(root, side, &trial, p.rollout_depth, first.eval_seed, &p.spec, &mut fwd)
            else {
                break 'refine;
            };
            tried += 1;
            candidates.push(Candidate {
                action: format!("{}:{}", root.rules().unit_name(*id), o.kind_name()),
                visits: 1,
                mean: v,
                min: v,
                max: v,
            });
            if v > value {
                action = trial;
                value = v;
            }
        }
        if !any {
            break;
        }
    }
    let mut record = first.record;
    record.forward_calls += fwd.used();
    record.iterations += tried;
    record.candidates.extend(candidates);
    Ok(TwoStageOutcome {
        action,
        stage_one,
        stage_one_value: first.value,
        value,
        record,
    })
}
