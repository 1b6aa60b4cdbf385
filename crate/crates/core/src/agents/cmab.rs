//! Naive-sampling combinatorial bandit over one script per unit.

use std::collections::HashMap;

use rand::Rng;

use super::actions::Assignment;
use super::budget::{Forward, SearchBudget};
use super::plan::evaluate_orders;
use super::value::RolloutSpec;
use super::{AgentError, Candidate, DecisionRecord};
use crate::engine::rng::derive_seed;
use crate::engine::{GameState, Side, SplitMix64};
use crate::scripts::ScriptId;

#[derive(Clone, Copy, Debug)]
struct Mean {
    n: u64,
    mean: f64,
    lo: f64,
    hi: f64,
}

impl Default for Mean {
    fn default() -> Self {
        Mean {
            n: 0,
            mean: 0.0,
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
        }
    }
}

impl Mean {
    fn add(&mut self, x: f64) {
        self.n += 1;
        self.mean += (x - self.mean) / self.n as f64;
        self.lo = self.lo.min(x);
        self.hi = self.hi.max(x);
    }
}

/// A global arm's pull count, mean and observed range.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmStats {
    pub arm: Vec<usize>,
    pub pulls: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Statistics of a finished bandit run.
#[derive(Clone, Debug)]
pub struct CmabResult {
    pub best: Vec<usize>,
    /// Every global arm tried, in first-pull order.
    pub arms: Vec<ArmStats>,
    pub evaluations: u64,
}

/// Run naive sampling over `units` components with `arms` choices each.
/// `evaluate` returns the reward of a global arm, or `None` to stop.
///
/// With probability `epsilon` a global arm is assembled from per-unit
/// epsilon-greedy choices (untried local arms first); otherwise the
/// incumbent, the global arm with the best mean, is replayed. The result is
/// the most pulled global arm, ties broken by mean.
pub fn naive_sampling(
    units: usize,
    arms: usize,
    epsilon: f64,
    max_evals: u64,
    rng: &mut SplitMix64,
    mut evaluate: impl FnMut(&[usize], &mut SplitMix64) -> Option<f64>,
) -> CmabResult {
    let mut local = vec![vec![Mean::default(); arms]; units];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut global: Vec<(Vec<usize>, Mean)> = Vec::new();
    let mut evaluations = 0;
    while evaluations < max_evals {
        let explore = global.is_empty() || rng.gen::<f64>() < epsilon;
        let arm: Vec<usize> = if explore {
            local
                .iter()
                .map(|stats| {
                    let untried: Vec<usize> = (0..arms).filter(|a| stats[*a].n == 0).collect();
                    if !untried.is_empty() {
                        untried[rng.gen_range(0..untried.len())]
                    } else if rng.gen::<f64>() < epsilon {
                        rng.gen_range(0..arms)
                    } else {
                        (0..arms)
                            .max_by(|a, b| stats[*a].mean.total_cmp(&stats[*b].mean).then(b.cmp(a)))
                            .unwrap()
                    }
                })
                .collect()
        } else {
            global
                .iter()
                .max_by(|a, b| a.1.mean.total_cmp(&b.1.mean).then(a.1.n.cmp(&b.1.n)))
                .unwrap()
                .0
                .clone()
        };
        let Some(r) = evaluate(&arm, rng) else {
            break;
        };
        evaluations += 1;
        for (u, a) in arm.iter().enumerate() {
            local[u][*a].add(r);
        }
        let i = *index.entry(arm.clone()).or_insert_with(|| {
            global.push((arm, Mean::default()));
            global.len() - 1
        });
        global[i].1.add(r);
    }
    let best = global
        .iter()
        .max_by(|a, b| a.1.n.cmp(&b.1.n).then(a.1.mean.total_cmp(&b.1.mean)))
        .map(|g| g.0.clone())
        .unwrap_or_default();
    CmabResult {
        best,
        arms: global
            .into_iter()
            .map(|(arm, m)| ArmStats {
                arm,
                pulls: m.n,
                mean: m.mean,
                min: m.lo,
                max: m.hi,
            })
            .collect(),
        evaluations,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CmabParams {
    pub epsilon: f64,
    /// Rollout cycles after the cycle in which the arm is played.
    pub rollout_depth: u32,
    pub scripts: Vec<ScriptId>,
    pub spec: RolloutSpec,
}

impl Default for CmabParams {
    fn default() -> Self {
        CmabParams {
            epsilon: 0.4,
            rollout_depth: 1,
            scripts: ScriptId::ALL.to_vec(),
            spec: RolloutSpec::default(),
        }
    }
}

pub struct CmabOutcome {
    pub chosen: Assignment,
    pub record: DecisionRecord,
}

/// The bandit over the live units of `side` at `root`; every pull is one
/// rollout with fresh chance.
pub fn cmab_search(
    root: &GameState,
    side: Side,
    budget: &SearchBudget,
    p: &CmabParams,
    seed: u64,
) -> Result<CmabOutcome, AgentError> {
    if p.scripts.is_empty() {
        return Err(AgentError::Config("empty script set".into()));
    }
    let roster = root.rules().side_units(side);
    let live: Vec<usize> = (0..roster.len())
        .filter(|i| root.units()[roster[*i].index()].alive())
        .collect();
    let to_assignment = |arm: &[usize]| {
        let mut a = Assignment(vec![ScriptId::HoldPosition; roster.len()]);
        for (k, &i) in live.iter().enumerate() {
            a.0[i] = p.scripts[arm[k]];
        }
        a
    };
    let mut fwd = Forward::new(budget);
    let mut rng = SplitMix64::new(seed);
    let mut pull = 0u64;
    let result = naive_sampling(
        live.len(),
        p.scripts.len(),
        p.epsilon,
        budget.max_iterations.unwrap_or(u64::MAX),
        &mut rng,
        |arm, _| {
            pull += 1;
            let own = to_assignment(arm).orders_in(root, side, &p.spec.params);
            evaluate_orders(
                root,
                side,
                &own,
                p.rollout_depth,
                derive_seed(seed, pull),
                &p.spec,
                &mut fwd,
            )
        },
    );
    if result.evaluations == 0 {
        return Err(AgentError::BudgetTooSmall("no evaluation fits the budget".into()));
    }
    let chosen_arm = result.best.clone();
    let chosen = result.arms.iter().position(|a| a.arm == chosen_arm).unwrap();
    let candidates = result
        .arms
        .iter()
        .map(|a| Candidate {
            action: to_assignment(&a.arm).summary(root, side),
            visits: a.pulls,
            mean: a.mean,
            min: a.min,
            max: a.max,
        })
        .collect();
    Ok(CmabOutcome {
        chosen: to_assignment(&chosen_arm),
        record: DecisionRecord {
            tick: root.tick(),
            side,
            agent: String::new(),
            candidates,
            chosen,
            forward_calls: fwd.used(),
            iterations: result.evaluations,
        },
    })
}
