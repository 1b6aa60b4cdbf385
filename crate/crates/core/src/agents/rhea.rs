//! Rolling horizon evolution over plans of per-unit script assignments.
//!
//! Fitness uses one rollout seed for the whole decision, so a genome's
//! fitness is a fixed number within a decision and is computed at most once.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::actions::Assignment;
use super::budget::{Forward, SearchBudget};
use super::plan::{evaluate_plan, evaluation_cost};
use super::value::RolloutSpec;
use super::{AgentError, Candidate, DecisionRecord};
use crate::engine::rng::derive_seed;
use crate::engine::{GameState, Side, SplitMix64};
use crate::scripts::ScriptId;

#[derive(Clone, Debug, PartialEq)]
pub struct RheaParams {
    /// Plan length in command cycles.
    pub horizon: u32,
    pub population: usize,
    pub elitism: usize,
    /// Per-gene probability of taking the second parent's gene.
    pub crossover: f64,
    /// Per-gene probability of redrawing a gene.
    pub mutation: f64,
    pub scripts: Vec<ScriptId>,
    pub spec: RolloutSpec,
}

impl Default for RheaParams {
    fn default() -> Self {
        RheaParams {
            horizon: 5,
            population: 10,
            elitism: 1,
            crossover: 0.5,
            mutation: 0.3,
            scripts: ScriptId::ALL.to_vec(),
            spec: RolloutSpec::default(),
        }
    }
}

const STALE_GENERATIONS: usize = 20;

pub type Genome = Vec<Assignment>;

pub struct RheaOutcome {
    pub best: Genome,
    pub best_fitness: f64,
    /// Best fitness in the population after each generation, the initial
    /// population first.
    pub history: Vec<f64>,
    pub record: DecisionRecord,
}

fn random_genome(root: &GameState, side: Side, p: &RheaParams, rng: &mut SplitMix64) -> Genome {
    (0..p.horizon)
        .map(|_| Assignment::random(root, side, &p.scripts, rng))
        .collect()
}

/// Evolve plans from `root`. `seed_genome` (the shifted previous best)
/// joins the initial population when its shape fits.
pub fn rhea_search(
    root: &GameState,
    side: Side,
    budget: &SearchBudget,
    p: &RheaParams,
    seed: u64,
    seed_genome: Option<&Genome>,
    initial: Option<Vec<Genome>>,
) -> Result<RheaOutcome, AgentError> {
    if p.population == 0 || p.horizon == 0 || p.scripts.is_empty() || p.elitism > p.population {
        return Err(AgentError::Config(
            "population, horizon and script set must be non-empty".into(),
        ));
    }
    let generation_cost = p.population as u64 * evaluation_cost(root, p.horizon);
    if budget.max_forward_calls < generation_cost || budget.max_iterations.is_some_and(|m| m < p.population as u64) {
        return Err(AgentError::BudgetTooSmall(format!(
            "one generation needs {generation_cost} forward calls"
        )));
    }
    let mut fwd = Forward::new(budget);
    let mut rng = SplitMix64::new(seed);
    let eval_seed = derive_seed(seed, 0xE7A1);
    let roster_len = root.rules().side_units(side).len();
    let mut cache: HashMap<Genome, f64> = HashMap::new();
    let mut evaluations = 0u64;
    let mut fitness = |g: &Genome, fwd: &mut Forward, evaluations: &mut u64| -> Option<f64> {
        if let Some(f) = cache.get(g) {
            return Some(*f);
        }
        if budget.max_iterations.is_some_and(|m| *evaluations >= m) {
            return None;
        }
        let f = evaluate_plan(root, side, g, eval_seed, &p.spec, fwd)?;
        *evaluations += 1;
        cache.insert(g.clone(), f);
        Some(f)
    };

    let mut pop: Vec<Genome> = initial.unwrap_or_default();
    pop.truncate(p.population);
    if let Some(g) = seed_genome {
        if pop.len() < p.population && g.len() == p.horizon as usize && g.iter().all(|a| a.0.len() == roster_len) {
            pop.push(g.clone());
        }
    }
    while pop.len() < p.population {
        pop.push(random_genome(root, side, p, &mut rng));
    }
    let mut scored: Vec<(Genome, f64)> = Vec::with_capacity(p.population);
    for g in pop {
        let f = fitness(&g, &mut fwd, &mut evaluations)
            .ok_or_else(|| AgentError::BudgetTooSmall("the initial population does not fit the budget".into()))?;
        scored.push((g, f));
    }
    let rank = |v: &mut Vec<(Genome, f64)>| v.sort_by(|a, b| b.1.total_cmp(&a.1));
    rank(&mut scored);
    let mut history = vec![scored[0].1];

    // Generations that only revisit known genomes cost nothing; stop after
    // a run of them.
    let mut stale = 0;
    'generations: while stale < STALE_GENERATIONS {
        let before = evaluations;
        let mut next: Vec<(Genome, f64)> = scored[..p.elitism].to_vec();
        while next.len() < p.population {
            let pick = |rng: &mut SplitMix64| {
                let a = rng.gen_range(0..scored.len());
                let b = rng.gen_range(0..scored.len());
                if scored[a].1 >= scored[b].1 {
                    a
                } else {
                    b
                }
            };
            let (pa, pb) = (pick(&mut rng), pick(&mut rng));
            let mut child = scored[pa].0.clone();
            for (c, step) in child.iter_mut().enumerate() {
                for (u, gene) in step.0.iter_mut().enumerate() {
                    if rng.gen::<f64>() < p.crossover {
                        *gene = scored[pb].0[c].0[u];
                    }
                    if rng.gen::<f64>() < p.mutation && root.units()[root.rules().side_units(side)[u].index()].alive() {
                        *gene = *p.scripts.choose(&mut rng).unwrap();
                    }
                }
            }
            match fitness(&child, &mut fwd, &mut evaluations) {
                Some(f) => next.push((child, f)),
                None => break 'generations,
            }
        }
        rank(&mut next);
        scored = next;
        history.push(scored[0].1);
        stale = if evaluations == before { stale + 1 } else { 0 };
    }

    let best = scored[0].0.clone();
    let best_fitness = scored[0].1;
    let candidates = scored
        .iter()
        .map(|(g, f)| Candidate {
            action: g[0].summary(root, side),
            visits: 1,
            mean: *f,
            min: *f,
            max: *f,
        })
        .collect();
    Ok(RheaOutcome {
        best,
        best_fitness,
        history,
        record: DecisionRecord {
            tick: root.tick(),
            side,
            agent: String::new(),
            candidates,
            chosen: 0,
            forward_calls: fwd.used(),
            iterations: evaluations,
        },
    })
}

/// The previous best plan advanced by one cycle, padded with a random step.
pub fn shift_genome(best: &Genome, root: &GameState, side: Side, scripts: &[ScriptId], rng: &mut SplitMix64) -> Genome {
    let mut g: Genome = best.iter().skip(1).cloned().collect();
    g.push(Assignment::random(root, side, scripts, rng));
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::value::RolloutPolicy;
    use crate::scenario::fixtures;

    #[test]
    fn elitism_keeps_best_fitness_monotone() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 5).unwrap();
        let p = RheaParams {
            horizon: 2,
            ..RheaParams::default()
        };
        let out = rhea_search(&s, Side::Blue, &SearchBudget::iterations(10 * 20), &p, 4, None, None).unwrap();
        assert!(out.history.len() >= 2);
        for w in out.history.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn closed_population_is_constant() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 5).unwrap();
        let p = RheaParams {
            horizon: 3,
            mutation: 0.0,
            ..RheaParams::default()
        };
        let g: Genome = vec![Assignment::uniform(&s, Side::Blue, ScriptId::AdvanceToObjective); 3];
        let out = rhea_search(
            &s,
            Side::Blue,
            &SearchBudget::iterations(1000),
            &p,
            4,
            None,
            Some(vec![g; 10]),
        )
        .unwrap();
        assert!(out.history.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn budget_below_one_generation_is_rejected() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 5).unwrap();
        let r = rhea_search(
            &s,
            Side::Blue,
            &SearchBudget::calls(100),
            &RheaParams::default(),
            1,
            None,
            None,
        );
        assert!(matches!(r, Err(AgentError::BudgetTooSmall(_))));
    }

    #[test]
    fn single_step_matches_exhaustive_comparison() {
        // One blue unit, five scripts, one cycle: enough generations see
        // every genome, so the winner is the best of the five.
        let text = "scenario \"solo\" version 1\nmap 6 6\n\
                    unittype inf atk 4 def 4 range 1 sight 3 mp 1 maxstr 4\n\
                    side blue\nunit b1 type inf at 0 0 strength 4\n\
                    side red\nunit r1 type inf at 5 5 strength 4\n\
                    objective blue at 2 2 weight 1\n\
                    ticks_per_command 4\nmax_ticks 40\n";
        let s = GameState::instantiate(&crate::scenario::parse_scenario(text).unwrap(), 1).unwrap();
        let p = RheaParams {
            horizon: 1,
            spec: RolloutSpec {
                policy: RolloutPolicy::Script(ScriptId::HoldPosition),
                ..RolloutSpec::default()
            },
            ..RheaParams::default()
        };
        let out = rhea_search(&s, Side::Blue, &SearchBudget::iterations(400), &p, 9, None, None).unwrap();
        let eval_seed = derive_seed(9, 0xE7A1);
        let mut fwd = Forward::new(&SearchBudget::calls(u64::MAX));
        let best = ScriptId::ALL
            .iter()
            .map(|sc| evaluate_plan(&s, Side::Blue, &[Assignment(vec![*sc])], eval_seed, &p.spec, &mut fwd).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(out.best_fitness, best);
    }
}
