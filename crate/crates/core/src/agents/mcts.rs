//! Open-loop UCT over script-abstracted command-phase decisions, and its
//! information-set variant that redraws a determinization every iteration.
//!
//! Each command phase contributes two plies: the deciding side picks an
//! assignment, then the opponent picks one knowing it, then both order sets
//! run for a cycle. Values are kept from the deciding side's perspective;
//! the opponent selects to minimize them.

use rand::seq::SliceRandom;
use rand::Rng;

use super::actions::{all_assignments, apply_orders_lenient, assignment_space, Assignment};
use super::budget::{Forward, SearchBudget};
use super::value::{finish_rollout, RolloutSpec};
use super::{AgentError, Candidate, DecisionRecord};
use crate::belief::{sample_determinization, ParticleSet};
use crate::engine::rng::derive_seed;
use crate::engine::{GameState, GlobalAction, Side, SplitMix64};
use crate::scripts::ScriptId;

#[derive(Clone, Debug, PartialEq)]
pub struct MctsParams {
    /// UCB1 exploration constant.
    pub c: f64,
    /// Progressive widening: at most `ceil(pw_c * N^pw_alpha)` children.
    pub pw_c: f64,
    pub pw_alpha: f64,
    /// Command cycles simulated after leaving the tree.
    pub rollout_depth: u32,
    /// Plies after which the tree stops growing and leaves are evaluated.
    pub max_plies: Option<u32>,
    pub scripts: Vec<ScriptId>,
    pub spec: RolloutSpec,
}

impl Default for MctsParams {
    fn default() -> Self {
        MctsParams {
            c: std::f64::consts::SQRT_2,
            pw_c: 2.0,
            pw_alpha: 0.5,
            rollout_depth: 1,
            max_plies: None,
            scripts: ScriptId::ALL.to_vec(),
            spec: RolloutSpec::default(),
        }
    }
}

const SAMPLE_TRIES: usize = 32;
/// Assignment spaces up to this size are enumerated during expansion.
const ENUMERATE_LIMIT: u128 = 1024;

struct Edge {
    assign: Assignment,
    /// Orders the assignment produced when the edge was created; sibling
    /// assignments that produce the same orders are not added again.
    orders: GlobalAction,
    child: usize,
    visits: u64,
    sum: f64,
    lo: f64,
    hi: f64,
}

struct Node {
    mover: Side,
    depth: u32,
    edges: Vec<Edge>,
    visits: u64,
    exhausted: bool,
    /// Exact minimax value, known once the subtree below is fully resolved.
    solved: Option<f64>,
}

struct Tree {
    side: Side,
    /// Whether leaf values are exact, so resolved subtrees can be backed up
    /// by minimax instead of averaging.
    exact: bool,
    nodes: Vec<Node>,
    lo: f64,
    hi: f64,
}

impl Tree {
    fn new(side: Side, exact: bool) -> Self {
        Tree {
            side,
            exact,
            nodes: vec![Node {
                mover: side,
                depth: 0,
                edges: Vec::new(),
                visits: 0,
                exhausted: false,
                solved: None,
            }],
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
        }
    }

    /// Add an untried assignment under `node`, or mark it exhausted.
    fn expand(&mut self, node: usize, state: &GameState, p: &MctsParams, rng: &mut SplitMix64) -> Option<usize> {
        let mover = self.nodes[node].mover;
        let fresh = |t: &Tree, a: Assignment| {
            let o = a.orders_in(state, mover, &p.spec.params);
            (!t.nodes[node].edges.iter().any(|e| e.assign == a || e.orders == o)).then_some((a, o))
        };
        let mut pick = None;
        for s in [ScriptId::AttackNearest, ScriptId::AdvanceToObjective] {
            if p.scripts.contains(&s) {
                pick = fresh(self, Assignment::uniform(state, mover, s));
                if pick.is_some() {
                    break;
                }
            }
        }
        if pick.is_none() {
            let space = assignment_space(state, mover, p.scripts.len());
            if space <= ENUMERATE_LIMIT {
                let mut all = all_assignments(state, mover, &p.scripts);
                all.shuffle(rng);
                pick = all.into_iter().find_map(|a| fresh(self, a));
            } else {
                for _ in 0..SAMPLE_TRIES {
                    pick = fresh(self, Assignment::random(state, mover, &p.scripts, rng));
                    if pick.is_some() {
                        break;
                    }
                }
            }
        }
        let Some((assign, orders)) = pick else {
            self.nodes[node].exhausted = true;
            return None;
        };
        let child = self.nodes.len();
        let depth = self.nodes[node].depth + 1;
        self.nodes.push(Node {
            mover: mover.opponent(),
            depth,
            edges: Vec::new(),
            visits: 0,
            exhausted: false,
            solved: None,
        });
        self.nodes[node].edges.push(Edge {
            assign,
            orders,
            child,
            visits: 0,
            sum: 0.0,
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
        });
        Some(self.nodes[node].edges.len() - 1)
    }

    /// Mark `node` solved when every child is expanded and solved.
    fn resolve(&mut self, node: usize) {
        let n = &self.nodes[node];
        if n.solved.is_some() || !n.exhausted {
            return;
        }
        let vals: Option<Vec<f64>> = n.edges.iter().map(|e| self.nodes[e.child].solved).collect();
        let Some(vals) = vals else { return };
        if vals.is_empty() {
            return;
        }
        let v = if n.mover == self.side {
            vals.into_iter().fold(f64::NEG_INFINITY, f64::max)
        } else {
            vals.into_iter().fold(f64::INFINITY, f64::min)
        };
        self.nodes[node].solved = Some(v);
    }

    fn select(&self, node: usize, c: f64) -> usize {
        let n = &self.nodes[node];
        let ln = (n.visits.max(1) as f64).ln();
        let span = self.hi - self.lo;
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, e) in n.edges.iter().enumerate() {
            if self.exact && self.nodes[e.child].solved.is_some() {
                continue;
            }
            if e.visits == 0 {
                return i;
            }
            let q = e.sum / e.visits as f64;
            let mut qn = if span > 0.0 { (q - self.lo) / span } else { 0.5 };
            if n.mover != self.side {
                qn = 1.0 - qn;
            }
            let score = qn + c * (ln / e.visits as f64).sqrt();
            if score > best.0 {
                best = (score, i);
            }
        }
        best.1
    }

    fn iterate(&mut self, mut state: GameState, p: &MctsParams, rng: &mut SplitMix64, fwd: &mut Forward) {
        let mut node = 0;
        let mut path: Vec<(usize, usize)> = Vec::new();
        let mut out_of_budget = false;
        loop {
            if state.terminal().is_some() {
                break;
            }
            let n = &self.nodes[node];
            if p.max_plies.is_some_and(|m| n.depth >= m) {
                break;
            }
            let cap = (p.pw_c * (n.visits as f64).powf(p.pw_alpha)).ceil().max(1.0) as usize;
            let mut expanded = false;
            let all_solved = self.exact && n.edges.iter().all(|e| self.nodes[e.child].solved.is_some());
            let e = if !n.exhausted && (n.edges.len() < cap || all_solved) {
                match self.expand(node, &state, p, rng) {
                    Some(e) => {
                        expanded = true;
                        e
                    }
                    None => self.select(node, p.c),
                }
            } else {
                self.select(node, p.c)
            };
            if self.nodes[node].edges.is_empty() {
                break;
            }
            path.push((node, e));
            let mover = self.nodes[node].mover;
            let orders = self.nodes[node].edges[e]
                .assign
                .orders_in(&state, mover, &p.spec.params);
            apply_orders_lenient(&mut state, mover, &orders);
            if mover != self.side && !fwd.advance_cycle(&mut state) {
                out_of_budget = true;
            }
            node = self.nodes[node].edges[e].child;
            if expanded || out_of_budget {
                break;
            }
        }
        let exact_leaf = self.exact
            && !out_of_budget
            && (state.terminal().is_some()
                || (p.rollout_depth == 0 && p.max_plies.is_some_and(|m| self.nodes[node].depth >= m)));
        let value = if out_of_budget {
            super::value::leaf_value(&state, self.side, &p.spec.weights)
        } else {
            let opp_only = self.nodes[node].mover != self.side && state.terminal().is_none();
            let pending = if opp_only {
                let mut v = [false; 2];
                v[self.side.opponent().index()] = true;
                v
            } else {
                [true, true]
            };
            finish_rollout(state, self.side, pending, p.rollout_depth, &p.spec, rng, fwd)
        };
        if exact_leaf {
            self.nodes[node].solved = Some(value);
        }
        self.lo = self.lo.min(value);
        self.hi = self.hi.max(value);
        self.nodes[0].visits += 1;
        if self.exact {
            for &(nd, _) in path.iter().rev() {
                self.resolve(nd);
            }
        }
        for (nd, e) in path {
            let edge = &mut self.nodes[nd].edges[e];
            edge.visits += 1;
            edge.sum += value;
            edge.lo = edge.lo.min(value);
            edge.hi = edge.hi.max(value);
            if nd != 0 {
                self.nodes[nd].visits += 1;
            }
        }
    }
}

/// Result of a search: the chosen root assignment and statistics.
pub struct SearchOutcome {
    pub chosen: Assignment,
    pub record: DecisionRecord,
}

/// Shared driver for both variants. `root` produces the state each
/// iteration starts from, already charged to `fwd`.
fn search(
    template: &GameState,
    side: Side,
    budget: &SearchBudget,
    p: &MctsParams,
    seed: u64,
    exact: bool,
    mut root: impl FnMut(&mut Forward, u64) -> Option<GameState>,
) -> Result<SearchOutcome, AgentError> {
    if p.scripts.is_empty() {
        return Err(AgentError::Config("empty script set".into()));
    }
    let mut fwd = Forward::new(budget);
    let mut tree = Tree::new(side, exact);
    let mut rng = SplitMix64::new(seed);
    let mut iterations = 0u64;
    while budget.max_iterations.is_none_or(|m| iterations < m) && tree.nodes[0].solved.is_none() {
        let Some(mut s) = root(&mut fwd, iterations) else {
            break;
        };
        s.reseed(derive_seed(seed, 0x1000_0000 + iterations));
        tree.iterate(s, p, &mut rng, &mut fwd);
        iterations += 1;
    }
    if iterations == 0 || tree.nodes[0].edges.is_empty() {
        return Err(AgentError::BudgetTooSmall("no search iteration fits the budget".into()));
    }
    let edges = &tree.nodes[0].edges;
    let solved = |e: &Edge| tree.nodes[e.child].solved.filter(|_| tree.nodes[0].solved.is_some());
    let chosen = (0..edges.len())
        .max_by(|&a, &b| {
            let (ea, eb) = (&edges[a], &edges[b]);
            let (sa, sb) = (solved(ea).unwrap_or(0.0), solved(eb).unwrap_or(0.0));
            sa.total_cmp(&sb).then(
                ea.visits
                    .cmp(&eb.visits)
                    .then((ea.sum / ea.visits.max(1) as f64).total_cmp(&(eb.sum / eb.visits.max(1) as f64)))
                    .then(b.cmp(&a)),
            )
        })
        .unwrap();
    let candidates = edges
        .iter()
        .map(|e| Candidate {
            action: e.assign.summary(template, side),
            visits: e.visits,
            mean: if e.visits > 0 { e.sum / e.visits as f64 } else { 0.0 },
            min: e.lo,
            max: e.hi,
        })
        .collect();
    Ok(SearchOutcome {
        chosen: edges[chosen].assign.clone(),
        record: DecisionRecord {
            tick: template.tick(),
            side,
            agent: String::new(),
            candidates,
            chosen,
            forward_calls: fwd.used(),
            iterations,
        },
    })
}

fn check_root(state: &GameState) -> Result<(), AgentError> {
    if state.terminal().is_some() {
        return Err(AgentError::Terminal);
    }
    if !state.is_command_phase() {
        return Err(AgentError::NotCommandPhase);
    }
    Ok(())
}

/// UCT from a fully specified root.
pub fn mcts_search(
    root: &GameState,
    side: Side,
    budget: &SearchBudget,
    p: &MctsParams,
    seed: u64,
) -> Result<SearchOutcome, AgentError> {
    check_root(root)?;
    let exact = root.rules().deterministic_combat;
    search(root, side, budget, p, seed, exact, |fwd, _| fwd.copy(root))
}

/// Information-set UCT: every iteration plays in a fresh determinization
/// drawn from `belief`; all iterations share one tree addressed by the
/// action sequence from the root.
pub fn ismcts_search(
    state: &GameState,
    belief: &ParticleSet,
    budget: &SearchBudget,
    p: &MctsParams,
    seed: u64,
) -> Result<SearchOutcome, AgentError> {
    check_root(state)?;
    if belief.is_empty() {
        return Err(AgentError::EmptyBelief);
    }
    let mut draws = SplitMix64::new(derive_seed(seed, 0x15));
    search(state, belief.side, budget, p, seed, false, |fwd, _| {
        let s = draws.gen();
        if !fwd.charge_external() {
            return None;
        }
        Some(sample_determinization(belief, state, s).expect("particles are consistent with the state"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::fixtures;

    #[test]
    fn one_iteration_budget() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 2).unwrap();
        let out = mcts_search(&s, Side::Blue, &SearchBudget::iterations(1), &MctsParams::default(), 3).unwrap();
        assert_eq!(out.record.iterations, 1);
        let visits: u64 = out.record.candidates.iter().map(|c| c.visits).sum();
        assert_eq!(visits, 1);
    }

    #[test]
    fn zero_budget_is_an_error() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 2).unwrap();
        let r = mcts_search(&s, Side::Blue, &SearchBudget::calls(0), &MctsParams::default(), 3);
        assert!(matches!(r, Err(AgentError::BudgetTooSmall(_))));
    }

    #[test]
    fn root_visits_sum_to_iterations() {
        let s = GameState::instantiate(&fixtures::tiny_duel(), 2).unwrap();
        let out = mcts_search(&s, Side::Red, &SearchBudget::calls(3000), &MctsParams::default(), 3).unwrap();
        let visits: u64 = out.record.candidates.iter().map(|c| c.visits).sum();
        assert_eq!(visits, out.record.iterations);
        assert!(out.record.forward_calls <= 3000);
        for c in &out.record.candidates {
            assert!(c.min <= c.mean + 1e-12 && c.mean <= c.max + 1e-12);
        }
    }

    #[test]
    fn search_is_deterministic_and_pure() {
        let s = GameState::instantiate(&fixtures::river_crossing(), 2).unwrap();
        let h = s.state_hash();
        let a = mcts_search(&s, Side::Blue, &SearchBudget::calls(500), &MctsParams::default(), 8).unwrap();
        let b = mcts_search(&s, Side::Blue, &SearchBudget::calls(500), &MctsParams::default(), 8).unwrap();
        assert_eq!(a.chosen, b.chosen);
        assert_eq!(a.record, b.record);
        assert_eq!(s.state_hash(), h);
    }
}
