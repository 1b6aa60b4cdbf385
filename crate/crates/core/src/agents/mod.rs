//! Statistical forward planning agents and the value estimates they share.
//!
//! Every planner searches over script assignments (one script per unit)
//! rather than raw orders, works on a forward-model root supplied through
//! [`DecisionInput`], and spends at most the forward calls its
//! [`SearchBudget`] allows.

pub mod actions;
pub mod budget;
pub mod cmab;
pub mod config;
pub mod mcts;
pub mod plan;
pub mod rhea;
pub mod sss;
pub mod value;

use std::borrow::Cow;

use serde::Serialize;
use thiserror::Error;

pub use actions::{all_assignments, apply_orders_lenient, random_legal_orders, random_script_orders, Assignment};
pub use budget::{Forward, SearchBudget};
pub use cmab::{cmab_search, naive_sampling, CmabParams, CmabResult};
pub use config::{AgentConfig, AgentKind, ConfigError};
pub use mcts::{ismcts_search, mcts_search, MctsParams, SearchOutcome};
pub use plan::{evaluate_orders, evaluate_plan};
pub use rhea::{rhea_search, Genome, RheaOutcome, RheaParams};
pub use sss::{sss_search, strata, two_stage_search, SssParams};
pub use value::{
    heuristic_value, leaf_value, rollout_value, terminal_value, HeuristicWeights, RolloutPolicy, RolloutSpec,
};

use crate::belief::{init_particles, sample_determinization, ParticleSet};
use crate::engine::{rng::derive_seed, GameState, GlobalAction, Side, SplitMix64};
use crate::interface::{inject_belief, observe, BeliefAssumption, Observation, ObservationLevel};
use crate::scripts::uniform_scripted_action;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("budget too small: {0}")]
    BudgetTooSmall(String),
    #[error("decisions are only taken in a command phase")]
    NotCommandPhase,
    #[error("the game is over")]
    Terminal,
    #[error("the particle set is empty")]
    EmptyBelief,
    #[error("invalid agent configuration: {0}")]
    Config(String),
}

/// Statistics of one root option.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub action: String,
    pub visits: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// What an agent considered when deciding.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionRecord {
    pub tick: u64,
    pub side: Side,
    pub agent: String,
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    pub forward_calls: u64,
    pub iterations: u64,
}

impl DecisionRecord {
    fn trivial(state: &GameState, side: Side, agent: &str, action: String) -> Self {
        DecisionRecord {
            tick: state.tick(),
            side,
            agent: agent.to_string(),
            candidates: vec![Candidate {
                action,
                visits: 0,
                mean: 0.0,
                min: 0.0,
                max: 0.0,
            }],
            chosen: 0,
            forward_calls: 0,
            iterations: 0,
        }
    }
}

/// Everything an agent may use for one decision. `state` is the true game
/// state; agents read only `side`'s own units and contact table from it
/// unless `observation` is at full level.
pub struct DecisionInput<'a> {
    pub state: &'a GameState,
    pub side: Side,
    pub observation: Observation,
    pub belief: Option<&'a ParticleSet>,
    pub seed: u64,
}

impl<'a> DecisionInput<'a> {
    pub fn new(state: &'a GameState, side: Side, level: ObservationLevel, seed: u64) -> Self {
        DecisionInput {
            state,
            side,
            observation: observe(state, side, level),
            belief: None,
            seed,
        }
    }

    pub fn with_belief(mut self, belief: &'a ParticleSet) -> Self {
        self.belief = Some(belief);
        self
    }

    fn fog(&self) -> bool {
        self.observation.level == ObservationLevel::Fog
    }

    /// The state planners search from, and the calls spent building it.
    /// Under fog this is a determinization: drawn from the belief when
    /// there is one, otherwise with never-seen enemies left out.
    fn planning_root(&self, budget: &SearchBudget) -> Result<(Cow<'a, GameState>, SearchBudget, u64), AgentError> {
        if !self.fog() {
            return Ok((Cow::Borrowed(self.state), *budget, 0));
        }
        if budget.max_forward_calls < 2 {
            return Err(AgentError::BudgetTooSmall("no calls left after determinization".into()));
        }
        let seed = derive_seed(self.seed, 0xD7);
        let root = match self.belief {
            Some(b) => sample_determinization(b, self.state, seed).map_err(|_| AgentError::EmptyBelief)?,
            None => inject_belief(self.state, self.side, &BeliefAssumption::default()).expect("empty assumption"),
        };
        let mut rest = *budget;
        if rest.max_forward_calls != u64::MAX {
            rest.max_forward_calls -= 1;
        }
        Ok((Cow::Owned(root), rest, 1))
    }
}

pub struct Decision {
    pub action: GlobalAction,
    pub record: DecisionRecord,
}

pub trait Agent: Send {
    fn name(&self) -> &str;
    fn config(&self) -> &AgentConfig;
    fn decide(&mut self, input: &DecisionInput, budget: &SearchBudget) -> Result<Decision, AgentError>;

    /// Whether the agent plans from a particle belief under fog.
    fn uses_belief(&self) -> bool {
        false
    }
}

/// An agent of any kind, driven by its configuration.
pub struct ConfiguredAgent {
    cfg: AgentConfig,
    name: String,
    /// Previous best plan of the evolutionary planners.
    shift: Option<(Side, Genome)>,
}

impl ConfiguredAgent {
    pub fn new(cfg: AgentConfig) -> Self {
        let name = match cfg.kind {
            config::AgentKind::Scripted => format!("scripted:{}", cfg.script.name()),
            k => k.name().to_string(),
        };
        ConfiguredAgent { cfg, name, shift: None }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn mcts_params(&self) -> MctsParams {
        MctsParams {
            c: self.cfg.c,
            pw_c: self.cfg.pw_c,
            pw_alpha: self.cfg.pw_alpha,
            rollout_depth: self.cfg.rollout_depth,
            max_plies: self.cfg.max_plies,
            scripts: self.cfg.scripts.clone(),
            spec: self.cfg.spec(),
        }
    }

    fn rhea_params(&self) -> RheaParams {
        RheaParams {
            horizon: self.cfg.horizon,
            population: self.cfg.population,
            elitism: self.cfg.elitism,
            crossover: self.cfg.crossover,
            mutation: self.cfg.mutation,
            scripts: self.cfg.scripts.clone(),
            spec: self.cfg.spec(),
        }
    }

    fn sss_params(&self) -> SssParams {
        SssParams {
            rollout_depth: self.cfg.rollout_depth,
            scripts: self.cfg.scripts.clone(),
            spec: self.cfg.spec(),
        }
    }
}

impl Agent for ConfiguredAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    fn uses_belief(&self) -> bool {
        !matches!(self.cfg.kind, AgentKind::Random | AgentKind::Scripted)
    }

    fn decide(&mut self, input: &DecisionInput, budget: &SearchBudget) -> Result<Decision, AgentError> {
        let state = input.state;
        let side = input.side;
        if state.terminal().is_some() {
            return Err(AgentError::Terminal);
        }
        if !state.is_command_phase() {
            return Err(AgentError::NotCommandPhase);
        }
        if budget.max_forward_calls == 0 {
            return Err(AgentError::BudgetTooSmall("zero forward calls".into()));
        }
        let params = self.cfg.script_params;
        let (action, mut record) = match self.cfg.kind {
            AgentKind::Random => {
                let mut rng = SplitMix64::new(input.seed);
                let a = random_legal_orders(state, &input.observation, &mut rng);
                (a, DecisionRecord::trivial(state, side, &self.name, "random".into()))
            }
            AgentKind::Scripted => {
                let a = uniform_scripted_action(&input.observation, &params, self.cfg.script);
                (
                    a,
                    DecisionRecord::trivial(state, side, &self.name, self.cfg.script.name().into()),
                )
            }
            AgentKind::Mcts => {
                let (root, b, pre) = input.planning_root(budget)?;
                let mut out = mcts_search(&root, side, &b, &self.mcts_params(), input.seed)?;
                out.record.forward_calls += pre;
                (out.chosen.orders_in(state, side, &params), out.record)
            }
            AgentKind::Ismcts => {
                let owned;
                let belief = match input.belief {
                    Some(b) => b,
                    None => {
                        owned = init_particles(&input.observation, self.cfg.particles, derive_seed(input.seed, 0xB1))
                            .map_err(|_| AgentError::EmptyBelief)?;
                        &owned
                    }
                };
                let out = ismcts_search(state, belief, budget, &self.mcts_params(), input.seed)?;
                (out.chosen.orders_in(state, side, &params), out.record)
            }
            AgentKind::Rhea | AgentKind::Mpc => {
                let (root, b, pre) = input.planning_root(budget)?;
                let p = self.rhea_params();
                let mut rng = SplitMix64::new(derive_seed(input.seed, 0x5F));
                let seed_genome = match &self.shift {
                    Some((s, g)) if *s == side => Some(rhea::shift_genome(g, &root, side, &p.scripts, &mut rng)),
                    _ => None,
                };
                let mut out = rhea_search(&root, side, &b, &p, input.seed, seed_genome.as_ref(), None)?;
                out.record.forward_calls += pre;
                let first = out.best[0].orders_in(state, side, &params);
                self.shift = Some((side, out.best));
                (first, out.record)
            }
            AgentKind::Cmab => {
                let (root, b, pre) = input.planning_root(budget)?;
                let p = CmabParams {
                    epsilon: self.cfg.epsilon,
                    rollout_depth: self.cfg.rollout_depth,
                    scripts: self.cfg.scripts.clone(),
                    spec: self.cfg.spec(),
                };
                let mut out = cmab_search(&root, side, &b, &p, input.seed)?;
                out.record.forward_calls += pre;
                (out.chosen.orders_in(state, side, &params), out.record)
            }
            AgentKind::Sss => {
                let (root, b, pre) = input.planning_root(budget)?;
                let mut out = sss_search(&root, side, &b, &self.sss_params(), input.seed)?;
                out.record.forward_calls += pre;
                (out.chosen.orders_in(state, side, &params), out.record)
            }
            AgentKind::TwoStage => {
                let (root, b, pre) = input.planning_root(budget)?;
                let mut out = two_stage_search(&root, side, &b, &self.sss_params(), input.seed)?;
                out.record.forward_calls += pre;
                (out.action, out.record)
            }
        };
        record.agent = self.name.clone();
        Ok(Decision { action, record })
    }
}

pub fn build_agent(cfg: &AgentConfig) -> Box<dyn Agent> {
    Box::new(ConfiguredAgent::new(cfg.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::forward_calls;
    use crate::scenario::fixtures;

    fn decide_counted(kind: AgentKind, level: ObservationLevel, calls: u64, seed: u64) -> (Decision, u64) {
        let s = GameState::instantiate(&fixtures::river_crossing(), seed).unwrap();
        let mut agent = ConfiguredAgent::new(AgentConfig::new(kind));
        let input = DecisionInput::new(&s, Side::Blue, level, seed);
        let before = forward_calls();
        let d = agent.decide(&input, &SearchBudget::calls(calls)).unwrap();
        (d, forward_calls() - before)
    }

    #[test]
    fn every_kind_stays_within_budget() {
        for kind in AgentKind::ALL {
            for level in [ObservationLevel::Full, ObservationLevel::Fog] {
                let (d, used) = decide_counted(kind, level, 600, 5);
                assert!(used <= 600, "{kind:?} {level:?} used {used}");
                assert!(d.record.forward_calls <= 600);
                assert_eq!(d.record.forward_calls, used, "{kind:?} {level:?}");
            }
        }
    }

    #[test]
    fn decisions_are_legal_and_repeatable() {
        for kind in AgentKind::ALL {
            let s = GameState::instantiate(&fixtures::river_crossing(), 2).unwrap();
            let input = DecisionInput::new(&s, Side::Red, ObservationLevel::Fog, 9);
            let a = ConfiguredAgent::new(AgentConfig::new(kind))
                .decide(&input, &SearchBudget::calls(600))
                .unwrap();
            let b = ConfiguredAgent::new(AgentConfig::new(kind))
                .decide(&input, &SearchBudget::calls(600))
                .unwrap();
            assert_eq!(a.action, b.action, "{kind:?}");
            assert_eq!(a.record, b.record, "{kind:?}");
            let mut copy = s.fork();
            copy.apply_orders(Side::Red, &a.action).unwrap();
            assert_eq!(
                s.state_hash(),
                GameState::instantiate(&fixtures::river_crossing(), 2)
                    .unwrap()
                    .state_hash()
            );
        }
    }

    #[test]
    fn refuses_outside_command_phase() {
        let mut s = GameState::instantiate(&fixtures::river_crossing(), 1).unwrap();
        s.step().unwrap();
        let input = DecisionInput::new(&s, Side::Blue, ObservationLevel::Full, 1);
        let r = ConfiguredAgent::new(AgentConfig::new(AgentKind::Mcts)).decide(&input, &SearchBudget::calls(100));
        assert_eq!(r.err(), Some(AgentError::NotCommandPhase));
    }
}
