//! Playing one match between two agents.

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::agents::{build_agent, Agent, AgentConfig, AgentError, DecisionInput, DecisionRecord, SearchBudget};
use crate::belief::{init_particles, update_particles, ParticleSet};
use crate::engine::rng::derive_seed;
use crate::engine::{
    forward_calls, ChanceMode, EngineError, GameState, GlobalAction, ScoreVector, Side, TerminationReason,
};
use crate::interface::{observe, ObservationLevel};
use crate::scenario::{extract_features, FeatureVector, ScenarioDoc};
use crate::scripts::{filter_doctrine, DoctrineRule};
use crate::tooling::replay::{scenario_digest, ReplayHeader, ReplayRecord, ReplayWriter, REPLAY_VERSION};

/// Particles each side tracks under fog.
pub const DEFAULT_PARTICLES: usize = 100;

/// Decisions may overrun `max_millis` by this factor before the match is
/// forfeited; the planners check their deadline between iterations only.
pub const WALL_CLOCK_SLACK: f64 = 1.5;

#[derive(Clone, Debug)]
pub struct MatchOptions {
    pub level: ObservationLevel,
    pub budget: SearchBudget,
    /// Applied to both sides' orders.
    pub doctrine: Vec<DoctrineRule>,
    pub replay: Option<PathBuf>,
    /// Keep every decision record with the features of the deciding side.
    pub keep_decisions: bool,
    pub particles: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            level: ObservationLevel::Fog,
            budget: SearchBudget::calls(2000),
            doctrine: Vec::new(),
            replay: None,
            keep_decisions: false,
            particles: DEFAULT_PARTICLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Forfeit {
    pub side: Side,
    pub violation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GameResult {
    pub scenario: String,
    pub seed: u64,
    pub blue: String,
    pub red: String,
    pub score: ScoreVector,
    /// Scalar victory points per side.
    pub vp: [f64; 2],
    /// 1 blue win, 0.5 draw, 0 red win.
    pub outcome_blue: f64,
    pub ticks: u64,
    pub termination: Option<TerminationReason>,
    pub forfeit: Option<Forfeit>,
    /// Tick of the first unit destroyed, per side.
    pub first_loss_tick: [Option<u64>; 2],
    pub ticks_per_command: u32,
    pub final_hash: u64,
    pub replay: Option<PathBuf>,
}

impl GameResult {
    pub fn outcome(&self, side: Side) -> f64 {
        match side {
            Side::Blue => self.outcome_blue,
            Side::Red => 1.0 - self.outcome_blue,
        }
    }

    /// Blue's scalar victory-point margin.
    pub fn margin(&self) -> f64 {
        self.vp[0] - self.vp[1]
    }

    pub fn agent(&self, side: Side) -> &str {
        match side {
            Side::Blue => &self.blue,
            Side::Red => &self.red,
        }
    }
}

/// One decision with the deciding side's features at that moment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoggedDecision {
    pub features: FeatureVector,
    pub record: DecisionRecord,
}

#[derive(Clone, Debug)]
pub struct MatchOutput {
    pub result: GameResult,
    pub decisions: Vec<LoggedDecision>,
}

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
    #[error("{side} agent: {error}")]
    Agent { side: Side, error: AgentError },
    #[error("replay: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome for blue from final victory points.
pub fn scalar_outcome(vp: [f64; 2]) -> f64 {
    if vp[0] > vp[1] {
        1.0
    } else if vp[0] < vp[1] {
        0.0
    } else {
        0.5
    }
}

pub fn run_match(
    doc: &ScenarioDoc,
    blue: &AgentConfig,
    red: &AgentConfig,
    seed: u64,
    opts: &MatchOptions,
) -> Result<MatchOutput, MatchError> {
    let mut b = build_agent(blue);
    let mut r = build_agent(red);
    play_match(doc, [b.as_mut(), r.as_mut()], seed, opts)
}

/// The game loop: at each command phase blue then red observe, decide and
/// have their (doctrine-filtered) orders applied; then the clock ticks.
pub fn play_match(
    doc: &ScenarioDoc,
    agents: [&mut dyn Agent; 2],
    seed: u64,
    opts: &MatchOptions,
) -> Result<MatchOutput, MatchError> {
    let mut state = GameState::instantiate(doc, seed)?;
    state.set_chance_mode(ChanceMode::Record);
    let names = [agents[0].name().to_string(), agents[1].name().to_string()];
    let mut writer = match &opts.replay {
        Some(path) => Some(ReplayWriter::create(
            path,
            &ReplayHeader {
                version: REPLAY_VERSION,
                scenario_sha256: scenario_digest(doc),
                seed,
                blue: names[0].clone(),
                red: names[1].clone(),
            },
        )?),
        None => None,
    };
    let mut beliefs: [Option<ParticleSet>; 2] = [None, None];
    if opts.level == ObservationLevel::Fog {
        for side in Side::BOTH {
            if agents[side.index()].uses_belief() {
                let obs = observe(&state, side, opts.level);
                beliefs[side.index()] =
                    init_particles(&obs, opts.particles.max(1), derive_seed(seed, 0xBE11 + side as u64)).ok();
            }
        }
    }
    let mut decisions = Vec::new();
    let mut forfeit = None;
    let mut first_loss = [None; 2];
    'game: while state.terminal().is_none() {
        if state.is_command_phase() {
            for side in Side::BOTH {
                let i = side.index();
                let obs = observe(&state, side, opts.level);
                let dseed = derive_seed(seed, (state.tick() << 1) | i as u64);
                if let Some(b) = &beliefs[i] {
                    if state.tick() > 0 {
                        beliefs[i] = Some(update_particles(b, &obs, derive_seed(dseed, 0xB0)));
                    }
                }
                let features = extract_features(&obs);
                let input = DecisionInput {
                    state: &state,
                    side,
                    observation: obs,
                    belief: beliefs[i].as_ref(),
                    seed: dseed,
                };
                let calls_before = forward_calls();
                let started = Instant::now();
                let decision = agents[i]
                    .decide(&input, &opts.budget)
                    .map_err(|error| MatchError::Agent { side, error })?;
                let elapsed = started.elapsed().as_secs_f64() * 1000.0;
                let used = forward_calls() - calls_before;
                if used > opts.budget.max_forward_calls {
                    forfeit = Some(Forfeit {
                        side,
                        violation: format!("used {used} forward calls, budget {}", opts.budget.max_forward_calls),
                    });
                } else if let Some(ms) = opts.budget.max_millis {
                    if elapsed > ms as f64 * WALL_CLOCK_SLACK + 1.0 {
                        forfeit = Some(Forfeit {
                            side,
                            violation: format!("decision took {elapsed:.1} ms, budget {ms} ms"),
                        });
                    }
                }
                log::debug!(
                    "tick {} {}: {} used {used} forward calls in {elapsed:.1} ms",
                    state.tick(),
                    side,
                    names[i]
                );
                if let Some(f) = &forfeit {
                    log::info!("{} forfeits: {}", f.side, f.violation);
                    break 'game;
                }
                let filtered = filter_doctrine(&decision.action, &opts.doctrine, &input.observation);
                let applied: GlobalAction = filtered
                    .iter()
                    .filter(|(id, o)| state.check_order(side, *id, o).is_ok())
                    .map(|(id, o)| (id, *o))
                    .collect();
                state.apply_orders(side, &applied)?;
                if let Some(w) = writer.as_mut() {
                    w.write(&ReplayRecord::orders(state.tick(), side, &applied))?;
                }
                if opts.keep_decisions {
                    decisions.push(LoggedDecision {
                        features,
                        record: decision.record,
                    });
                }
            }
        }
        state.step()?;
        let events = state.take_chance_log();
        if let Some(w) = writer.as_mut() {
            for ev in events {
                w.write(&ReplayRecord::Chance(ev))?;
            }
        }
        for side in Side::BOTH {
            if first_loss[side.index()].is_none()
                && state
                    .rules()
                    .side_units(side)
                    .iter()
                    .any(|id| !state.units()[id.index()].alive())
            {
                first_loss[side.index()] = Some(state.tick());
            }
        }
    }
    let (score, vp) = state.score_state();
    let termination = state.terminal();
    let outcome_blue = match &forfeit {
        Some(f) if f.side == Side::Blue => 0.0,
        Some(_) => 1.0,
        None => scalar_outcome(vp),
    };
    if let Some(w) = writer.as_mut() {
        let reason = match (&forfeit, termination) {
            (Some(f), _) => format!("forfeit{}", if f.side == Side::Blue { "Blue" } else { "Red" }),
            (None, Some(t)) => t.name().to_string(),
            (None, None) => "stopped".to_string(),
        };
        w.write(&ReplayRecord::terminal(&state, &reason))?;
    }
    Ok(MatchOutput {
        result: GameResult {
            scenario: doc.name.clone(),
            seed,
            blue: names[0].clone(),
            red: names[1].clone(),
            score,
            vp,
            outcome_blue,
            ticks: state.tick(),
            termination,
            forfeit,
            first_loss_tick: first_loss,
            ticks_per_command: state.rules().ticks_per_command,
            final_hash: state.state_hash(),
            replay: opts.replay.clone(),
        },
        decisions,
    })
}
