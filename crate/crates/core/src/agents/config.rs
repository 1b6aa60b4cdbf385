use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::value::{HeuristicWeights, RolloutPolicy, RolloutSpec};
use crate::scripts::{ScriptId, ScriptParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Random,
    Scripted,
    Mcts,
    Ismcts,
    Rhea,
    Cmab,
    Sss,
    TwoStage,
    Mpc,
}

impl AgentKind {
    pub const ALL: [AgentKind; 9] = [
        AgentKind::Random,
        AgentKind::Scripted,
        AgentKind::Mcts,
        AgentKind::Ismcts,
        AgentKind::Rhea,
        AgentKind::Cmab,
        AgentKind::Sss,
        AgentKind::TwoStage,
        AgentKind::Mpc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Scripted => "scripted",
            AgentKind::Mcts => "mcts",
            AgentKind::Ismcts => "ismcts",
            AgentKind::Rhea => "rhea",
            AgentKind::Cmab => "cmab",
            AgentKind::Sss => "sss",
            AgentKind::TwoStage => "twoStage",
            AgentKind::Mpc => "mpc",
        }
    }
}

impl FromStr for AgentKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConfigError::UnknownAgent(s.to_string()))
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{key}`: {message}")]
    BadValue { key: String, message: String },
}

/// Everything needed to build an agent. Parameters irrelevant to `kind` are
/// carried but unused.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    pub kind: AgentKind,
    /// UCB exploration constant.
    pub c: f64,
    pub pw_c: f64,
    pub pw_alpha: f64,
    pub rollout_depth: u32,
    pub max_plies: Option<u32>,
    /// Plan length for rhea, planning horizon for mpc.
    pub horizon: u32,
    pub population: usize,
    pub elitism: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub epsilon: f64,
    /// Scripts the planners may assign.
    pub scripts: Vec<ScriptId>,
    /// Script of the scripted agent.
    pub script: ScriptId,
    pub weights: HeuristicWeights,
    pub script_params: ScriptParams,
    pub rollout_policy: RolloutPolicy,
    /// Particles per belief when playing under fog.
    pub particles: usize,
}

impl AgentConfig {
    pub fn new(kind: AgentKind) -> Self {
        AgentConfig {
            kind,
            c: std::f64::consts::SQRT_2,
            pw_c: 2.0,
            pw_alpha: 0.5,
            rollout_depth: 1,
            max_plies: None,
            horizon: 5,
            population: 10,
            elitism: 1,
            crossover: 0.5,
            mutation: 0.3,
            epsilon: 0.4,
            scripts: ScriptId::ALL.to_vec(),
            script: ScriptId::AttackNearest,
            weights: HeuristicWeights::default(),
            script_params: ScriptParams::default(),
            rollout_policy: RolloutPolicy::RandomScripts,
            particles: 100,
        }
    }

    pub fn scripted(script: ScriptId) -> Self {
        AgentConfig {
            script,
            ..AgentConfig::new(AgentKind::Scripted)
        }
    }

    pub fn spec(&self) -> RolloutSpec {
        RolloutSpec {
            policy: self.rollout_policy,
            weights: self.weights,
            params: self.script_params,
        }
    }

    /// Bit mask over `ScriptId` indices of the allowed scripts.
    pub fn script_mask(&self) -> u32 {
        self.scripts.iter().fold(0, |m, s| m | (1 << s.index()))
    }

    /// Set a numeric parameter; integer-valued keys are rounded.
    pub fn set_value(&mut self, key: &str, x: f64) -> Result<(), ConfigError> {
        const INTEGER_KEYS: [&str; 8] = [
            "rollout",
            "plies",
            "horizon",
            "population",
            "elitism",
            "scripts",
            "scoutRadius",
            "particles",
        ];
        if INTEGER_KEYS.contains(&key) {
            self.set(key, &format!("{}", x.round().max(0.0) as u64))
        } else {
            self.set(key, &format!("{x}"))
        }
    }

    /// Set one parameter from text. Keys: `c`, `pwC`, `pwAlpha`, `rollout`,
    /// `plies`, `horizon`, `population`, `elitism`, `crossover`, `mutation`,
    /// `epsilon`, `scripts` (mask or `+`-joined names), `script`, `w1`..`w4`,
    /// `aggression`, `scoutRadius`, `rolloutPolicy`, `particles`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |message: String| ConfigError::BadValue {
            key: key.to_string(),
            message,
        };
        let f = || value.parse::<f64>().map_err(|e| bad(e.to_string()));
        let u = || value.parse::<u64>().map_err(|e| bad(e.to_string()));
        let unit_interval = |x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(x)
            } else {
                Err(bad(format!("{x} outside [0, 1]")))
            }
        };
        let positive = |x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(bad(format!("{x} must be positive")))
            }
        };
        match key {
            "c" => {
                let x = f()?;
                if !(x.is_finite() && x >= 0.0) {
                    return Err(bad(format!("{x} must be non-negative")));
                }
                self.c = x;
            }
            "pwC" => self.pw_c = positive(f()?)?,
            "pwAlpha" => self.pw_alpha = unit_interval(f()?)?,
            "rollout" => self.rollout_depth = u()? as u32,
            "plies" => self.max_plies = Some(u()? as u32),
            "horizon" => {
                let h = u()?;
                if h == 0 {
                    return Err(bad("horizon must be at least 1".into()));
                }
                self.horizon = h as u32;
            }
            "population" => {
                let n = u()? as usize;
                if n < 2 {
                    return Err(bad("population must be at least 2".into()));
                }
                self.population = n;
            }
            "elitism" => self.elitism = u()? as usize,
            "crossover" => self.crossover = unit_interval(f()?)?,
            "mutation" => self.mutation = unit_interval(f()?)?,
            "epsilon" => self.epsilon = unit_interval(f()?)?,
            "scripts" => {
                let list: Vec<ScriptId> = if let Ok(mask) = value.parse::<f64>() {
                    let mask = mask as u32;
                    ScriptId::ALL
                        .into_iter()
                        .filter(|s| mask & (1 << s.index()) != 0)
                        .collect()
                } else {
                    value
                        .split('+')
                        .map(|n| n.parse::<ScriptId>().map_err(bad))
                        .collect::<Result<_, _>>()?
                };
                if list.is_empty() {
                    return Err(bad("script set is empty".into()));
                }
                self.scripts = list;
            }
            "script" => self.script = value.parse().map_err(bad)?,
            "w1" | "w2" | "w3" | "w4" => {
                let i = key[1..].parse::<usize>().unwrap() - 1;
                let x = f()?;
                if !x.is_finite() {
                    return Err(bad("weight must be finite".into()));
                }
                self.weights.0[i] = x;
            }
            "aggression" => {
                let x = f()?;
                if !(0.0..=2.0).contains(&x) {
                    return Err(bad(format!("{x} outside [0, 2]")));
                }
                self.script_params.aggression = x;
            }
            "scoutRadius" => {
                let r = u()?;
                if r == 0 {
                    return Err(bad("scout radius must be at least 1".into()));
                }
                self.script_params.scout_radius = r as u32;
            }
            "rolloutPolicy" => {
                self.rollout_policy = if value == "random" {
                    RolloutPolicy::RandomScripts
                } else {
                    RolloutPolicy::Script(value.parse().map_err(bad)?)
                };
            }
            "particles" => {
                let n = u()?;
                if n == 0 {
                    return Err(bad("at least one particle".into()));
                }
                self.particles = n as usize;
            }
            other => return Err(ConfigError::UnknownParam(other.to_string())),
        }
        if self.elitism > self.population {
            return Err(bad("elitism exceeds population".into()));
        }
        Ok(())
    }

    /// Numeric view of a parameter, for tuning logs and archives.
    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "c" => self.c,
            "pwC" => self.pw_c,
            "pwAlpha" => self.pw_alpha,
            "rollout" => self.rollout_depth as f64,
            "horizon" => self.horizon as f64,
            "population" => self.population as f64,
            "elitism" => self.elitism as f64,
            "crossover" => self.crossover,
            "mutation" => self.mutation,
            "epsilon" => self.epsilon,
            "scripts" => self.script_mask() as f64,
            "w1" => self.weights.0[0],
            "w2" => self.weights.0[1],
            "w3" => self.weights.0[2],
            "w4" => self.weights.0[3],
            "aggression" => self.script_params.aggression,
            "scoutRadius" => self.script_params.scout_radius as f64,
            "particles" => self.particles as f64,
            _ => return None,
        })
    }
}

/// `kind` or `kind:key=value,key=value`.
impl FromStr for AgentConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut cfg = AgentConfig::new(kind.trim().parse()?);
        for kv in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::BadValue {
                key: kv.to_string(),
                message: "expected key=value".into(),
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kind_and_parameters() {
        let c: AgentConfig = "mcts:c=0.5,rollout=2,scripts=advanceToObjective+attackNearest"
            .parse()
            .unwrap();
        assert_eq!(c.kind, AgentKind::Mcts);
        assert_eq!(c.c, 0.5);
        assert_eq!(c.rollout_depth, 2);
        assert_eq!(c.scripts, vec![ScriptId::AdvanceToObjective, ScriptId::AttackNearest]);
        assert_eq!(c.get("scripts"), Some(17.0));
        let t: AgentConfig = "TwoStage".parse().unwrap();
        assert_eq!(t.kind, AgentKind::TwoStage);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            "alphazero".parse::<AgentConfig>(),
            Err(ConfigError::UnknownAgent("alphazero".into()))
        );
        assert!(matches!(
            "rhea:mutation=2".parse::<AgentConfig>(),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            "rhea:speed=2".parse::<AgentConfig>(),
            Err(ConfigError::UnknownParam(_))
        ));
        assert!(matches!(
            "rhea:scripts=0".parse::<AgentConfig>(),
            Err(ConfigError::BadValue { .. })
        ));
    }
}
