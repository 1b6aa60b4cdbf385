//! MAP-Elites over agent parameters, binned by casualties suffered and
//! movement expended.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::game::{run_match, MatchError, MatchOptions};
use crate::agents::{AgentConfig, ConfigError};
use crate::engine::rng::derive_seed;
use crate::engine::{Rules, Side, SplitMix64};
use crate::scenario::ScenarioDoc;

pub const BINS: usize = 5;

/// One tunable parameter and its range.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamRange {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
}

impl ParamRange {
    pub fn new(key: &str, lo: f64, hi: f64) -> Self {
        ParamRange {
            key: key.to_string(),
            lo,
            hi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BehaviorDescriptor {
    pub casualties_suffered_fraction: f64,
    pub movement_expended_normalized: f64,
}

impl BehaviorDescriptor {
    pub fn cell(&self) -> usize {
        let bin = |x: f64| ((x * BINS as f64).floor().max(0.0) as usize).min(BINS - 1);
        bin(self.casualties_suffered_fraction) * BINS + bin(self.movement_expended_normalized)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Elite {
    pub params: Vec<f64>,
    pub fitness: f64,
    pub descriptor: BehaviorDescriptor,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapElitesArchive {
    /// Row-major `BINS x BINS`; rows are casualty bins.
    pub cells: Vec<Option<Elite>>,
}

impl MapElitesArchive {
    pub fn new() -> Self {
        MapElitesArchive {
            cells: vec![None; BINS * BINS],
        }
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Keep `e` if its cell is empty or holds a less fit elite.
    pub fn insert(&mut self, e: Elite) -> bool {
        let slot = &mut self.cells[e.descriptor.cell()];
        match slot {
            Some(cur) if cur.fitness >= e.fitness => false,
            _ => {
                *slot = Some(e);
                true
            }
        }
    }
}

impl Default for MapElitesArchive {
    fn default() -> Self {
        Self::new()
    }
}

/// Every candidate evaluated, in order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Insertion {
    pub iteration: usize,
    pub cell: usize,
    pub fitness: f64,
    pub accepted: bool,
    /// Fitness held by the cell after this candidate.
    pub cell_fitness: f64,
}

#[derive(Clone, Debug)]
pub struct MapElitesConfig {
    /// Agent whose parameters are varied.
    pub base: AgentConfig,
    pub space: Vec<ParamRange>,
    pub opponent: AgentConfig,
    /// Seeds of the fitness games; the agent alternates sides across them.
    pub seeds: Vec<u64>,
    pub options: MatchOptions,
}

impl MapElitesConfig {
    pub fn new(base: AgentConfig, space: Vec<ParamRange>, opponent: AgentConfig) -> Self {
        MapElitesConfig {
            base,
            space,
            opponent,
            seeds: (0..5).collect(),
            options: MatchOptions::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MapElitesError {
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("empty parameter space")]
    EmptySpace,
}

/// Movement points a side could have spent over `ticks`.
fn movement_capacity(rules: &Rules, side: Side, ticks: u64) -> f64 {
    let per_tick: u32 = rules
        .side_units(side)
        .iter()
        .map(|id| rules.unit_type_of(*id).mp_per_tick)
        .sum();
    per_tick as f64 * ticks as f64
}

/// Mean outcome and mean descriptor of `params` over the fitness games.
pub fn evaluate_params(
    doc: &ScenarioDoc,
    cfg: &MapElitesConfig,
    params: &[f64],
) -> Result<(f64, BehaviorDescriptor), MapElitesError> {
    let mut agent = cfg.base.clone();
    for (d, x) in cfg.space.iter().zip(params) {
        agent.set_value(&d.key, *x)?;
    }
    let rules = Rules::from_doc(doc).map_err(MatchError::from)?;
    let (mut fit, mut cas, mut mov) = (0.0, 0.0, 0.0);
    for (k, &s) in cfg.seeds.iter().enumerate() {
        let side = if k % 2 == 0 { Side::Blue } else { Side::Red };
        let out = match side {
            Side::Blue => run_match(doc, &agent, &cfg.opponent, s, &cfg.options)?,
            Side::Red => run_match(doc, &cfg.opponent, &agent, s, &cfg.options)?,
        };
        let r = out.result;
        let i = side.index();
        fit += r.outcome(side);
        let initial: u32 = rules
            .side_units(side)
            .iter()
            .map(|id| rules.roster[id.index()].strength as u32)
            .sum();
        cas += (r.score.strength_suffered[i] as f64 / initial.max(1) as f64).min(1.0);
        let cap = movement_capacity(&rules, side, r.ticks);
        mov += if cap > 0.0 {
            (r.score.mp_expended[i] as f64 / cap).min(1.0)
        } else {
            0.0
        };
    }
    let n = cfg.seeds.len().max(1) as f64;
    Ok((
        fit / n,
        BehaviorDescriptor {
            casualties_suffered_fraction: cas / n,
            movement_expended_normalized: mov / n,
        },
    ))
}

/// Run `iterations` candidate evaluations. Deterministic under `seed`.
pub fn map_elites_run(
    doc: &ScenarioDoc,
    cfg: &MapElitesConfig,
    iterations: usize,
    seed: u64,
) -> Result<(MapElitesArchive, Vec<Insertion>), MapElitesError> {
    map_elites_with(cfg, iterations, seed, |p| evaluate_params(doc, cfg, p))
}

/// The archive loop with a caller-supplied evaluator.
pub fn map_elites_with(
    cfg: &MapElitesConfig,
    iterations: usize,
    seed: u64,
    mut evaluate: impl FnMut(&[f64]) -> Result<(f64, BehaviorDescriptor), MapElitesError>,
) -> Result<(MapElitesArchive, Vec<Insertion>), MapElitesError> {
    if cfg.space.is_empty() {
        return Err(MapElitesError::EmptySpace);
    }
    let mut rng = SplitMix64::new(derive_seed(seed, 0xE1));
    let mut archive = MapElitesArchive::new();
    let mut log = Vec::with_capacity(iterations);
    for iteration in 0..iterations {
        let occupied: Vec<&Elite> = archive.cells.iter().flatten().collect();
        let params: Vec<f64> = if occupied.is_empty() {
            cfg.space.iter().map(|d| rng.gen_range(d.lo..=d.hi)).collect()
        } else {
            let parent = occupied[rng.gen_range(0..occupied.len())];
            cfg.space
                .iter()
                .zip(&parent.params)
                .map(|(d, x)| {
                    let sigma = 0.1 * (d.hi - d.lo);
                    let step = if sigma > 0.0 {
                        Normal::new(0.0, sigma).unwrap().sample(&mut rng)
                    } else {
                        0.0
                    };
                    (x + step).clamp(d.lo, d.hi)
                })
                .collect()
        };
        let (fitness, descriptor) = evaluate(&params)?;
        let cell = descriptor.cell();
        let accepted = archive.insert(Elite {
            params,
            fitness,
            descriptor,
        });
        log.push(Insertion {
            iteration,
            cell,
            fitness,
            accepted,
            cell_fitness: archive.cells[cell].as_ref().unwrap().fitness,
        });
    }
    Ok((archive, log))
}
