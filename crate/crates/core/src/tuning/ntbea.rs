use std::collections::HashMap;
use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agents::{AgentConfig, ConfigError};
use crate::engine::rng::derive_seed;
use crate::engine::{Side, SplitMix64};
use crate::evaluation::{run_match, MatchError, MatchOptions};
use crate::scenario::ScenarioDoc;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dimension {
    pub name: String,
    pub values: Vec<f64>,
}

impl Dimension {
    pub fn new(name: &str, values: &[f64]) -> Self {
        Dimension {
            name: name.to_string(),
            values: values.to_vec(),
        }
    }
}

/// Ordered discrete dimensions. A configuration is one value index per
/// dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSpace {
    pub dims: Vec<Dimension>,
}

impl ParamSpace {
    pub fn new(dims: Vec<Dimension>) -> Self {
        ParamSpace { dims }
    }

    /// Product of the dimension sizes (saturating).
    pub fn size(&self) -> u128 {
        self.dims
            .iter()
            .fold(1u128, |a, d| a.saturating_mul(d.values.len() as u128))
    }

    pub fn values(&self, config: &[usize]) -> Vec<f64> {
        self.dims.iter().zip(config).map(|(d, i)| d.values[*i]).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TupleStats {
    pub count: u64,
    pub mean: f64,
}

impl TupleStats {
    fn add(&mut self, x: f64) {
        self.count += 1;
        self.mean += (x - self.mean) / self.count as f64;
    }
}

/// Statistics keyed by tuple pattern (dimension indices) and by the values
/// a configuration takes on those dimensions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NTupleModel {
    pub patterns: Vec<Vec<usize>>,
    pub tables: Vec<HashMap<Vec<usize>, TupleStats>>,
    pub evaluations: u64,
}

impl NTupleModel {
    /// All 1-tuples, then (unless `one_tuples_only`) all 2-tuples and the
    /// full N-tuple when it is not already one of those.
    pub fn new(dims: usize, one_tuples_only: bool) -> Self {
        let mut patterns: Vec<Vec<usize>> = (0..dims).map(|i| vec![i]).collect();
        if !one_tuples_only {
            for i in 0..dims {
                for j in i + 1..dims {
                    patterns.push(vec![i, j]);
                }
            }
            if dims > 2 {
                patterns.push((0..dims).collect());
            }
        }
        let tables = vec![HashMap::new(); patterns.len()];
        NTupleModel {
            patterns,
            tables,
            evaluations: 0,
        }
    }

    fn key(pattern: &[usize], config: &[usize]) -> Vec<usize> {
        pattern.iter().map(|&d| config[d]).collect()
    }

    pub fn update(&mut self, config: &[usize], fitness: f64) {
        self.evaluations += 1;
        for (p, t) in self.patterns.iter().zip(&mut self.tables) {
            t.entry(Self::key(p, config)).or_default().add(fitness);
        }
    }

    pub fn stats(&self, pattern: usize, config: &[usize]) -> TupleStats {
        self.tables[pattern]
            .get(&Self::key(&self.patterns[pattern], config))
            .copied()
            .unwrap_or_default()
    }

    /// Mean of the tuple means, over tuples seen at least once.
    pub fn estimate(&self, config: &[usize]) -> f64 {
        let seen: Vec<f64> = (0..self.patterns.len())
            .map(|p| self.stats(p, config))
            .filter(|s| s.count > 0)
            .map(|s| s.mean)
            .collect();
        if seen.is_empty() {
            0.0
        } else {
            seen.iter().sum::<f64>() / seen.len() as f64
        }
    }

    /// Estimated mean plus `k` times the averaged exploration bonus.
    pub fn ucb(&self, config: &[usize], k: f64) -> f64 {
        let ln = ((self.evaluations + 1) as f64).ln();
        let bonus = (0..self.patterns.len())
            .map(|p| (ln / (self.stats(p, config).count + 1) as f64).sqrt())
            .sum::<f64>()
            / self.patterns.len() as f64;
        self.estimate(config) + k * bonus
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NtbeaParams {
    pub neighbours: usize,
    pub k: f64,
    /// Drop the 2- and N-tuple tables (an ablation of the model).
    pub one_tuples_only: bool,
}

impl Default for NtbeaParams {
    fn default() -> Self {
        NtbeaParams {
            neighbours: 50,
            k: 2.0,
            one_tuples_only: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalLogEntry {
    pub index: u64,
    pub config: Vec<usize>,
    pub fitness: f64,
}

#[derive(Clone, Debug)]
pub struct NtbeaResult {
    pub best: Vec<usize>,
    pub best_values: Vec<f64>,
    pub model: NTupleModel,
    pub log: Vec<EvalLogEntry>,
}

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("parameter space is empty or has an empty dimension")]
    EmptySpace,
    #[error("budget must allow at least one evaluation")]
    ZeroBudget,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// Optimize a noisy `fitness` over `space` with at most `budget`
/// evaluations. `fitness` receives the configuration and a seed for its
/// noise.
pub fn ntbea_optimize<E>(
    space: &ParamSpace,
    mut fitness: impl FnMut(&[usize], u64) -> Result<f64, E>,
    budget: u64,
    seed: u64,
    params: &NtbeaParams,
) -> Result<NtbeaResult, E>
where
    E: From<TuneError>,
{
    if space.dims.is_empty() || space.dims.iter().any(|d| d.values.is_empty()) {
        return Err(TuneError::EmptySpace.into());
    }
    if budget == 0 {
        return Err(TuneError::ZeroBudget.into());
    }
    let n = space.dims.len();
    let mut rng = SplitMix64::new(seed);
    let mut model = NTupleModel::new(n, params.one_tuples_only);
    let mut log = Vec::new();
    let mut current: Vec<usize> = space.dims.iter().map(|d| rng.gen_range(0..d.values.len())).collect();
    let mutable: Vec<usize> = (0..n).filter(|&d| space.dims[d].values.len() > 1).collect();
    for index in 0..budget {
        let f = fitness(&current, derive_seed(seed, 0xF17 + index))?;
        model.update(&current, f);
        log.push(EvalLogEntry {
            index,
            config: current.clone(),
            fitness: f,
        });
        if mutable.is_empty() {
            break;
        }
        let mut best: Option<(f64, Vec<usize>)> = None;
        for _ in 0..params.neighbours.max(1) {
            let mut nb = current.clone();
            let d = mutable[rng.gen_range(0..mutable.len())];
            let size = space.dims[d].values.len();
            let shift = rng.gen_range(1..size);
            nb[d] = (nb[d] + shift) % size;
            let v = model.ucb(&nb, params.k);
            if best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, nb));
            }
        }
        current = best.unwrap().1;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for e in &log {
        let v = model.estimate(&e.config);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, e.config.clone()));
        }
    }
    let best = best.unwrap().1;
    Ok(NtbeaResult {
        best_values: space.values(&best),
        best,
        model,
        log,
    })
}

/// Tune `base`'s parameters (dimension names are config keys) by win rate
/// against `opponent`. Each evaluation plays `games_per_eval` games,
/// alternating sides.
#[allow(clippy::too_many_arguments)]
pub fn tune_agent(
    base: &AgentConfig,
    space: &ParamSpace,
    doc: &ScenarioDoc,
    opponent: &AgentConfig,
    games_per_eval: usize,
    budget: u64,
    seed: u64,
    opts: &MatchOptions,
) -> Result<NtbeaResult, TuneError> {
    // Reject bad keys before any game is played.
    let mut probe = base.clone();
    for d in &space.dims {
        for v in &d.values {
            probe.set_value(&d.name, *v)?;
        }
    }
    ntbea_optimize(
        space,
        |config, s| -> Result<f64, TuneError> {
            let mut agent = base.clone();
            for (d, v) in space.dims.iter().zip(space.values(config)) {
                agent.set_value(&d.name, v)?;
            }
            let mut total = 0.0;
            for g in 0..games_per_eval.max(1) {
                let gs = derive_seed(s, g as u64);
                let side = if g % 2 == 0 { Side::Blue } else { Side::Red };
                let r = match side {
                    Side::Blue => run_match(doc, &agent, opponent, gs, opts)?,
                    Side::Red => run_match(doc, opponent, &agent, gs, opts)?,
                };
                total += r.result.outcome(side);
            }
            Ok(total / games_per_eval.max(1) as f64)
        },
        budget,
        seed,
        &NtbeaParams::default(),
    )
}

/// Header plus one line per evaluation: index, dimension values, fitness.
pub fn write_tuning_log(out: &mut impl Write, space: &ParamSpace, log: &[EvalLogEntry]) -> io::Result<()> {
    let names: Vec<&str> = space.dims.iter().map(|d| d.name.as_str()).collect();
    writeln!(out, "evalIndex\t{}\tfitness", names.join("\t"))?;
    for e in log {
        let vals: Vec<String> = space.values(&e.config).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}\t{}\t{}", e.index, vals.join("\t"), e.fitness)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn singleton_space_needs_one_evaluation() {
        let space = ParamSpace::new(vec![Dimension::new("x", &[3.0])]);
        let r = ntbea_optimize(&space, |_, _| Ok::<_, TuneError>(1.0), 10, 1, &NtbeaParams::default()).unwrap();
        assert_eq!(r.log.len(), 1);
        assert_eq!(r.best_values, vec![3.0]);
    }

    #[test]
    fn model_matches_brute_force_counts() {
        let space = ParamSpace::new(
            (0..4)
                .map(|i| Dimension::new(&format!("d{i}"), &[0.0, 1.0, 2.0]))
                .collect(),
        );
        let r = ntbea_optimize(
            &space,
            |c, s| {
                let noise = Normal::new(0.0, 0.3).unwrap().sample(&mut SplitMix64::new(s));
                Ok::<_, TuneError>(c.iter().sum::<usize>() as f64 + noise)
            },
            60,
            4,
            &NtbeaParams::default(),
        )
        .unwrap();
        assert_eq!(r.log.len(), 60);
        for (p, pattern) in r.model.patterns.iter().enumerate() {
            for (key, stats) in &r.model.tables[p] {
                let hits: Vec<f64> = r
                    .log
                    .iter()
                    .filter(|e| pattern.iter().zip(key).all(|(d, v)| e.config[*d] == *v))
                    .map(|e| e.fitness)
                    .collect();
                assert_eq!(stats.count, hits.len() as u64);
                let mean = hits.iter().sum::<f64>() / hits.len() as f64;
                assert!((stats.mean - mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tuning_log_has_one_line_per_evaluation() {
        let space = ParamSpace::new(vec![Dimension::new("a", &[0.0, 1.0]), Dimension::new("b", &[5.0, 6.0])]);
        let r = ntbea_optimize(
            &space,
            |c, _| Ok::<_, TuneError>(c[0] as f64),
            7,
            2,
            &NtbeaParams::default(),
        )
        .unwrap();
        let mut out = Vec::new();
        write_tuning_log(&mut out, &space, &r.log).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.starts_with("evalIndex\ta\tb\tfitness\n0\t"));
    }
}
