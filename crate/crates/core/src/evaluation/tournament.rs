//! Round-robin tournaments and their tab-separated report.

use std::io::{self, Write};

use rayon::prelude::*;

use super::game::{run_match, GameResult, MatchError, MatchOptions};
use super::nash::NashResult;
use crate::agents::AgentConfig;
use crate::engine::rng::derive_seed;
use crate::engine::Side;
use crate::scenario::ScenarioDoc;

#[derive(Clone, Debug, PartialEq)]
pub struct Entrant {
    pub name: String,
    pub config: AgentConfig,
}

impl Entrant {
    pub fn new(name: impl Into<String>, config: AgentConfig) -> Self {
        Entrant {
            name: name.into(),
            config,
        }
    }
}

/// `w[i][j]`: mean outcome of agent `i` against `j`, over seeds, scenarios
/// and both side assignments.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultMatrix {
    pub agents: Vec<String>,
    pub w: Vec<Vec<f64>>,
    /// Games each agent played.
    pub games: Vec<u64>,
    /// Each agent's mean outcome over all its games.
    pub mean_outcome: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Tournament {
    /// Rows and columns of the ranked entrants only.
    pub matrix: ResultMatrix,
    /// Ranked entrants followed by hall-of-fame members.
    pub full: ResultMatrix,
    pub results: Vec<GameResult>,
}

/// Every pair (except two hall-of-fame members) plays `n_seeds` games per
/// scenario in each side assignment, with the same seed for both.
pub fn round_robin(
    entrants: &[Entrant],
    scenarios: &[ScenarioDoc],
    n_seeds: u64,
    hall_of_fame: &[Entrant],
    seed: u64,
    opts: &MatchOptions,
) -> Result<Tournament, MatchError> {
    let all: Vec<&Entrant> = entrants.iter().chain(hall_of_fame).collect();
    let ranked = entrants.len();
    let n = all.len();
    let mut jobs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if i >= ranked && j >= ranked {
                continue;
            }
            for (si, _) in scenarios.iter().enumerate() {
                for k in 0..n_seeds {
                    let s = derive_seed(seed, ((si as u64) << 32) | k);
                    jobs.push((i, j, si, s));
                    jobs.push((j, i, si, s));
                }
            }
        }
    }
    let opts = MatchOptions {
        replay: None,
        keep_decisions: false,
        ..opts.clone()
    };
    log::info!("round robin: {} entrants, {} games", n, jobs.len());
    let results: Vec<GameResult> = jobs
        .par_iter()
        .map(|&(b, r, si, s)| {
            let mut out = run_match(&scenarios[si], &all[b].config, &all[r].config, s, &opts)?.result;
            out.blue = all[b].name.clone();
            out.red = all[r].name.clone();
            Ok(out)
        })
        .collect::<Result<_, MatchError>>()?;
    let mut sum = vec![vec![0.0; n]; n];
    let mut count = vec![vec![0u64; n]; n];
    for (&(b, r, _, _), res) in jobs.iter().zip(&results) {
        sum[b][r] += res.outcome(Side::Blue);
        count[b][r] += 1;
        sum[r][b] += res.outcome(Side::Red);
        count[r][b] += 1;
    }
    let mut w = vec![vec![0.5; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if count[i][j] > 0 {
                w[i][j] = sum[i][j] / count[i][j] as f64;
                w[j][i] = 1.0 - w[i][j];
            }
        }
    }
    let games: Vec<u64> = (0..n).map(|i| count[i].iter().sum()).collect();
    let mean_outcome: Vec<f64> = (0..n)
        .map(|i| {
            if games[i] > 0 {
                sum[i].iter().sum::<f64>() / games[i] as f64
            } else {
                0.5
            }
        })
        .collect();
    let full = ResultMatrix {
        agents: all.iter().map(|e| e.name.clone()).collect(),
        w,
        games,
        mean_outcome,
    };
    let matrix = ResultMatrix {
        agents: full.agents[..ranked].to_vec(),
        w: full.w[..ranked].iter().map(|r| r[..ranked].to_vec()).collect(),
        games: full.games[..ranked].to_vec(),
        mean_outcome: full.mean_outcome[..ranked].to_vec(),
    };
    Ok(Tournament { matrix, full, results })
}

/// Header plus one row per agent: name, games, meanOutcome, nashWeight, skill.
pub fn write_report(out: &mut impl Write, m: &ResultMatrix, nash: &NashResult) -> io::Result<()> {
    writeln!(out, "name\tgames\tmeanOutcome\tnashWeight\tskill")?;
    for i in 0..m.agents.len() {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            m.agents[i], m.games[i], m.mean_outcome[i], nash.p[i], nash.skill[i]
        )?;
    }
    Ok(())
}
