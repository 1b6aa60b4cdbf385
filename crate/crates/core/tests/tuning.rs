use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use wargame::agents::{AgentConfig, AgentKind, SearchBudget};
use wargame::engine::rng::derive_seed;
use wargame::engine::{Side, SplitMix64};
use wargame::evaluation::game::{run_match, MatchOptions};
use wargame::interface::ObservationLevel;
use wargame::scenario::fixtures;
use wargame::tuning::ntbea::{ntbea_optimize, tune_agent, Dimension, NtbeaParams, ParamSpace, TuneError};

const ALPHABET: usize = 4;

/// Two dimensions whose sum modulo the alphabet must hit one residue. Every
/// single value is good in exactly one of its pairings, so the marginals are
/// flat and only the pair carries information.
fn xor_fitness(c: &[usize], seed: u64) -> Result<f64, TuneError> {
    let noise = Normal::new(0.0, 0.5).unwrap().sample(&mut SplitMix64::new(seed));
    Ok(if xor_optimal(c) { 1.0 } else { 0.0 } + noise)
}

fn xor_optimal(c: &[usize]) -> bool {
    (c[0] + c[1]) % ALPHABET == ALPHABET - 1
}

fn xor_space() -> ParamSpace {
    let values: Vec<f64> = (0..ALPHABET).map(|v| v as f64).collect();
    ParamSpace::new(vec![Dimension::new("a", &values), Dimension::new("b", &values)])
}

fn xor_successes(params: &NtbeaParams) -> usize {
    (0..50u64)
        .filter(|&run| {
            let r = ntbea_optimize(&xor_space(), xor_fitness, 60, derive_seed(77, run), params).unwrap();
            xor_optimal(&r.best)
        })
        .count()
}

#[test]
fn pair_statistics_beat_the_one_tuple_ablation_on_xor() {
    let full = xor_successes(&NtbeaParams::default());
    let ablated = xor_successes(&NtbeaParams {
        one_tuples_only: true,
        ..NtbeaParams::default()
    });
    println!("xor successes over 50 runs: ntbea {full}, 1-tuple ablation {ablated}");
    assert!(full > ablated, "ntbea {full} vs ablation {ablated}");
}

#[test]
fn optimisation_is_deterministic_under_its_seed() {
    let a = ntbea_optimize(&xor_space(), xor_fitness, 40, 5, &NtbeaParams::default()).unwrap();
    let b = ntbea_optimize(&xor_space(), xor_fitness, 40, 5, &NtbeaParams::default()).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.best, b.best);
    let c = ntbea_optimize(&xor_space(), xor_fitness, 40, 6, &NtbeaParams::default()).unwrap();
    assert_ne!(a.log, c.log);
}

#[test]
fn empty_space_and_zero_budget_are_rejected() {
    let empty = ParamSpace::new(vec![]);
    assert!(matches!(
        ntbea_optimize(&empty, xor_fitness, 5, 1, &NtbeaParams::default()),
        Err(TuneError::EmptySpace)
    ));
    let hollow = ParamSpace::new(vec![Dimension::new("x", &[])]);
    assert!(matches!(
        ntbea_optimize(&hollow, xor_fitness, 5, 1, &NtbeaParams::default()),
        Err(TuneError::EmptySpace)
    ));
    assert!(matches!(
        ntbea_optimize(&xor_space(), xor_fitness, 0, 1, &NtbeaParams::default()),
        Err(TuneError::ZeroBudget)
    ));
}

fn opts(calls: u64) -> MatchOptions {
    MatchOptions {
        level: ObservationLevel::Full,
        budget: SearchBudget::calls(calls),
        ..MatchOptions::default()
    }
}

fn mcts_space() -> ParamSpace {
    ParamSpace::new(vec![
        Dimension::new("c", &[0.5, 1.41, 3.0]),
        Dimension::new("rollout", &[0.0, 3.0, 8.0]),
    ])
}

#[test]
fn budget_of_one_returns_the_evaluated_configuration() {
    let base = AgentConfig::new(AgentKind::Mcts);
    let r = tune_agent(
        &base,
        &mcts_space(),
        &fixtures::tiny_duel(),
        &"scripted".parse().unwrap(),
        2,
        1,
        3,
        &opts(100),
    )
    .unwrap();
    assert_eq!(r.log.len(), 1);
    assert_eq!(r.best, r.log[0].config);
}

#[test]
fn tuning_is_reproducible_and_rejects_unknown_keys() {
    let base = AgentConfig::new(AgentKind::Mcts);
    let scripted: AgentConfig = "scripted".parse().unwrap();
    let run = || {
        tune_agent(
            &base,
            &mcts_space(),
            &fixtures::tiny_duel(),
            &scripted,
            2,
            6,
            8,
            &opts(100),
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.best_values, b.best_values);
    assert_eq!(a.log, b.log);

    let bad = ParamSpace::new(vec![Dimension::new("nonsense", &[1.0])]);
    assert!(matches!(
        tune_agent(&base, &bad, &fixtures::tiny_duel(), &scripted, 2, 3, 8, &opts(100)),
        Err(TuneError::Config(_))
    ));
}

/// Lower and upper 95% Wilson score bounds.
fn wilson(successes: f64, n: f64) -> (f64, f64) {
    let z = 1.96;
    let p = successes / n;
    let centre = p + z * z / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    let denom = 1.0 + z * z / n;
    ((centre - spread) / denom, (centre + spread) / denom)
}

fn win_rate(agent: &AgentConfig, opponent: &AgentConfig, games: u64) -> f64 {
    let doc = fixtures::river_crossing();
    (0..games)
        .into_par_iter()
        .map(|g| {
            let seed = derive_seed(0xF2E5, g);
            if g % 2 == 0 {
                run_match(&doc, agent, opponent, seed, &opts(300))
                    .unwrap()
                    .result
                    .outcome(Side::Blue)
            } else {
                run_match(&doc, opponent, agent, seed, &opts(300))
                    .unwrap()
                    .result
                    .outcome(Side::Red)
            }
        })
        .sum::<f64>()
}

#[test]
fn tuned_mcts_is_not_worse_than_the_default() {
    let base = AgentConfig::new(AgentKind::Mcts);
    let scripted: AgentConfig = "scripted".parse().unwrap();
    let r = tune_agent(
        &base,
        &mcts_space(),
        &fixtures::river_crossing(),
        &scripted,
        4,
        9,
        21,
        &opts(300),
    )
    .unwrap();
    let mut tuned = base.clone();
    for (d, v) in mcts_space().dims.iter().zip(&r.best_values) {
        tuned.set_value(&d.name, *v).unwrap();
    }
    let n = 100;
    let (t, d) = (win_rate(&tuned, &scripted, n), win_rate(&base, &scripted, n));
    let (_, upper) = wilson(t, n as f64);
    println!("tuned {:?}: {t}/{n}, default: {d}/{n}", r.best_values);
    assert!(upper >= d / n as f64, "tuned {t} default {d}");
}
