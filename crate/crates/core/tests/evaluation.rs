use wargame::agents::{AgentConfig, AgentKind, SearchBudget};
use wargame::engine::TerminationReason;
use wargame::evaluation::game::{run_match, MatchOptions};
use wargame::evaluation::map_elites::{map_elites_run, MapElitesConfig, ParamRange};
use wargame::evaluation::nash::nash_average;
use wargame::evaluation::tournament::{round_robin, Entrant};
use wargame::interface::ObservationLevel;
use wargame::scenario::fixtures;
use wargame::tooling::exit::exit_samples;

fn cfg(s: &str) -> AgentConfig {
    s.parse().unwrap()
}

fn full(calls: u64) -> MatchOptions {
    MatchOptions {
        level: ObservationLevel::Full,
        budget: SearchBudget::calls(calls),
        ..MatchOptions::default()
    }
}

#[test]
fn scripted_attack_versus_hold_is_reproducible() {
    let doc = fixtures::river_crossing();
    let attack = cfg("scripted:script=attackNearest");
    let hold = cfg("scripted:script=holdPosition");
    let a = run_match(&doc, &attack, &hold, 2024, &MatchOptions::default())
        .unwrap()
        .result;
    let b = run_match(&doc, &attack, &hold, 2024, &MatchOptions::default())
        .unwrap()
        .result;
    assert_eq!(a, b);
    // Blue walks onto the objective unopposed and holds it to the tick limit.
    assert_eq!(a.termination, Some(TerminationReason::TickLimit));
    assert_eq!(a.ticks, 100);
    assert_eq!(a.vp, [49.5, 0.0]);
    assert_eq!(a.outcome_blue, 1.0);
    assert_eq!(a.score.mp_expended, [14, 0]);
    assert_eq!(a.first_loss_tick, [None, None]);
    assert_eq!(a.final_hash, 10570077607450662555);
}

#[test]
fn round_robin_fills_a_constant_sum_matrix() {
    let doc = fixtures::tiny_duel();
    let entrants = vec![
        Entrant::new("random", cfg("random")),
        Entrant::new("scripted", cfg("scripted")),
    ];
    let t = round_robin(&entrants, &[doc], 1, &[], 5, &full(200)).unwrap();
    // One seed in both side assignments.
    assert_eq!(t.results.len(), 2);
    assert_eq!(t.matrix.games, vec![2, 2]);
    let w = &t.matrix.w;
    assert_eq!(w.len(), 2);
    assert_eq!(w[0][0], 0.5);
    assert!((w[0][1] + w[1][0] - 1.0).abs() < 1e-12);
    let blue_random = t.results.iter().find(|r| r.blue == "random").unwrap();
    let red_random = t.results.iter().find(|r| r.red == "random").unwrap();
    let expected = (blue_random.outcome_blue + (1.0 - red_random.outcome_blue)) / 2.0;
    assert!((w[0][1] - expected).abs() < 1e-12);
}

#[test]
fn self_play_is_an_even_match() {
    let doc = fixtures::tiny_duel();
    let entrants = vec![Entrant::new("a", cfg("scripted")), Entrant::new("b", cfg("scripted"))];
    let t = round_robin(&entrants, &[doc], 3, &[], 11, &full(200)).unwrap();
    assert_eq!(t.matrix.w[0][1], 0.5);
    assert_eq!(t.matrix.w[1][0], 0.5);
}

#[test]
fn hall_of_fame_does_not_move_the_ranked_matrix() {
    let doc = fixtures::tiny_duel();
    let entrants = vec![
        Entrant::new("random", cfg("random")),
        Entrant::new("scripted", cfg("scripted")),
    ];
    let hof = vec![Entrant::new("old", cfg("scripted:script=holdPosition"))];
    let base = round_robin(&entrants, std::slice::from_ref(&doc), 2, &[], 3, &full(200)).unwrap();
    let with = round_robin(&entrants, &[doc], 2, &hof, 3, &full(200)).unwrap();
    assert_eq!(base.matrix.w, with.matrix.w);
    assert_eq!(with.matrix.agents, vec!["random", "scripted"]);
    assert_eq!(with.full.agents.len(), 3);
}

#[test]
fn nash_on_a_dominant_strategy() {
    let w = vec![vec![0.5, 0.9], vec![0.1, 0.5]];
    let r = nash_average(&w).unwrap();
    assert!((r.p[0] - 1.0).abs() < 1e-6, "{:?}", r.p);
    assert!(r.skill[0] > r.skill[1]);
}

fn cmab_archive_config() -> MapElitesConfig {
    let mut c = MapElitesConfig::new(
        cfg("cmab"),
        vec![ParamRange::new("epsilon", 0.0, 1.0), ParamRange::new("w2", 0.0, 2.0)],
        cfg("random"),
    );
    c.seeds = vec![0, 1];
    c.options = full(60);
    c
}

#[test]
fn one_iteration_fills_one_cell() {
    let doc = fixtures::tiny_duel();
    let (archive, log) = map_elites_run(&doc, &cmab_archive_config(), 1, 9).unwrap();
    assert_eq!(archive.occupied(), 1);
    assert_eq!(log.len(), 1);
    assert!(log[0].accepted);
}

#[test]
fn archive_is_deterministic_under_its_seed() {
    let doc = fixtures::tiny_duel();
    let a = map_elites_run(&doc, &cmab_archive_config(), 12, 4).unwrap();
    let b = map_elites_run(&doc, &cmab_archive_config(), 12, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exit_targets_follow_the_game_outcome() {
    let doc = fixtures::tiny_duel();
    let opts = MatchOptions {
        keep_decisions: true,
        ..full(300)
    };
    let games: Vec<_> = (0..3)
        .map(|s| {
            let out = run_match(&doc, &AgentConfig::new(AgentKind::Mcts), &cfg("random"), s, &opts).unwrap();
            (out.result, out.decisions)
        })
        .collect();
    let samples = exit_samples(&games);
    assert_eq!(samples.len(), games.iter().map(|g| g.1.len()).sum::<usize>());
    for s in &samples {
        let (result, _) = &games[s.game];
        assert_eq!(s.value_target, result.outcome(s.side));
        let total: f64 = s.policy_target.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    for (g, (_, decisions)) in games.iter().enumerate() {
        // Both sides decide at each command phase.
        assert_eq!(samples.iter().filter(|s| s.game == g).count(), decisions.len());
        assert!(decisions.len() % 2 == 0);
    }
}
