use criterion::{criterion_group, criterion_main, Criterion};
use wargame::agents::{build_agent, AgentConfig, AgentKind, DecisionInput, SearchBudget};
use wargame::engine::{GameState, Side};
use wargame::interface::ObservationLevel;
use wargame::scenario::fixtures;

fn decide(c: &mut Criterion) {
    let state = GameState::instantiate(&fixtures::river_crossing(), 1).unwrap();
    let budget = SearchBudget::calls(2000);
    let mut group = c.benchmark_group("decide river-crossing 2000 calls");
    group.sample_size(10);
    for kind in [
        AgentKind::Mcts,
        AgentKind::Rhea,
        AgentKind::Cmab,
        AgentKind::Sss,
        AgentKind::TwoStage,
    ] {
        let mut agent = build_agent(&AgentConfig::new(kind));
        group.bench_function(kind.name(), |b| {
            b.iter(|| {
                let input = DecisionInput::new(&state, Side::Blue, ObservationLevel::Full, 5);
                agent.decide(&input, &budget).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, decide);
criterion_main!(benches);
