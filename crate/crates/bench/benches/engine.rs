use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use wargame::engine::{GameState, Side};
use wargame::interface::{observe, ObservationLevel};
use wargame::scenario::fixtures;

fn step(c: &mut Criterion) {
    let doc = fixtures::objective_hold();
    let start = GameState::instantiate(&doc, 1).unwrap();
    c.bench_function("step objective-hold", |b| {
        b.iter_batched_ref(|| start.fork(), |s| s.step().unwrap(), BatchSize::SmallInput)
    });
    c.bench_function("fork objective-hold", |b| b.iter(|| start.fork()));
    c.bench_function("observe fog objective-hold", |b| {
        b.iter(|| observe(&start, Side::Blue, ObservationLevel::Fog))
    });
    c.bench_function("full game objective-hold", |b| {
        b.iter_batched_ref(
            || start.fork(),
            |s| {
                while s.terminal().is_none() {
                    s.step().unwrap();
                }
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, step);
criterion_main!(benches);
