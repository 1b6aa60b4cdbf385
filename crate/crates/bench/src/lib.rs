//! Criterion benchmarks for the engine and the agents; see `benches/`.
