//! Criterion benchmarks for `spinlink-core`; see `benches/`.
