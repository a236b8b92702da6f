//! Criterion benchmarks for `caperc-core`; see `benches/`.
