//! Criterion benchmarks for gcwave; see `benches/`.
