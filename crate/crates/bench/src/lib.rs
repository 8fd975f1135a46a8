//! Criterion benchmarks for `bialg-core`; see `benches/`.
