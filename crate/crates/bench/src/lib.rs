//! Criterion benchmarks for the qfock pipeline live in `benches/`.
