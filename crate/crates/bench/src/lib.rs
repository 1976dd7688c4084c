//! Criterion benchmarks for nosig-core live under `benches/`.
