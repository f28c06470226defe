//! Criterion benchmarks for the DeepLRR workspace live under `benches/`.
