//! Criterion benchmarks for the hot kernels of skywatch-core live in `benches/`.
