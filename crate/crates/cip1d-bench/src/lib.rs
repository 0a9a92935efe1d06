//! Benchmarks for the cip1d solvers; see `benches/`.
