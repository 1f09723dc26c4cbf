//! Criterion benchmarks for the simulation kernels. See `benches/kernels.rs`.
