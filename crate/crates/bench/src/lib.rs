//! Benchmark-only crate; see `benches/cocycle.rs`.
