//! Criterion benchmarks for the curve solver and the training loop. Run with
//! `cargo bench -p ammsim-bench`.
