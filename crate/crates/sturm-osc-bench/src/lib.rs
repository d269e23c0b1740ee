//! Benchmark-only crate; the suites live in `benches/suites.rs` and run with
//! `cargo bench -p sturm-osc-bench`.
