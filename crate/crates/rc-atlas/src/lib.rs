//! Library backing the `rc-atlas` binary: the per-result row record with its
//! CSV/JSON forms, and the subcommand logic (exact oracle, recursion engine,
//! Monte Carlo, limit table, sweeps with convergence diagnostics, the
//! n = 2^m sign probe, the published-text audit, and the cross-method
//! verification gate). The integration tests drive these modules in-process;
//! the binary in `main.rs` is a thin clap dispatcher over them.

pub mod commands;
pub mod row;
