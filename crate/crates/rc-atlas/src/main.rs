//! Command-line atlas over the reachability-correlation engines: exact
//! enumeration, the memoized recursion system, Monte Carlo sampling, and the
//! closed-form limit estimates, with CSV/JSON emission.
//!
//! Exit codes: 0 success, 1 verification or computation failure, 2 usage
//! error, 3 size/budget/feasibility refusal.

use clap::{Parser, Subcommand};

use rc_atlas::commands::{self, CmdResult};

#[derive(Parser)]
#[command(
    name = "rc-atlas",
    version,
    about = "Atlas of reachability correlations in randomly oriented complete bipartite graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact relative covariance by exhaustive orientation enumeration.
    Oracle(commands::oracle::OracleArgs),
    /// Relative covariance through the memoized recursion system.
    Recur(commands::recur::RecurArgs),
    /// Monte Carlo estimates with reproducible streams and CIs.
    Mc(commands::mc::McArgs),
    /// The limiting-value table and closed-form finite-size estimates.
    Limits(commands::limits::LimitsArgs),
    /// Cross-method consistency gate; nonzero exit on any failure.
    Verify(commands::verify::VerifyArgs),
    /// Shape sweeps with convergence diagnostics against the limit table.
    Sweep(commands::sweep::SweepArgs),
    /// Sign probe for the same-class triple correlation at n = 2^m.
    Q2(commands::q2::Q2Args),
    /// Audit of the published recursion text against the oracle.
    Erratum(commands::erratum::ErratumArgs),
}

fn main() {
    let cli = Cli::parse();
    let result: CmdResult = match &cli.cmd {
        Cmd::Oracle(args) => commands::oracle::run(args),
        Cmd::Recur(args) => commands::recur::run(args),
        Cmd::Mc(args) => commands::mc::run(args),
        Cmd::Limits(args) => commands::limits::run(args),
        Cmd::Verify(args) => commands::verify::run(args),
        Cmd::Sweep(args) => commands::sweep::run(args),
        Cmd::Q2(args) => commands::q2::run(args),
        Cmd::Erratum(args) => commands::erratum::run(args),
    };
    if let Err(e) = result {
        eprintln!("rc-atlas: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
