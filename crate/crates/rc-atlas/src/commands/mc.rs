//! `mc`: Monte Carlo estimation with reproducible streams and a rare-event
//! feasibility advisor.

use clap::Args;
use num::BigRational;
use serde::Serialize;

use rc_core::mc::{self, McConfig, McError, DEFAULT_BATCH_SIZE, DEFAULT_TRIAL_BUDGET};

use crate::commands::{half, parse_ratio, select_placements, shape, timed, CmdError, CmdResult, OutArgs, PlacementArg};
use crate::row::{self, AtlasRow};

#[derive(Args, Debug)]
pub struct McArgs {
    /// Size of the X class.
    #[arg(long)]
    pub m: u32,
    /// Size of the Y class.
    #[arg(long)]
    pub n: u32,
    /// Restrict to one placement (default: every placement that fits).
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
    /// Edge bias P(edge points X to Y) as a fraction. Default 1/2.
    #[arg(long, value_parser = parse_ratio)]
    pub p: Option<BigRational>,
    /// Number of sampled orientations.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Stream seed; identical seeds reproduce results bit for bit.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per batch (the unit of parallelism and of CI batching).
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch_size: u64,
    /// Worker threads (default: sequential).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Do not sample; report whether the target relative error on the joint
    /// probability is reachable within the trial budget, and exit 3 if not.
    #[arg(long, value_name = "REL_ERR")]
    pub preflight: Option<f64>,
    /// Trial budget the feasibility check and --trials are held against.
    #[arg(long, default_value_t = DEFAULT_TRIAL_BUDGET)]
    pub budget: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

/// One feasibility verdict per placement, emitted as the preflight report.
#[derive(Serialize)]
pub struct PreflightLine {
    pub m: u32,
    pub n: u32,
    pub placement: String,
    #[serde(flatten)]
    pub advice: rc_core::mc::FeasibilityAdvice,
}

pub fn run(args: &McArgs) -> CmdResult {
    if let Some(rel_err) = args.preflight {
        return preflight(args, rel_err);
    }
    let rows = compute(args)?;
    args.out.emit_rows(&rows)
}

fn preflight(args: &McArgs, rel_err: f64) -> CmdResult {
    if !(rel_err > 0.0 && rel_err.is_finite()) {
        return Err(CmdError::Usage(format!("--preflight wants a positive relative error, got {rel_err}")));
    }
    if args.p.as_ref().is_some_and(|p| *p != half()) {
        return Err(CmdError::Usage(
            "the feasibility advisor is calibrated for the uniform bias p = 1/2".to_string(),
        ));
    }
    let shape = shape(args.m, args.n)?;
    let mut lines = Vec::new();
    let mut infeasible = Vec::new();
    for (kind, unfit) in select_placements(shape, args.placement)? {
        if unfit.is_some() {
            continue;
        }
        let advice = mc::feasibility(shape, kind, rel_err, args.budget);
        if !advice.feasible {
            infeasible.push(format!(
                "{} needs ~{:.3e} trials (budget {})",
                kind.as_str(),
                advice.required_trials,
                advice.budget
            ));
        }
        lines.push(PreflightLine { m: args.m, n: args.n, placement: kind.as_str().to_string(), advice });
    }
    let w = args.out.writer()?;
    row::write_json(&serde_json::json!({ "preflight": lines }), w)
        .map_err(|e| CmdError::Failed(format!("write failed: {e}")))?;
    if infeasible.is_empty() {
        Ok(())
    } else {
        Err(CmdError::Refused(format!("infeasible at relative error {rel_err}: {}", infeasible.join("; "))))
    }
}

pub fn compute(args: &McArgs) -> Result<Vec<AtlasRow>, CmdError> {
    if args.trials > args.budget {
        return Err(CmdError::Refused(format!(
            "{} trials exceed the budget {}; raise --budget to insist",
            args.trials, args.budget
        )));
    }
    let shape = shape(args.m, args.n)?;
    let cfg = McConfig {
        trials: args.trials,
        seed: args.seed,
        batch_size: args.batch_size,
        p: args.p.clone().unwrap_or_else(half),
        threads: args.threads,
    };
    let mut rows = Vec::new();
    for (kind, unfit) in select_placements(shape, args.placement)? {
        if let Some(reason) = unfit {
            rows.push(AtlasRow::skipped(args.m, args.n, kind, &reason));
            continue;
        }
        let (res, ms) = timed(|| mc::estimate_rc(shape, kind, &cfg));
        let res = res.map_err(map_mc_err)?;
        rows.push(AtlasRow::from_mc(args.m, args.n, kind, &cfg, &res, ms));
    }
    Ok(rows)
}

pub fn map_mc_err(e: McError) -> CmdError {
    match e {
        McError::ZeroTrials | McError::ZeroBatch | McError::BiasOutOfRange { .. } => {
            CmdError::Usage(e.to_string())
        }
        other => CmdError::Failed(other.to_string()),
    }
}
