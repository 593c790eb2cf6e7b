//! `recur`: relative covariance through the memoized recursion system.

use clap::Args;

use rc_core::recur::{EvalConfig, Evaluator, Mode, RecurError, DEFAULT_STATE_BUDGET};

use crate::commands::{half, select_placements, shape, timed, CmdError, CmdResult, OutArgs, PlacementArg};
use crate::row::{AtlasRow, Method};

#[derive(Clone, Copy, Debug, Eq, PartialEq, clap::ValueEnum)]
pub enum ModeArg {
    Validated,
    Printed,
}

#[derive(Clone, Copy, Debug, Eq, PartialEq, clap::ValueEnum)]
pub enum BackendArg {
    Exact,
    Bigfloat,
}

#[derive(Args, Debug)]
pub struct RecurArgs {
    /// Size of the X class.
    #[arg(long)]
    pub m: u32,
    /// Size of the Y class.
    #[arg(long)]
    pub n: u32,
    /// Restrict to one placement (default: every placement that fits).
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
    /// Recursion system; `printed` transcribes the published text and is
    /// only meaningful through the erratum command.
    #[arg(long, value_enum, default_value_t = ModeArg::Validated)]
    pub mode: ModeArg,
    /// Exact dyadic arithmetic or directed-rounding interval floats.
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    pub backend: BackendArg,
    /// Mantissa bits for the bigfloat backend (default 4 * max(m, n)).
    #[arg(long)]
    pub precision: Option<u32>,
    /// Maximum tolerated enclosure width for bigfloat results.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Refuse evaluations whose estimated memo size exceeds this.
    #[arg(long)]
    pub state_budget: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn run(args: &RecurArgs) -> CmdResult {
    let rows = compute(args)?;
    args.out.emit_rows(&rows)
}

pub fn compute(args: &RecurArgs) -> Result<Vec<AtlasRow>, CmdError> {
    if args.mode == ModeArg::Printed {
        return Err(CmdError::Usage(
            "the printed recursion system mis-states one step and does not define a relative \
             covariance; run `rc-atlas erratum` to compare the two systems"
                .to_string(),
        ));
    }
    let shape = shape(args.m, args.n)?;
    let cfg = EvalConfig {
        mode: Mode::Validated,
        state_budget: args.state_budget.unwrap_or(DEFAULT_STATE_BUDGET),
        precision_bits: args.precision,
        tolerance: args.tolerance,
    };
    let mut ev = Evaluator::new(cfg);
    let p = half();

    let mut rows = Vec::new();
    for (kind, unfit) in select_placements(shape, args.placement)? {
        if let Some(reason) = unfit {
            rows.push(AtlasRow::skipped(args.m, args.n, kind, &reason));
            continue;
        }
        match args.backend {
            BackendArg::Exact => {
                let (res, ms) = timed(|| ev.rc_recursion(args.m, args.n, kind));
                let res = res.map_err(map_recur_err)?;
                rows.push(AtlasRow::from_exact(args.m, args.n, kind, Method::Recursion, &p, &res, ms));
            }
            BackendArg::Bigfloat => {
                let (res, ms) = timed(|| ev.rc_recursion_float(args.m, args.n, kind));
                let res = res.map_err(map_recur_err)?;
                rows.push(AtlasRow::from_enclosure(args.m, args.n, kind, &res, ms));
            }
        }
    }
    Ok(rows)
}

pub fn map_recur_err(e: RecurError) -> CmdError {
    match e {
        RecurError::StateBudget { .. } => CmdError::Refused(e.to_string()),
        RecurError::KeyOutOfBounds { .. } | RecurError::PrintedModeRc => CmdError::Usage(e.to_string()),
        other => CmdError::Failed(other.to_string()),
    }
}
