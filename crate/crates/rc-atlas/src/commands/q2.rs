//! `q2`: sign probe for the same-class triple correlation on the scale
//! n = 2^m.
//!
//! For each m the probe takes the shape (m, 2^m) and the three distinguished
//! vertices in the size-m class. At sizes the enumeration cap admits it runs
//! both the oracle and the recursion and insists they agree exactly; beyond
//! that the recursion carries on alone, and shapes over the state budget are
//! reported as skipped rows rather than dropped.

use clap::Args;

use rc_core::model::{GraphShape, PlacementKind};
use rc_core::oracle::{self, OracleConfig};
use rc_core::recur::{EvalConfig, Evaluator, Mode, RecurError, DEFAULT_STATE_BUDGET};

use crate::commands::{half, timed, CmdError, CmdResult, OutArgs};
use crate::commands::oracle::map_oracle_err;
use crate::commands::recur::{map_recur_err, BackendArg};
use crate::row::{AtlasRow, Method};

#[derive(Args, Debug)]
pub struct Q2Args {
    /// Smallest probe index m.
    #[arg(long, default_value_t = 2)]
    pub m_min: u32,
    /// Largest probe index m.
    #[arg(long, default_value_t = 8)]
    pub m_max: u32,
    /// Backend for shapes beyond the enumeration cap.
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    pub backend: BackendArg,
    /// Refuse recursion evaluations whose estimated memo size exceeds this.
    #[arg(long)]
    pub state_budget: Option<u64>,
    /// Enumeration cap on the edge count m*n.
    #[arg(long)]
    pub max_mn: Option<u32>,
    /// Worker threads for the enumeration.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn run(args: &Q2Args) -> CmdResult {
    let rows = compute(args)?;
    args.out.emit_rows(&rows)
}

pub fn compute(args: &Q2Args) -> Result<Vec<AtlasRow>, CmdError> {
    if args.m_min < 2 || args.m_min > args.m_max {
        return Err(CmdError::Usage(format!(
            "probe range needs 2 <= m_min <= m_max, got {}..={}",
            args.m_min, args.m_max
        )));
    }
    if args.m_max > 30 {
        return Err(CmdError::Usage(format!("2^{} overflows the shape type", args.m_max)));
    }
    let mut oracle_cfg = OracleConfig::default();
    if let Some(cap) = args.max_mn {
        oracle_cfg.max_edges = cap;
    }
    oracle_cfg.threads = args.threads;
    let eval_cfg = EvalConfig {
        mode: Mode::Validated,
        state_budget: args.state_budget.unwrap_or(DEFAULT_STATE_BUDGET),
        ..EvalConfig::default()
    };
    let p = half();

    let mut rows = Vec::new();
    for m in args.m_min..=args.m_max {
        let n = 1u32 << m;
        // The triple needs three vertices in one class. For m >= 3 it sits in
        // the size-m class as (m, 2^m); at m = 2 only the other class has
        // room, and relabeling the classes makes that the all-x placement on
        // the mirrored shape (2^m, m).
        let (sm, sn) = if m >= 3 { (m, n) } else { (n, m) };
        let shape = GraphShape::new(sm, sn).map_err(|e| CmdError::Failed(e.to_string()))?;
        let edges = shape.edges();

        let mut ev = Evaluator::new(eval_cfg);
        if edges <= u64::from(oracle_cfg.max_edges) {
            let (res, ms) = timed(|| oracle::exact_rc(shape, PlacementKind::AllInX, None, &oracle_cfg));
            let res = res.map_err(map_oracle_err)?;
            let rec = ev
                .rc_recursion(sm, sn, PlacementKind::AllInX)
                .map_err(map_recur_err)?;
            if rec != res {
                return Err(CmdError::Failed(format!(
                    "oracle and recursion disagree at ({sm},{sn}): rc {} vs {}",
                    crate::row::rational_str(&res.rc),
                    crate::row::rational_str(&rec.rc)
                )));
            }
            rows.push(AtlasRow::from_exact(sm, sn, PlacementKind::AllInX, Method::Oracle, &p, &res, ms));
            continue;
        }

        match args.backend {
            BackendArg::Exact => {
                let (res, ms) = timed(|| ev.rc_recursion(sm, sn, PlacementKind::AllInX));
                match res {
                    Ok(r) => rows.push(AtlasRow::from_exact(sm, sn, PlacementKind::AllInX, Method::Recursion, &p, &r, ms)),
                    Err(e @ RecurError::StateBudget { .. }) => {
                        rows.push(AtlasRow::skipped(sm, sn, PlacementKind::AllInX, &e.to_string()));
                    }
                    Err(e) => return Err(map_recur_err(e)),
                }
            }
            BackendArg::Bigfloat => {
                let (res, ms) = timed(|| ev.rc_recursion_float(sm, sn, PlacementKind::AllInX));
                match res {
                    Ok(r) => rows.push(AtlasRow::from_enclosure(sm, sn, PlacementKind::AllInX, &r, ms)),
                    Err(e @ RecurError::StateBudget { .. }) => {
                        rows.push(AtlasRow::skipped(sm, sn, PlacementKind::AllInX, &e.to_string()));
                    }
                    Err(e) => return Err(map_recur_err(e)),
                }
            }
        }
    }
    Ok(rows)
}
