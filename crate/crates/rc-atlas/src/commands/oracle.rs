//! `oracle`: exact relative covariance by exhaustive orientation enumeration.

use clap::Args;
use num::BigRational;

use rc_core::oracle::{self, OracleConfig, OracleError};

use crate::commands::{half, parse_ratio, select_placements, shape, timed, CmdError, CmdResult, OutArgs, PlacementArg};
use crate::row::{AtlasRow, Method};

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Size of the X class.
    #[arg(long)]
    pub m: u32,
    /// Size of the Y class.
    #[arg(long)]
    pub n: u32,
    /// Restrict to one placement (default: every placement that fits).
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
    /// Edge bias P(edge points X to Y) as a fraction, e.g. 1/3. Default 1/2.
    #[arg(long, value_parser = parse_ratio)]
    pub p: Option<BigRational>,
    /// Worker threads for the enumeration (default: one per core).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Enumeration cap on the edge count m*n.
    #[arg(long)]
    pub max_mn: Option<u32>,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn run(args: &OracleArgs) -> CmdResult {
    let rows = compute(args)?;
    args.out.emit_rows(&rows)
}

pub fn compute(args: &OracleArgs) -> Result<Vec<AtlasRow>, CmdError> {
    let shape = shape(args.m, args.n)?;
    let mut cfg = OracleConfig::default();
    if let Some(cap) = args.max_mn {
        cfg.max_edges = cap;
    }
    cfg.threads = args.threads;
    let p = args.p.clone().unwrap_or_else(half);
    // uniform bias takes the unweighted counting path
    let bias = if p == half() { None } else { Some(&p) };

    let mut rows = Vec::new();
    for (kind, unfit) in select_placements(shape, args.placement)? {
        if let Some(reason) = unfit {
            rows.push(AtlasRow::skipped(args.m, args.n, kind, &reason));
            continue;
        }
        let (res, ms) = timed(|| oracle::exact_rc(shape, kind, bias, &cfg));
        let res = res.map_err(map_oracle_err)?;
        rows.push(AtlasRow::from_exact(args.m, args.n, kind, Method::Oracle, &p, &res, ms));
    }
    Ok(rows)
}

pub fn map_oracle_err(e: OracleError) -> CmdError {
    match e {
        OracleError::CapExceeded { .. } => CmdError::Refused(e.to_string()),
        OracleError::CapAboveCeiling { .. } | OracleError::BiasOutOfRange { .. } => {
            CmdError::Usage(e.to_string())
        }
        other => CmdError::Failed(other.to_string()),
    }
}
