//! `limits`: the nine limiting relative covariances and, optionally, the
//! closed-form finite-size estimates at one shape.

use std::io::Write;

use clap::Args;
use serde::Serialize;

use rc_core::asymptotic::{rc_finite_estimate, rc_limit};
use rc_core::model::{BetaClass, PlacementKind};

use crate::commands::{beta_str, CmdError, CmdResult, Format, OutArgs};
use crate::row;

#[derive(Args, Debug)]
pub struct LimitsArgs {
    /// Also evaluate the finite-size estimates at this X-class size.
    #[arg(long, requires = "n")]
    pub m: Option<u32>,
    /// Y-class size for the finite-size estimates.
    #[arg(long, requires = "m")]
    pub n: Option<u32>,
    #[command(flatten)]
    pub out: OutArgs,
}

/// One line of the limit table or one finite-size estimate.
#[derive(Serialize)]
pub struct LimitLine {
    pub placement: String,
    pub beta: String,
    pub kind: String,
    pub value: String,
}

pub fn run(args: &LimitsArgs) -> CmdResult {
    let lines = compute(args);
    let mut w = args.out.writer()?;
    match args.out.format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            let io_err = |e: csv::Error| CmdError::Failed(format!("write failed: {e}"));
            csv.write_record(["placement", "beta", "kind", "value"]).map_err(io_err)?;
            for l in &lines {
                csv.write_record([&l.placement, &l.beta, &l.kind, &l.value]).map_err(io_err)?;
            }
            csv.flush().map_err(|e| CmdError::Failed(format!("write failed: {e}")))?;
        }
        Format::Json => {
            row::write_json(&serde_json::json!({ "limits": lines }), &mut w)
                .map_err(|e| CmdError::Failed(format!("write failed: {e}")))?;
            writeln!(w).ok();
        }
    }
    Ok(())
}

pub fn compute(args: &LimitsArgs) -> Vec<LimitLine> {
    let mut lines = Vec::new();
    for kind in PlacementKind::ALL {
        for class in BetaClass::ALL {
            let v = rc_limit(kind, class);
            let value = if *v.denom() == 1 { v.numer().to_string() } else { format!("{}/{}", v.numer(), v.denom()) };
            lines.push(LimitLine {
                placement: kind.as_str().to_string(),
                beta: beta_str(class).to_string(),
                kind: "limit".to_string(),
                value,
            });
        }
    }
    if let (Some(m), Some(n)) = (args.m, args.n) {
        let class = BetaClass::of_ratio(u64::from(m), u64::from(n));
        for kind in PlacementKind::ALL {
            lines.push(LimitLine {
                placement: kind.as_str().to_string(),
                beta: beta_str(class).to_string(),
                kind: "estimate".to_string(),
                value: rc_finite_estimate(kind, m, n).to_string(),
            });
        }
    }
    lines
}
