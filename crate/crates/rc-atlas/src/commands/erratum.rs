//! `erratum`: the transcription audit of the published recursion system
//! against the enumeration oracle, as JSON and human-readable text.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use rc_core::erratum::{build_report, ErratumConfig, ErratumError, ErratumReport};
use rc_core::oracle::{OracleConfig, DEFAULT_EDGE_CAP};

use crate::commands::{CmdError, CmdResult};
use crate::row;

#[derive(Args, Debug)]
pub struct ErratumArgs {
    /// Largest edge count m*n enumerated for the comparison table.
    #[arg(long, default_value_t = 12)]
    pub max_mn: u32,
    /// Worker threads for the enumeration.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the text report here (default: stdout).
    #[arg(long)]
    pub text: Option<PathBuf>,
}

pub fn run(args: &ErratumArgs) -> CmdResult {
    let report = compute(args)?;
    if let Some(path) = &args.json {
        let f = File::create(path)
            .map_err(|e| CmdError::Failed(format!("cannot create {}: {e}", path.display())))?;
        row::write_json(&report, f).map_err(|e| CmdError::Failed(format!("write failed: {e}")))?;
    }
    let text = report.render_text();
    match &args.text {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| CmdError::Failed(format!("cannot create {}: {e}", path.display())))?;
            f.write_all(text.as_bytes())
                .map_err(|e| CmdError::Failed(format!("write failed: {e}")))?;
        }
        None => {
            // keep stdout quiet when the report was explicitly routed to JSON
            if args.json.is_none() {
                print!("{text}");
            }
        }
    }
    Ok(())
}

pub fn compute(args: &ErratumArgs) -> Result<ErratumReport, CmdError> {
    if args.max_mn > DEFAULT_EDGE_CAP {
        return Err(CmdError::Usage(format!(
            "--max-mn {} is over the enumeration cap {DEFAULT_EDGE_CAP}",
            args.max_mn
        )));
    }
    let cfg = ErratumConfig {
        max_mn: args.max_mn,
        oracle: OracleConfig { threads: args.threads, ..OracleConfig::default() },
    };
    build_report(&cfg).map_err(|e| match e {
        ErratumError::Oracle(o) => crate::commands::oracle::map_oracle_err(o),
        other => CmdError::Failed(other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_flags_only_the_transcribed_steps() {
        let args = ErratumArgs { max_mn: 8, threads: None, json: None, text: None };
        let report = compute(&args).unwrap();
        assert!(report.families.iter().all(|f| f.validated_mismatches == 0));
        let fy = report.families.iter().find(|f| f.family == "fy").unwrap();
        assert!(fy.transcribed_mismatches > 0);
    }

    #[test]
    fn oversize_request_is_a_usage_error() {
        let args = ErratumArgs { max_mn: 30, threads: None, json: None, text: None };
        assert_eq!(compute(&args).unwrap_err().exit_code(), 2);
    }
}
