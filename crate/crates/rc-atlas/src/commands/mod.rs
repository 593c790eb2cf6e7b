//! Subcommand implementations behind the rc-atlas binary.
//!
//! Each module owns its clap argument struct and a `run` entry point, so the
//! binary is a thin dispatcher and the integration tests can drive the same
//! logic in-process. Errors carry the process exit code: usage problems exit
//! 2 (matching clap's own parse failures), verification failures exit 1, and
//! budget or feasibility refusals exit 3.

pub mod erratum;
pub mod limits;
pub mod mc;
pub mod oracle;
pub mod q2;
pub mod recur;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use num::{BigInt, BigRational, Zero};

use rc_core::model::{BetaClass, GraphShape, Placement, PlacementKind};

use crate::row::{self, AtlasRow};

#[derive(Debug)]
pub enum CmdError {
    /// Semantically invalid invocation.
    Usage(String),
    /// A computation or verification failed.
    Failed(String),
    /// A size, budget, or feasibility guard declined to run the computation.
    Refused(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Failed(_) => 1,
            CmdError::Refused(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Usage(m) | CmdError::Failed(m) | CmdError::Refused(m) => m,
        }
    }
}

pub type CmdResult = Result<(), CmdError>;

/// Placement selector shared by every subcommand that takes `--placement`.
#[derive(Clone, Copy, Debug, Eq, PartialEq, clap::ValueEnum)]
pub enum PlacementArg {
    AllX,
    Xxy,
    Xyx,
}

impl PlacementArg {
    pub fn kind(self) -> PlacementKind {
        match self {
            PlacementArg::AllX => PlacementKind::AllInX,
            PlacementArg::Xxy => PlacementKind::Xxy,
            PlacementArg::Xyx => PlacementKind::Xyx,
        }
    }
}

#[derive(Clone, Copy, Debug, Eq, PartialEq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `--format` / `--out` pair plus the row emitters.
#[derive(Clone, Debug, clap::Args)]
pub struct OutArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    pub fn writer(&self) -> Result<Box<dyn Write>, CmdError> {
        match &self.out {
            None => Ok(Box::new(io::stdout().lock())),
            Some(path) => {
                let f = File::create(path)
                    .map_err(|e| CmdError::Failed(format!("cannot create {}: {e}", path.display())))?;
                Ok(Box::new(f))
            }
        }
    }

    pub fn emit_rows(&self, rows: &[AtlasRow]) -> CmdResult {
        let w = self.writer()?;
        match self.format {
            Format::Csv => row::write_csv(rows, w),
            Format::Json => row::write_rows_json(rows, w),
        }
        .map_err(|e| CmdError::Failed(format!("write failed: {e}")))
    }
}

/// Parses "3/7" or "1" into an exact rational.
pub fn parse_ratio(s: &str) -> Result<BigRational, String> {
    let (num, den) = match s.split_once('/') {
        None => (s, "1"),
        Some(pair) => pair,
    };
    let num: BigInt = num.trim().parse().map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
    let den: BigInt = den.trim().parse().map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(num, den))
}

/// Parses "1/2" or "2" into a (numerator, denominator) pair of machine ints.
pub fn parse_u64_ratio(s: &str) -> Result<(u64, u64), String> {
    let (num, den) = match s.split_once('/') {
        None => (s, "1"),
        Some(pair) => pair,
    };
    let num: u64 = num.trim().parse().map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
    let den: u64 = den.trim().parse().map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
    if den == 0 {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok((num, den))
}

pub fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

pub fn beta_str(class: BetaClass) -> &'static str {
    match class {
        BetaClass::LessThanOne => "<1",
        BetaClass::EqualOne => "=1",
        BetaClass::GreaterThanOne => ">1",
    }
}

pub fn shape(m: u32, n: u32) -> Result<GraphShape, CmdError> {
    GraphShape::new(m, n).map_err(|e| CmdError::Usage(e.to_string()))
}

/// The placements a command should visit: the explicit one (validated for
/// this shape, a usage error if it does not fit) or all three, with the ones
/// that do not fit reported via the second tuple slot so callers can emit
/// skipped rows.
pub fn select_placements(
    shape: GraphShape,
    explicit: Option<PlacementArg>,
) -> Result<Vec<(PlacementKind, Option<String>)>, CmdError> {
    match explicit {
        Some(arg) => {
            let kind = arg.kind();
            Placement::new(kind, shape).map_err(|e| CmdError::Usage(e.to_string()))?;
            Ok(vec![(kind, None)])
        }
        None => Ok(PlacementKind::ALL
            .into_iter()
            .map(|kind| (kind, Placement::new(kind, shape).err().map(|e| e.to_string())))
            .collect()),
    }
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, u128) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed().as_millis())
}
