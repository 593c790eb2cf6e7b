//! The atlas's one-row-per-result record and its CSV/JSON forms.
//!
//! The CSV header is fixed; exact methods fill the probability columns with
//! exact value strings ("num/2^e" or "num/den") and leave the CI columns
//! empty, Monte Carlo rows do the reverse, and interval-backend rows carry
//! midpoints with the rc enclosure in the ci columns. Rows for refused cells
//! use method "skipped" and put the reason in the rc column, so a sweep
//! never drops a cell silently.

use std::io::Write;

use num::BigRational;
use num::One;
use serde::Serialize;

use rc_core::mc::{McConfig, RcEstimate};
use rc_core::model::PlacementKind;
use rc_core::recur::RcEnclosure;
use rc_core::relcov::ExactRcResult;

pub const CSV_HEADER: &str =
    "m,n,placement,method,p,p_ac,p_bc,p_joint,covariance,rc,stderr,ci_low,ci_high,sign,trials,seed,runtime_ms";

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum Method {
    Oracle,
    Recursion,
    Mc,
    Asymptotic,
    Skipped,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::Recursion => "recursion",
            Method::Mc => "mc",
            Method::Asymptotic => "asymptotic",
            Method::Skipped => "skipped",
        }
    }
}

/// Formats a rational without the BigRational debug noise: integers plain,
/// otherwise "num/den".
pub fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasRow {
    pub m: u32,
    pub n: u32,
    pub placement: String,
    pub method: String,
    pub p: String,
    pub p_ac: String,
    pub p_bc: String,
    pub p_joint: String,
    pub covariance: String,
    pub rc: String,
    pub stderr: String,
    pub ci_low: String,
    pub ci_high: String,
    pub sign: String,
    pub trials: String,
    pub seed: String,
    pub runtime_ms: String,
}

impl AtlasRow {
    fn blank(m: u32, n: u32, kind: PlacementKind, method: Method) -> Self {
        AtlasRow {
            m,
            n,
            placement: kind.as_str().to_string(),
            method: method.as_str().to_string(),
            p: String::new(),
            p_ac: String::new(),
            p_bc: String::new(),
            p_joint: String::new(),
            covariance: String::new(),
            rc: String::new(),
            stderr: String::new(),
            ci_low: String::new(),
            ci_high: String::new(),
            sign: String::new(),
            trials: String::new(),
            seed: String::new(),
            runtime_ms: String::new(),
        }
    }

    pub fn from_exact(
        m: u32,
        n: u32,
        kind: PlacementKind,
        method: Method,
        p: &BigRational,
        r: &ExactRcResult,
        runtime_ms: u128,
    ) -> Self {
        AtlasRow {
            p: rational_str(p),
            p_ac: r.p_ac.to_string(),
            p_bc: r.p_bc.to_string(),
            p_joint: r.p_joint.to_string(),
            covariance: rational_str(&r.covariance),
            rc: rational_str(&r.rc),
            sign: r.sign.as_str().to_string(),
            runtime_ms: runtime_ms.to_string(),
            ..Self::blank(m, n, kind, method)
        }
    }

    /// Interval-backend recursion row: midpoints in the value columns, the
    /// rc enclosure in the ci columns, half-width in stderr.
    pub fn from_enclosure(m: u32, n: u32, kind: PlacementKind, enc: &RcEnclosure, runtime_ms: u128) -> Self {
        let mid = |iv: &rc_core::bigfloat::Interval| {
            let (lo, hi) = iv.to_f64s();
            (lo + hi) / 2.0
        };
        let (rc_str, stderr, ci_low, ci_high) = match &enc.rc {
            Some(rc) => {
                let (lo, hi) = rc.to_f64s();
                (
                    ((lo + hi) / 2.0).to_string(),
                    (rc.width() / 2.0).to_string(),
                    lo.to_string(),
                    hi.to_string(),
                )
            }
            None => (String::new(), String::new(), String::new(), String::new()),
        };
        let (cl, ch) = enc.covariance.to_f64s();
        AtlasRow {
            p: "1/2".to_string(),
            p_ac: mid(&enc.p_ac).to_string(),
            p_bc: mid(&enc.p_bc).to_string(),
            p_joint: mid(&enc.p_joint).to_string(),
            covariance: ((cl + ch) / 2.0).to_string(),
            rc: rc_str,
            stderr,
            ci_low,
            ci_high,
            sign: enc.verdict.as_str().to_string(),
            runtime_ms: runtime_ms.to_string(),
            ..Self::blank(m, n, kind, Method::Recursion)
        }
    }

    pub fn from_mc(
        m: u32,
        n: u32,
        kind: PlacementKind,
        cfg: &McConfig,
        est: &RcEstimate,
        runtime_ms: u128,
    ) -> Self {
        AtlasRow {
            p: rational_str(&cfg.p),
            p_ac: est.p_ac.mean.to_string(),
            p_bc: est.p_bc.mean.to_string(),
            p_joint: est.p_joint.mean.to_string(),
            covariance: est.covariance.mean.to_string(),
            rc: est.rc.map(|v| v.to_string()).unwrap_or_default(),
            stderr: est.covariance.stderr.to_string(),
            ci_low: est.covariance.ci_low.to_string(),
            ci_high: est.covariance.ci_high.to_string(),
            sign: est.sign_verdict.as_str().to_string(),
            trials: cfg.trials.to_string(),
            seed: cfg.seed.to_string(),
            runtime_ms: runtime_ms.to_string(),
            ..Self::blank(m, n, kind, Method::Mc)
        }
    }

    pub fn from_asymptotic(m: u32, n: u32, kind: PlacementKind, estimate: f64) -> Self {
        AtlasRow {
            p: "1/2".to_string(),
            rc: estimate.to_string(),
            ..Self::blank(m, n, kind, Method::Asymptotic)
        }
    }

    pub fn skipped(m: u32, n: u32, kind: PlacementKind, reason: &str) -> Self {
        AtlasRow { rc: reason.to_string(), ..Self::blank(m, n, kind, Method::Skipped) }
    }

    fn fields(&self) -> [&str; 17] {
        [
            // placeholder; m and n are numeric and formatted by the writer
            "", "",
            &self.placement,
            &self.method,
            &self.p,
            &self.p_ac,
            &self.p_bc,
            &self.p_joint,
            &self.covariance,
            &self.rc,
            &self.stderr,
            &self.ci_low,
            &self.ci_high,
            &self.sign,
            &self.trials,
            &self.seed,
            &self.runtime_ms,
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[AtlasRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        let m = row.m.to_string();
        let n = row.n.to_string();
        let mut rec = row.fields();
        rec[0] = &m;
        rec[1] = &n;
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonDoc<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

/// Wraps any serializable report body with the schema version tag.
pub fn write_json<W: Write, T: Serialize>(body: &T, out: W) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(out, &JsonDoc { schema_version: SCHEMA_VERSION, body })?;
    Ok(())
}

#[derive(Serialize)]
pub struct RowsBody<'a> {
    pub rows: &'a [AtlasRow],
}

pub fn write_rows_json<W: Write>(rows: &[AtlasRow], out: W) -> anyhow::Result<()> {
    write_json(&RowsBody { rows }, out)
}
