//! Regenerates the exact-value golden files under `golden/` at the workspace
//! root. Everything written here is deterministic: enumeration counts,
//! recursion values in both transcription modes, convergence sequences, the
//! n = 2^m sign probe, and the published-text audit. Run it after any change
//! to the engines and review the diff.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use rc_atlas::commands::{sweep, q2, erratum, Format, OutArgs, PlacementArg};
use rc_atlas::row;
use rc_core::model::{GraphShape, Placement, PlacementKind};
use rc_core::recur::{recur_eval, Backend, Evaluator, Family, MemoKey, Mode};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join("golden")
}

fn out_args() -> OutArgs {
    OutArgs { format: Format::Csv, out: None }
}

/// Every in-bounds recursion key with m*n <= cap, evaluated in both modes.
fn write_recur_values(dir: &Path, cap: u32) {
    let mut f = File::create(dir.join("recur_values.csv")).unwrap();
    writeln!(f, "family,m,n,size,validated,transcribed").unwrap();
    for m in 1..=cap {
        for n in 1..=(cap / m) {
            for family in Family::ALL {
                for size in 0..=cap {
                    let key = MemoKey::new(family, m, n, size);
                    if Evaluator::validate_key(key).is_err() {
                        continue;
                    }
                    let v = recur_eval(key, Mode::Validated, Backend::ExactDyadic).unwrap();
                    let t = recur_eval(key, Mode::AsPrinted, Backend::ExactDyadic).unwrap();
                    writeln!(
                        f,
                        "{},{m},{n},{size},{},{}",
                        family.as_str(),
                        v.exact.unwrap(),
                        t.exact.unwrap()
                    )
                    .unwrap();
                }
            }
        }
    }
}

/// Exact relative covariance rows for every placement on every small shape.
fn write_rc_small(dir: &Path, cap: u32) {
    let mut rows = Vec::new();
    for m in 1..=cap {
        for n in 1..=(cap / m) {
            let shape = GraphShape::new(m, n).unwrap();
            let mut ev = Evaluator::new(Default::default());
            for kind in PlacementKind::ALL {
                if Placement::new(kind, shape).is_err() {
                    continue;
                }
                let r = ev.rc_recursion(m, n, kind).unwrap();
                rows.push(row::AtlasRow::from_exact(
                    m,
                    n,
                    kind,
                    row::Method::Recursion,
                    &num::BigRational::new(1.into(), 2.into()),
                    &r,
                    0,
                ));
            }
        }
    }
    // runtimes vary run to run; zero them so the file stays diffable
    let f = File::create(dir.join("rc_small.csv")).unwrap();
    row::write_csv(&rows, f).unwrap();
}

fn flatten_cells(f: &mut File, cells: &[sweep::ConvergenceCell]) {
    for c in cells {
        for p in &c.points {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{},{}",
                c.placement,
                c.beta,
                c.beta_class,
                p.m,
                p.n,
                p.rc_exact.clone().unwrap_or_default(),
                p.rc_exact_f64.map(|v| v.to_string()).unwrap_or_default(),
                p.rc_estimate,
                c.printed_limit,
                c.flagged
            )
            .unwrap();
        }
    }
}

/// The balanced sweep behind the finite-size convergence gate and the
/// beta = 1/2 sweep whose xyx cell carries the divergence flag.
fn write_convergence(dir: &Path) {
    let mut f = File::create(dir.join("convergence.csv")).unwrap();
    writeln!(f, "placement,beta,beta_class,m,n,rc_exact,rc_exact_f64,rc_estimate,printed_limit,flagged").unwrap();

    let balanced = sweep::SweepArgs {
        rule: sweep::RuleArg::Beta,
        beta: Some((1, 1)),
        n_list: vec![8, 12, 16, 20, 24],
        m_list: vec![],
        pairs: vec![],
        placement: None,
        state_budget: None,
        out: out_args(),
    };
    let outcome = sweep::compute(&balanced).unwrap();
    flatten_cells(&mut f, &outcome.convergence);
    report_margins("beta=1", &outcome.convergence);

    let halved = sweep::SweepArgs {
        rule: sweep::RuleArg::Beta,
        beta: Some((1, 2)),
        n_list: vec![8, 12, 16],
        m_list: vec![],
        pairs: vec![],
        placement: Some(PlacementArg::Xyx),
        state_budget: None,
        out: out_args(),
    };
    let outcome = sweep::compute(&halved).unwrap();
    flatten_cells(&mut f, &outcome.convergence);
    report_margins("beta=1/2 xyx", &outcome.convergence);
}

/// Prints the observed distances so the acceptance tolerances can be pinned
/// against this file.
fn report_margins(label: &str, cells: &[sweep::ConvergenceCell]) {
    for c in cells {
        let dists: Vec<String> = c
            .points
            .iter()
            .map(|p| p.distance_to_limit.map(|d| format!("{d:.6}")).unwrap_or_default())
            .collect();
        println!(
            "margins [{label}] {}: limit {} distances [{}] flagged={}",
            c.placement,
            c.printed_limit,
            dists.join(", "),
            c.flagged
        );
    }
}

/// Sign probe rows for m = 2..=9 (exact throughout; m = 10 would overrun the
/// default state budget).
fn write_q2(dir: &Path) {
    let args = q2::Q2Args {
        m_min: 2,
        m_max: 9,
        backend: rc_atlas::commands::recur::BackendArg::Exact,
        state_budget: None,
        max_mn: None,
        threads: None,
        out: out_args(),
    };
    let rows = q2::compute(&args).unwrap();
    let mut f = File::create(dir.join("q2_signs.csv")).unwrap();
    writeln!(f, "m,n,placement,method,rc,sign").unwrap();
    for r in &rows {
        writeln!(f, "{},{},{},{},{},{}", r.m, r.n, r.placement, r.method, r.rc, r.sign).unwrap();
        println!("q2 shape ({},{}): rc {} sign {} ({})", r.m, r.n, r.rc, r.sign, r.method);
    }
}

fn write_erratum(dir: &Path) {
    let args = erratum::ErratumArgs { max_mn: 12, threads: None, json: None, text: None };
    let report = erratum::compute(&args).unwrap();
    let f = File::create(dir.join("erratum_report.json")).unwrap();
    row::write_json(&report, f).unwrap();
    fs::write(dir.join("erratum_report.txt"), report.render_text()).unwrap();
}

fn main() {
    let dir = golden_dir();
    fs::create_dir_all(&dir).unwrap();
    write_recur_values(&dir, 12);
    write_rc_small(&dir, 12);
    write_convergence(&dir);
    write_q2(&dir);
    write_erratum(&dir);
    println!("golden files regenerated in {}", dir.display());
}
