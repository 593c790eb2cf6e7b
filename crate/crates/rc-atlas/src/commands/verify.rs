//! `verify`: the repository's consistency gate.
//!
//! Runs every cross-method check in one pass: oracle vs recursion on whole
//! relative covariances and on each family's defining event, the exhaustive
//! structural properties (complement, reversal, relabeling, reachability
//! positive association, forced third avoidance), and Monte Carlo spot
//! checks. One line per check; any failure exits nonzero.

use clap::Args;

use rc_core::erratum::defining_event;
use rc_core::mc::{self, McConfig};
use rc_core::model::{AvoidanceEvent, GraphShape, Placement, PlacementKind, Vertex};
use rc_core::oracle::{self, EventSpec, Literal, OracleConfig, DEFAULT_EDGE_CAP};
use rc_core::recur::{EvalConfig, Evaluator, Family, MemoKey};

use crate::commands::{CmdError, CmdResult};

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Largest edge count m*n for the oracle-equality gates.
    #[arg(long, default_value_t = 16)]
    pub max_mn: u32,
    /// Monte Carlo trials for the spot checks.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Monte Carlo seed for the spot checks.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for the enumeration.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Outcome of one named check.
#[derive(Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn to_check(name: &'static str, r: Result<String, String>) -> Check {
    match r {
        Ok(detail) => Check { name, passed: true, detail },
        Err(detail) => Check { name, passed: false, detail },
    }
}

pub fn run(args: &VerifyArgs) -> CmdResult {
    let checks = run_all(args)?;
    let mut failures = 0;
    for c in &checks {
        println!("{} {} - {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        if !c.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("verify: all {} checks passed", checks.len());
        Ok(())
    } else {
        Err(CmdError::Failed(format!("verify: {failures} of {} checks failed", checks.len())))
    }
}

pub fn run_all(args: &VerifyArgs) -> Result<Vec<Check>, CmdError> {
    if args.max_mn > DEFAULT_EDGE_CAP {
        return Err(CmdError::Usage(format!(
            "--max-mn {} is over the enumeration cap {DEFAULT_EDGE_CAP}",
            args.max_mn
        )));
    }
    let cfg = OracleConfig { threads: args.threads, ..OracleConfig::default() };
    let prop_mn = args.max_mn.min(12);
    let relabel_mn = args.max_mn.min(9);
    Ok(vec![
        to_check("rc-consistency", rc_consistency(args.max_mn, &cfg)),
        to_check("family-events", family_events(args.max_mn, &cfg)),
        to_check("complement", complement(prop_mn, &cfg)),
        to_check("reversal", reversal(prop_mn, &cfg)),
        to_check("relabeling", relabeling(relabel_mn, &cfg)),
        to_check("positive-association", positive_association(prop_mn, &cfg)),
        to_check("forced-third", forced_third(prop_mn, &cfg)),
        to_check("mc-spot", mc_spot(args.trials, args.seed, &cfg)),
    ])
}

/// All shapes with m*n <= max_mn, both classes non-empty.
fn shapes_up_to(max_mn: u32) -> Vec<GraphShape> {
    let mut out = Vec::new();
    for m in 1..=max_mn {
        for n in 1..=(max_mn / m) {
            out.push(GraphShape::new(m, n).unwrap());
        }
    }
    out
}

fn binom(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * u64::from(n - i) / u64::from(i + 1);
    }
    acc
}

/// exact_rc == rc_recursion on every placement of every shape.
pub fn rc_consistency(max_mn: u32, cfg: &OracleConfig) -> Result<String, String> {
    let mut cells = 0u32;
    let mut bad = Vec::new();
    for shape in shapes_up_to(max_mn) {
        let mut ev = Evaluator::new(EvalConfig::default());
        for kind in PlacementKind::ALL {
            if Placement::new(kind, shape).is_err() {
                continue;
            }
            let o = oracle::exact_rc(shape, kind, None, cfg).map_err(|e| e.to_string())?;
            let r = ev.rc_recursion(shape.m(), shape.n(), kind).map_err(|e| e.to_string())?;
            if o != r {
                bad.push(format!("({},{}) {}", shape.m(), shape.n(), kind.as_str()));
            }
            cells += 1;
        }
    }
    if bad.is_empty() {
        Ok(format!("{cells} placement cells agree exactly"))
    } else {
        Err(format!("{} of {cells} cells disagree: {}", bad.len(), bad.join(", ")))
    }
}

/// Every in-bounds recursion key equals the oracle probability of its
/// defining event.
pub fn family_events(max_mn: u32, cfg: &OracleConfig) -> Result<String, String> {
    let mut keys = 0u32;
    let mut bad = Vec::new();
    for shape in shapes_up_to(max_mn) {
        let (m, n) = (shape.m(), shape.n());
        let mut batch = Vec::new();
        for family in Family::ALL {
            for size in 1..=max_mn {
                let key = MemoKey::new(family, m, n, size);
                if Evaluator::validate_key(key).is_err() {
                    continue;
                }
                let spec = defining_event(family, shape, size).map_err(|e| e.to_string())?;
                batch.push((key, spec));
            }
        }
        if batch.is_empty() {
            continue;
        }
        let specs: Vec<EventSpec> = batch.iter().map(|(_, s)| s.clone()).collect();
        let counts = oracle::count_events(shape, &specs, cfg).map_err(|e| e.to_string())?;
        let mut ev = Evaluator::new(EvalConfig::default());
        for ((key, _), count) in batch.iter().zip(counts) {
            let expected = rc_core::dyadic::DyadicProb::from_count(count, shape.edges() as u32);
            let got = ev
                .eval(*key, rc_core::recur::Backend::ExactDyadic)
                .map_err(|e| e.to_string())?
                .exact
                .unwrap();
            if got != expected {
                bad.push(key.to_string());
            }
            keys += 1;
        }
    }
    if bad.is_empty() {
        Ok(format!("{keys} recursion keys match their defining-event probabilities"))
    } else {
        Err(format!("{} of {keys} keys disagree: {}", bad.len(), bad.join(", ")))
    }
}

/// Per edge-weight class: orientations satisfying an avoidance plus those
/// satisfying the matching reach equal the binomial total, so the complement
/// identity holds at every edge bias at once.
pub fn complement(max_mn: u32, cfg: &OracleConfig) -> Result<String, String> {
    let mut pairs = 0u32;
    for shape in shapes_up_to(max_mn) {
        let (m, n) = (shape.m(), shape.n());
        let edges = shape.edges() as u32;
        let mut sources = vec![(Vertex::y(0), Vertex::x(0))];
        if m >= 2 {
            sources.push((Vertex::x(1), Vertex::x(0)));
        }
        if n >= 2 {
            sources.push((Vertex::x(0), Vertex::y(1)));
        }
        for (src, dst) in sources {
            let specs = [
                EventSpec::new(shape, vec![Literal::avoids(src, dst)]).map_err(|e| e.to_string())?,
                EventSpec::new(shape, vec![Literal::reaches(src, dst)]).map_err(|e| e.to_string())?,
            ];
            let hists = oracle::count_events_by_weight(shape, &specs, cfg).map_err(|e| e.to_string())?;
            for w in 0..=edges {
                let total = hists[0][w as usize] + hists[1][w as usize];
                if total != binom(edges, w) {
                    return Err(format!(
                        "complement broken at ({m},{n}) {src}->{dst}, weight {w}: {total} != C({edges},{w})"
                    ));
                }
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} avoid/reach pairs partition every weight class"))
}

/// Edge reversal pairs weight w with mn - w, so per-weight histograms of an
/// event and its arrow-reversed image must mirror; the same identity under
/// the class swap covers the p <-> 1-p symmetry across shapes.
pub fn reversal(max_mn: u32, cfg: &OracleConfig) -> Result<String, String> {
    let mut checks = 0u32;
    for shape in shapes_up_to(max_mn) {
        let (m, n) = (shape.m(), shape.n());
        let edges = shape.edges() as usize;
        if m >= 2 {
            let specs = [
                EventSpec::new(shape, vec![Literal::avoids(Vertex::x(1), Vertex::x(0))])
                    .map_err(|e| e.to_string())?,
                EventSpec::new(shape, vec![Literal::avoids(Vertex::x(0), Vertex::x(1))])
                    .map_err(|e| e.to_string())?,
            ];
            let hists = oracle::count_events_by_weight(shape, &specs, cfg).map_err(|e| e.to_string())?;
            for w in 0..=edges {
                if hists[0][w] != hists[1][edges - w] {
                    return Err(format!("in-class reversal broken at ({m},{n}), weight {w}"));
                }
            }
            checks += 1;
        }
        // class swap: avoid(Y0 -> X0) on (m, n) against avoid(X0 -> Y0) on
        // (n, m), weights mirrored
        let swapped = GraphShape::new(n, m).unwrap();
        let a = oracle::count_events_by_weight(
            shape,
            &[EventSpec::new(shape, vec![Literal::avoids(Vertex::y(0), Vertex::x(0))])
                .map_err(|e| e.to_string())?],
            cfg,
        )
        .map_err(|e| e.to_string())?;
        let b = oracle::count_events_by_weight(
            swapped,
            &[EventSpec::new(swapped, vec![Literal::avoids(Vertex::x(0), Vertex::y(0))])
                .map_err(|e| e.to_string())?],
            cfg,
        )
        .map_err(|e| e.to_string())?;
        for w in 0..=edges {
            if a[0][w] != b[0][edges - w] {
                return Err(format!("class-swap reversal broken at ({m},{n}), weight {w}"));
            }
        }
        checks += 1;
    }
    Ok(format!("{checks} histogram mirror checks passed"))
}

/// Counts are invariant under any relabeling of the vertex indices: all
/// ordered pairs agree, and all ordered triples of the chain event agree.
pub fn relabeling(max_mn: u32, cfg: &OracleConfig) -> Result<String, String> {
    let mut groups = 0u32;
    for shape in shapes_up_to(max_mn) {
        let (m, n) = (shape.m(), shape.n());
        let mut expect_equal: Vec<Vec<EventSpec>> = Vec::new();

        if m >= 2 {
            let mut specs = Vec::new();
            for a in 0..m {
                for b in 0..m {
                    if a != b {
                        specs.push(
                            EventSpec::new(shape, vec![Literal::avoids(Vertex::x(a), Vertex::x(b))])
                                .map_err(|e| e.to_string())?,
                        );
                    }
                }
            }
            expect_equal.push(specs);
        }
        {
            let mut specs = Vec::new();
            for j in 0..n {
                for i in 0..m {
                    specs.push(
                        EventSpec::new(shape, vec![Literal::avoids(Vertex::y(j), Vertex::x(i))])
                            .map_err(|e| e.to_string())?,
                    );
                }
            }
            expect_equal.push(specs);
        }
        if m >= 3 {
            let mut specs = Vec::new();
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        if a != b && b != c && a != c {
                            specs.push(
                                EventSpec::new(
                                    shape,
                                    vec![
                                        Literal::avoids(Vertex::x(a), Vertex::x(b)),
                                        Literal::avoids(Vertex::x(b), Vertex::x(c)),
                                    ],
                                )
                                .map_err(|e| e.to_string())?,
                            );
                        }
                    }
                }
            }
            expect_equal.push(specs);
        }

        for specs in expect_equal {
            let counts = oracle::count_events(shape, &specs, cfg).map_err(|e| e.to_string())?;
            if counts.windows(2).any(|w| w[0] != w[1]) {
                return Err(format!("relabeling broke a count group at ({m},{n}): {counts:?}"));
            }
            groups += 1;
        }
    }
    Ok(format!("{groups} relabeling orbits have uniform counts"))
}

/// Reachability events from a common source are positively associated:
/// P(x -> y and x -> z) >= P(x -> y) P(x -> z), checked as an integer
/// cross-multiplication over one source/target-pair per symmetry orbit.
pub fn positive_association(max_mn: u32, cfg: &OracleConfig) -> Result<String, String> {
    let mut triples = 0u32;
    for shape in shapes_up_to(max_mn) {
        let (m, n) = (shape.m(), shape.n());
        let mut combos: Vec<(Vertex, Vertex, Vertex)> = Vec::new();
        if m >= 3 {
            combos.push((Vertex::x(0), Vertex::x(1), Vertex::x(2)));
        }
        if m >= 2 {
            combos.push((Vertex::x(0), Vertex::x(1), Vertex::y(0)));
            combos.push((Vertex::y(0), Vertex::x(0), Vertex::x(1)));
        }
        if n >= 2 {
            combos.push((Vertex::x(0), Vertex::y(0), Vertex::y(1)));
            if m >= 2 {
                combos.push((Vertex::y(0), Vertex::y(1), Vertex::x(1)));
            }
        }
        if n >= 3 {
            combos.push((Vertex::y(0), Vertex::y(1), Vertex::y(2)));
        }
        for (src, t1, t2) in combos {
            let specs = [
                EventSpec::new(shape, vec![Literal::reaches(src, t1)]).map_err(|e| e.to_string())?,
                EventSpec::new(shape, vec![Literal::reaches(src, t2)]).map_err(|e| e.to_string())?,
                EventSpec::new(shape, vec![Literal::reaches(src, t1), Literal::reaches(src, t2)])
                    .map_err(|e| e.to_string())?,
            ];
            let counts = oracle::count_events(shape, &specs, cfg).map_err(|e| e.to_string())?;
            let total = 1u128 << shape.edges();
            if u128::from(counts[2]) * total < u128::from(counts[0]) * u128::from(counts[1]) {
                return Err(format!(
                    "association inequality broken at ({m},{n}) src {src}, targets {t1},{t2}"
                ));
            }
            triples += 1;
        }
    }
    Ok(format!("{triples} source/target-pair orbits satisfy the product bound"))
}

/// Two chained avoidances force the third: no orientation satisfies
/// {c avoids b}, {b avoids a} and still reaches c -> a, in any of the three
/// source-class patterns.
pub fn forced_third(max_mn: u32, cfg: &OracleConfig) -> Result<String, String> {
    let mut patterns = 0u32;
    for shape in shapes_up_to(max_mn) {
        let (m, n) = (shape.m(), shape.n());
        let mut specs = Vec::new();
        if m >= 3 {
            specs.push(EventSpec::new(
                shape,
                vec![
                    Literal::avoids(Vertex::x(2), Vertex::x(1)),
                    Literal::avoids(Vertex::x(1), Vertex::x(0)),
                    Literal::reaches(Vertex::x(2), Vertex::x(0)),
                ],
            ));
        }
        if m >= 2 {
            specs.push(EventSpec::new(
                shape,
                vec![
                    Literal::avoids(Vertex::y(0), Vertex::x(1)),
                    Literal::avoids(Vertex::x(1), Vertex::x(0)),
                    Literal::reaches(Vertex::y(0), Vertex::x(0)),
                ],
            ));
            specs.push(EventSpec::new(
                shape,
                vec![
                    Literal::avoids(Vertex::x(1), Vertex::y(0)),
                    Literal::avoids(Vertex::y(0), Vertex::x(0)),
                    Literal::reaches(Vertex::x(1), Vertex::x(0)),
                ],
            ));
        }
        let specs: Vec<EventSpec> = specs
            .into_iter()
            .collect::<Result<_, _>>()
            .map_err(|e: rc_core::model::ModelError| e.to_string())?;
        if specs.is_empty() {
            continue;
        }
        let counts = oracle::count_events(shape, &specs, cfg).map_err(|e| e.to_string())?;
        if counts.iter().any(|&c| c != 0) {
            return Err(format!("violating orientations exist at ({m},{n}): counts {counts:?}"));
        }
        patterns += counts.len() as u32;
    }
    Ok(format!("{patterns} chained-avoidance patterns have zero violations"))
}

/// Monte Carlo means land within 4 standard errors of the oracle values.
pub fn mc_spot(trials: u64, seed: u64, cfg: &OracleConfig) -> Result<String, String> {
    let mut lines = Vec::new();

    let k22 = GraphShape::new(2, 2).unwrap();
    let event = AvoidanceEvent::new(k22, vec![(Vertex::x(1), Vertex::x(0))]).map_err(|e| e.to_string())?;
    let mc_cfg = McConfig::new(trials, seed);
    let est = mc::estimate_event(k22, &event, &mc_cfg).map_err(|e| e.to_string())?;
    let truth = 9.0 / 16.0;
    if (est.mean - truth).abs() > 4.0 * est.stderr {
        return Err(format!(
            "K22 avoidance: mean {} vs oracle {truth}, over 4 x stderr {}",
            est.mean, est.stderr
        ));
    }
    lines.push(format!("K22 within {:.2} stderr", (est.mean - truth).abs() / est.stderr.max(1e-300)));

    let k44 = GraphShape::new(4, 4).unwrap();
    let exact = oracle::exact_rc(k44, PlacementKind::Xxy, None, cfg).map_err(|e| e.to_string())?;
    let est = mc::estimate_rc(k44, PlacementKind::Xxy, &mc_cfg).map_err(|e| e.to_string())?;
    for (name, got, want) in [
        ("pAc", &est.p_ac, exact.p_ac.to_f64()),
        ("pBc", &est.p_bc, exact.p_bc.to_f64()),
        ("pJoint", &est.p_joint, exact.p_joint.to_f64()),
    ] {
        if (got.mean - want).abs() > 4.0 * got.stderr {
            return Err(format!(
                "K44 xxy {name}: mean {} vs oracle {want}, over 4 x stderr {}",
                got.mean, got.stderr
            ));
        }
    }
    lines.push("K44 xxy triple within 4 stderr".to_string());
    Ok(lines.join("; "))
}
