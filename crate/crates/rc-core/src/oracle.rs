//! Exhaustive enumeration oracle: exact event probabilities by iterating all
//! 2^(m*n) orientations.
//!
//! This is the ground truth the other engines are checked against, so the
//! design favours transparency plus one well-contained optimization: instead
//! of a reachability search per (source, target) pair, each orientation gets
//! one *backward* closure per distinct target (the set of vertices that reach
//! it), and every literal becomes a bit test. Orientations are decoded
//! straight into per-X-vertex u32 rows (the cap guarantees m, n <= 30).
//!
//! Counting is chunked with a fixed chunk size and the chunk tallies are
//! summed in chunk order, so results are bit-identical for any thread count.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::dyadic::{DyadicProb, ExactProb};
use crate::model::{AvoidanceEvent, GraphShape, ModelError, PlacementKind, Side, Vertex, placement_events};
use crate::relcov::{ExactRcResult, RcError, rc_from_probs};

/// Hard ceiling on m*n: 2^30 orientations is the most this engine will ever
/// enumerate, whatever the configuration asks for.
pub const EDGE_CEILING: u32 = 30;

/// Default m*n cap; beyond it the caller is told to use recursion or MC.
pub const DEFAULT_EDGE_CAP: u32 = 24;

const CHUNK_BITS: u32 = 16;

#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Refuse shapes with more than this many edges.
    pub max_edges: u32,
    /// Thread count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_edges: DEFAULT_EDGE_CAP, threads: None }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{shape} has {edges} edges, over the enumeration cap {cap}; use the recursion engine or Monte Carlo for this shape")]
    CapExceeded { shape: String, edges: u64, cap: u32 },
    #[error("enumeration cap {cap} exceeds the hard ceiling {EDGE_CEILING}")]
    CapAboveCeiling { cap: u32 },
    #[error("edge bias must lie in [0, 1], got {p}")]
    BiasOutOfRange { p: BigRational },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Rc(#[from] RcError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One reach-or-avoid requirement inside an [`EventSpec`].
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub struct Literal {
    pub source: Vertex,
    pub target: Vertex,
    pub want_reach: bool,
}

impl Literal {
    pub fn avoids(source: Vertex, target: Vertex) -> Self {
        Literal { source, target, want_reach: false }
    }

    pub fn reaches(source: Vertex, target: Vertex) -> Self {
        Literal { source, target, want_reach: true }
    }
}

/// Conjunction of reachability literals, with no arity cap.
///
/// This is the oracle's low-level event language; [`AvoidanceEvent`] maps to
/// the all-avoid special case. An empty conjunction is the sure event.
#[derive(Clone, Debug)]
pub struct EventSpec {
    literals: Vec<Literal>,
}

impl EventSpec {
    pub fn new(shape: GraphShape, literals: Vec<Literal>) -> Result<Self, ModelError> {
        for lit in &literals {
            for v in [lit.source, lit.target] {
                if !shape.contains(v) {
                    return Err(ModelError::VertexOutOfRange {
                        vertex: v.to_string(),
                        m: shape.m(),
                        n: shape.n(),
                    });
                }
            }
            if lit.source == lit.target {
                return Err(ModelError::SelfLoop { vertex: lit.source.to_string() });
            }
        }
        Ok(EventSpec { literals })
    }

    pub fn from_event(shape: GraphShape, event: &AvoidanceEvent) -> Result<Self, ModelError> {
        Self::new(shape, event.atoms().iter().map(|&(s, t)| Literal::avoids(s, t)).collect())
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }
}

fn check_cap(shape: GraphShape, cfg: &OracleConfig) -> Result<u32, OracleError> {
    if cfg.max_edges > EDGE_CEILING {
        return Err(OracleError::CapAboveCeiling { cap: cfg.max_edges });
    }
    let edges = shape.edges();
    if edges > cfg.max_edges as u64 {
        return Err(OracleError::CapExceeded {
            shape: shape.to_string(),
            edges,
            cap: cfg.max_edges,
        });
    }
    Ok(edges as u32)
}

fn run_in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, OracleError> {
    match threads {
        None => Ok(f()),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| OracleError::ThreadPool(e.to_string()))
            .map(|pool| pool.install(f)),
    }
}

// Compiled form of a literal: test one bit of one target's closure.
#[derive(Clone, Copy)]
struct CompiledLit {
    target_slot: usize,
    src_is_x: bool,
    src_bit: u32,
    want_reach: bool,
}

struct Compiled {
    targets: Vec<Vertex>,
    events: Vec<Vec<CompiledLit>>,
}

fn compile(events: &[EventSpec]) -> Compiled {
    let mut targets: Vec<Vertex> = Vec::new();
    let mut compiled = Vec::with_capacity(events.len());
    for spec in events {
        let lits = spec
            .literals
            .iter()
            .map(|lit| {
                let slot = targets.iter().position(|&t| t == lit.target).unwrap_or_else(|| {
                    targets.push(lit.target);
                    targets.len() - 1
                });
                CompiledLit {
                    target_slot: slot,
                    src_is_x: lit.source.side == Side::X,
                    src_bit: 1u32 << lit.source.index,
                    want_reach: lit.want_reach,
                }
            })
            .collect();
        compiled.push(lits);
    }
    Compiled { targets, events: compiled }
}

/// Set of vertices (as X and Y bit masks) that reach `target` under the
/// orientation given by `rows`; includes the target itself.
#[inline]
fn backward_closure(rows: &[u32], n_mask: u32, target: Vertex) -> (u32, u32) {
    let (mut bx, mut by) = match target.side {
        Side::X => (1u32 << target.index, 0u32),
        Side::Y => (0u32, 1u32 << target.index),
    };
    loop {
        // X_i reaches the set if it has an outgoing edge into by.
        let mut bx2 = bx;
        for (i, &row) in rows.iter().enumerate() {
            if row & by != 0 {
                bx2 |= 1u32 << i;
            }
        }
        // Y_j reaches the set if some X_i in bx2 has the edge pointing Y -> X.
        let mut by2 = by;
        let mut rem = bx2;
        while rem != 0 {
            let i = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            by2 |= !rows[i] & n_mask;
        }
        if bx2 == bx && by2 == by {
            return (bx, by);
        }
        bx = bx2;
        by = by2;
    }
}

struct Tally {
    counts: Vec<u64>,
    // hists[e][w]: orientations with w edges directed X -> Y satisfying event e.
    hists: Option<Vec<Vec<u64>>>,
}

fn tally_range(
    shape: GraphShape,
    compiled: &Compiled,
    start: u64,
    end: u64,
    want_hist: bool,
) -> Tally {
    let m = shape.m() as usize;
    let n = shape.n() as u64;
    let edges = shape.edges() as usize;
    let n_mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut counts = vec![0u64; compiled.events.len()];
    let mut hists = if want_hist {
        Some(vec![vec![0u64; edges + 1]; compiled.events.len()])
    } else {
        None
    };
    let mut rows = [0u32; 32];
    let mut closures = vec![(0u32, 0u32); compiled.targets.len()];
    for idx in start..end {
        for (i, row) in rows[..m].iter_mut().enumerate() {
            *row = (idx >> (i as u64 * n)) as u32 & n_mask;
        }
        for (slot, &t) in compiled.targets.iter().enumerate() {
            closures[slot] = backward_closure(&rows[..m], n_mask, t);
        }
        let weight = if want_hist {
            rows[..m].iter().map(|r| r.count_ones()).sum::<u32>() as usize
        } else {
            0
        };
        for (e, lits) in compiled.events.iter().enumerate() {
            let holds = lits.iter().all(|lit| {
                let (bx, by) = closures[lit.target_slot];
                let reached = if lit.src_is_x { bx & lit.src_bit != 0 } else { by & lit.src_bit != 0 };
                reached == lit.want_reach
            });
            if holds {
                counts[e] += 1;
                if let Some(h) = hists.as_mut() {
                    h[e][weight] += 1;
                }
            }
        }
    }
    Tally { counts, hists }
}

fn enumerate(
    shape: GraphShape,
    events: &[EventSpec],
    cfg: &OracleConfig,
    want_hist: bool,
) -> Result<Tally, OracleError> {
    let edges = check_cap(shape, cfg)?;
    let compiled = compile(events);
    let total = 1u64 << edges;
    let chunk = 1u64 << CHUNK_BITS.min(edges);
    let chunks = total / chunk;
    let tallies: Vec<Tally> = run_in_pool(cfg.threads, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| tally_range(shape, &compiled, c * chunk, (c + 1) * chunk, want_hist))
            .collect()
    })?;
    let mut acc = Tally {
        counts: vec![0; events.len()],
        hists: want_hist.then(|| vec![vec![0u64; edges as usize + 1]; events.len()]),
    };
    for t in tallies {
        for (a, b) in acc.counts.iter_mut().zip(&t.counts) {
            *a += b;
        }
        if let (Some(ah), Some(bh)) = (acc.hists.as_mut(), t.hists.as_ref()) {
            for (av, bv) in ah.iter_mut().zip(bh) {
                for (a, b) in av.iter_mut().zip(bv) {
                    *a += b;
                }
            }
        }
    }
    Ok(acc)
}

/// Counts, for each event, the orientations satisfying it.
pub fn count_events(
    shape: GraphShape,
    events: &[EventSpec],
    cfg: &OracleConfig,
) -> Result<Vec<u64>, OracleError> {
    Ok(enumerate(shape, events, cfg, false)?.counts)
}

/// Like [`count_events`], split by the number of edges directed X -> Y
/// (index w of each inner vector, w in 0..=m*n).
pub fn count_events_by_weight(
    shape: GraphShape,
    events: &[EventSpec],
    cfg: &OracleConfig,
) -> Result<Vec<Vec<u64>>, OracleError> {
    Ok(enumerate(shape, events, cfg, true)?.hists.unwrap())
}

/// Exact probability of an avoidance event under uniform edge directions.
pub fn exact_prob(
    shape: GraphShape,
    event: &AvoidanceEvent,
    cfg: &OracleConfig,
) -> Result<DyadicProb, OracleError> {
    let spec = EventSpec::from_event(shape, event)?;
    let counts = count_events(shape, &[spec], cfg)?;
    let p = DyadicProb::from_count(counts[0], shape.edges() as u32);
    debug_assert!(p.is_probability());
    Ok(p)
}

fn check_bias(p: &BigRational) -> Result<(), OracleError> {
    if p.is_negative() || *p > BigRational::one() {
        return Err(OracleError::BiasOutOfRange { p: p.clone() });
    }
    Ok(())
}

/// Turns per-weight counts into a probability under edge bias p.
fn weighted_prob(hist: &[u64], p: &BigRational) -> BigRational {
    let edges = hist.len() - 1;
    let q = BigRational::one() - p;
    // powers without division, so p = 0 and p = 1 need no special casing
    let mut p_pows = Vec::with_capacity(edges + 1);
    let mut q_pows = Vec::with_capacity(edges + 1);
    let mut acc_p = BigRational::one();
    let mut acc_q = BigRational::one();
    for _ in 0..=edges {
        p_pows.push(acc_p.clone());
        q_pows.push(acc_q.clone());
        acc_p *= p;
        acc_q *= &q;
    }
    let mut total = BigRational::zero();
    for (w, &c) in hist.iter().enumerate() {
        if c != 0 {
            total += BigRational::from(BigInt::from(c)) * &p_pows[w] * &q_pows[edges - w];
        }
    }
    total
}

/// Exact probability of an avoidance event when each edge independently
/// points X -> Y with probability `p`.
pub fn exact_prob_biased(
    shape: GraphShape,
    event: &AvoidanceEvent,
    p: &BigRational,
    cfg: &OracleConfig,
) -> Result<BigRational, OracleError> {
    check_bias(p)?;
    let spec = EventSpec::from_event(shape, event)?;
    let hists = count_events_by_weight(shape, &[spec], cfg)?;
    Ok(weighted_prob(&hists[0], p))
}

/// Relative covariance of the two avoidance events of a placement, by
/// exhaustive enumeration. `p = None` means uniform edge directions (dyadic
/// probabilities); `Some(p)` reweights by edge bias p.
///
/// When the joint probability is 0 (possible only at degenerate bias, where a
/// marginal is 0 too) the 0/0 ratio is taken as 0, giving rc = 1.
pub fn exact_rc(
    shape: GraphShape,
    kind: PlacementKind,
    p: Option<&BigRational>,
    cfg: &OracleConfig,
) -> Result<ExactRcResult, OracleError> {
    let (ac, bc, joint) = placement_events(shape, kind)?;
    let specs = [
        EventSpec::from_event(shape, &ac)?,
        EventSpec::from_event(shape, &bc)?,
        EventSpec::from_event(shape, &joint)?,
    ];
    let edges = shape.edges() as u32;
    let (p_ac, p_bc, p_joint) = match p {
        None => {
            let counts = count_events(shape, &specs, cfg)?;
            (
                ExactProb::Dyadic(DyadicProb::from_count(counts[0], edges)),
                ExactProb::Dyadic(DyadicProb::from_count(counts[1], edges)),
                ExactProb::Dyadic(DyadicProb::from_count(counts[2], edges)),
            )
        }
        Some(p) => {
            check_bias(p)?;
            let hists = count_events_by_weight(shape, &specs, cfg)?;
            (
                ExactProb::Rational(weighted_prob(&hists[0], p)),
                ExactProb::Rational(weighted_prob(&hists[1], p)),
                ExactProb::Rational(weighted_prob(&hists[2], p)),
            )
        }
    };
    Ok(rc_from_probs(p_ac, p_bc, p_joint)?)
}
