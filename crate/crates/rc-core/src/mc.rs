//! Seeded, batched Monte Carlo estimation of avoidance probabilities,
//! covariance, and relative covariance, plus a rare-event feasibility
//! advisor.
//!
//! Reproducibility contract: trials are split into fixed-size batches, batch
//! b draws from a counter-style generator (ChaCha8) keyed by the user seed
//! with stream index b, and every trial consumes a fixed number of words.
//! Batch tallies are merged in batch order, so results are bit-identical for
//! a given (seed, batch_size, trials, p) no matter how many workers run or
//! how they are scheduled.
//!
//! Confidence intervals are 95% Wilson for single probabilities. The
//! covariance is a nonlinear functional, so its interval uses batch means
//! when at least 30 batches are available; with fewer batches the estimator
//! falls back to a conservative interval assembled from the Wilson bounds
//! and flags it as [`CiMethod::Binomial`].
//!
//! There is no rare-event machinery here on purpose: [`feasibility`] says
//! up front when plain sampling cannot reach a target accuracy, instead of
//! pretending otherwise.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::asymptotic::{lemma_estimate, placement_lemmas};
use crate::model::{AvoidanceEvent, GraphShape, ModelError, Placement, PlacementKind, Side, Vertex};
use crate::relcov::SignVerdict;

/// 97.5% normal quantile: two-sided 95% intervals.
pub const Z95: f64 = 1.959963984540054;

pub const DEFAULT_BATCH_SIZE: u64 = 1 << 16;
pub const DEFAULT_TRIAL_BUDGET: u64 = 1_000_000_000;

#[derive(Clone, Debug)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub batch_size: u64,
    /// Probability that an edge is directed X -> Y.
    pub p: BigRational,
    /// None runs batches sequentially; Some(k) uses a k-worker pool.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig {
            trials,
            seed,
            batch_size: DEFAULT_BATCH_SIZE,
            p: BigRational::new(BigInt::from(1), BigInt::from(2)),
            threads: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum McError {
    #[error("at least one trial is required")]
    ZeroTrials,
    #[error("batch size must be at least 1")]
    ZeroBatch,
    #[error("edge bias {p} outside [0, 1]")]
    BiasOutOfRange { p: BigRational },
    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, Eq, PartialEq, Serialize)]
pub enum CiMethod {
    Binomial,
    BatchMeans,
}

/// A point estimate with a 95% confidence interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub method: CiMethod,
}

/// The full Monte Carlo picture for one placement, every component computed
/// from the same sample stream.
#[derive(Clone, Debug, Serialize)]
pub struct RcEstimate {
    pub p_ac: Estimate,
    pub p_bc: Estimate,
    pub p_joint: Estimate,
    pub covariance: Estimate,
    /// covariance / mean(joint); None when no trial satisfied the joint
    /// event.
    pub rc: Option<f64>,
    /// Inconclusive unless the covariance interval excludes 0.
    pub sign_verdict: SignVerdict,
}

/// Rare-event advisor verdict for a requested relative accuracy.
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityAdvice {
    pub p_ac_predicted: f64,
    pub p_bc_predicted: f64,
    pub p_joint_predicted: f64,
    pub target_rel_err: f64,
    pub required_trials: f64,
    pub budget: u64,
    pub feasible: bool,
}

/// Predicts the placement probabilities from the closed-form estimates and
/// compares trials ~ 1/(pJoint * err^2) against the budget.
pub fn feasibility(shape: GraphShape, kind: PlacementKind, target_rel_err: f64, budget: u64) -> FeasibilityAdvice {
    let (la, lb, lj) = placement_lemmas(kind);
    let (m, n) = (shape.m(), shape.n());
    let p_joint = lemma_estimate(lj, m, n);
    let required_trials = 1.0 / (p_joint * target_rel_err * target_rel_err);
    FeasibilityAdvice {
        p_ac_predicted: lemma_estimate(la, m, n),
        p_bc_predicted: lemma_estimate(lb, m, n),
        p_joint_predicted: p_joint,
        target_rel_err,
        required_trials,
        budget,
        feasible: required_trials <= budget as f64,
    }
}

enum Bias {
    /// p = 1/2 exactly: one drawn bit per edge, 64 edges per word.
    Half,
    /// Edge directed X -> Y iff the next u64 draw is below this threshold,
    /// floor(p * 2^64). The quantization error is below 2^-64 per edge.
    General { threshold: u128 },
}

fn compile_bias(p: &BigRational) -> Result<Bias, McError> {
    if p.is_negative() || *p > BigRational::one() {
        return Err(McError::BiasOutOfRange { p: p.clone() });
    }
    if *p == BigRational::new(BigInt::from(1), BigInt::from(2)) {
        return Ok(Bias::Half);
    }
    let threshold = ((p.numer() << 64u32) / p.denom()).to_u128().unwrap();
    Ok(Bias::General { threshold })
}

fn rng_for_batch(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..].copy_from_slice(b"kmn-orient-mc-stream-v01");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(batch);
    rng
}

fn tail_mask(len: usize, word: usize) -> u64 {
    let lo = word * 64;
    let hi = len.min(lo + 64);
    if hi <= lo {
        0
    } else if hi - lo == 64 {
        !0
    } else {
        (1u64 << (hi - lo)) - 1
    }
}

/// Per-worker sampling state: one orientation as row and column bitmaps,
/// plus the backward-reachability scratch.
struct Scratch {
    m: usize,
    n: usize,
    wm: usize,
    wn: usize,
    /// bit j of row i: edge (i, j) directed X -> Y
    rows: Vec<u64>,
    /// bit i of column j: same flag, transposed
    cols: Vec<u64>,
    bx: Vec<u64>,
    by: Vec<u64>,
    qx: Vec<u32>,
    qy: Vec<u32>,
}

impl Scratch {
    fn new(shape: GraphShape) -> Self {
        let m = shape.m() as usize;
        let n = shape.n() as usize;
        let wm = m.div_ceil(64);
        let wn = n.div_ceil(64);
        Scratch {
            m,
            n,
            wm,
            wn,
            rows: vec![0; m * wn],
            cols: vec![0; n * wm],
            bx: vec![0; wm],
            by: vec![0; wn],
            qx: Vec::with_capacity(m),
            qy: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn set_flag(&mut self, i: usize, j: usize) {
        self.rows[i * self.wn + j / 64] |= 1u64 << (j % 64);
        self.cols[j * self.wm + i / 64] |= 1u64 << (i % 64);
    }

    fn sample(&mut self, rng: &mut ChaCha8Rng, bias: &Bias) {
        self.rows.fill(0);
        self.cols.fill(0);
        match bias {
            Bias::Half => {
                let mut word = 0u64;
                let mut left = 0u32;
                for i in 0..self.m {
                    for j in 0..self.n {
                        if left == 0 {
                            word = rng.next_u64();
                            left = 64;
                        }
                        if word & 1 == 1 {
                            self.set_flag(i, j);
                        }
                        word >>= 1;
                        left -= 1;
                    }
                }
            }
            Bias::General { threshold } => {
                for i in 0..self.m {
                    for j in 0..self.n {
                        if (rng.next_u64() as u128) < *threshold {
                            self.set_flag(i, j);
                        }
                    }
                }
            }
        }
    }

    /// Backward BFS filling bx/by with the set of vertices that reach
    /// `target`. Predecessors of X_i are the Y_j with flag 0; predecessors
    /// of Y_j are the X_i with flag 1.
    fn reach_set(&mut self, target: Vertex) {
        self.bx.fill(0);
        self.by.fill(0);
        self.qx.clear();
        self.qy.clear();
        match target.side {
            Side::X => {
                let i = target.index as usize;
                self.bx[i / 64] |= 1u64 << (i % 64);
                self.qx.push(target.index);
            }
            Side::Y => {
                let j = target.index as usize;
                self.by[j / 64] |= 1u64 << (j % 64);
                self.qy.push(target.index);
            }
        }
        loop {
            while let Some(i) = self.qx.pop() {
                let row = (i as usize) * self.wn;
                for w in 0..self.wn {
                    let mut cand = !self.rows[row + w] & tail_mask(self.n, w) & !self.by[w];
                    while cand != 0 {
                        let b = cand.trailing_zeros();
                        self.by[w] |= 1u64 << b;
                        self.qy.push((w * 64) as u32 + b);
                        cand &= cand - 1;
                    }
                }
            }
            if self.qy.is_empty() {
                return;
            }
            while let Some(j) = self.qy.pop() {
                let col = (j as usize) * self.wm;
                for w in 0..self.wm {
                    let mut cand = self.cols[col + w] & !self.bx[w];
                    while cand != 0 {
                        let b = cand.trailing_zeros();
                        self.bx[w] |= 1u64 << b;
                        self.qx.push((w * 64) as u32 + b);
                        cand &= cand - 1;
                    }
                }
            }
            if self.qx.is_empty() {
                return;
            }
        }
    }

    #[inline]
    fn reaches_current_target(&self, v: Vertex) -> bool {
        let i = v.index as usize;
        match v.side {
            Side::X => self.bx[i / 64] >> (i % 64) & 1 == 1,
            Side::Y => self.by[i / 64] >> (i % 64) & 1 == 1,
        }
    }
}

/// Events flattened into per-target literal groups, so each trial runs one
/// backward closure per distinct target.
struct Plan {
    targets: Vec<Vertex>,
    /// per target slot: (event index, source) pairs meaning "event e also
    /// requires source to avoid this target"
    literals: Vec<Vec<(usize, Vertex)>>,
    events: usize,
}

fn compile(events: &[AvoidanceEvent]) -> Plan {
    let mut targets: Vec<Vertex> = Vec::new();
    let mut literals: Vec<Vec<(usize, Vertex)>> = Vec::new();
    for (e, ev) in events.iter().enumerate() {
        for &(src, dst) in ev.atoms() {
            let slot = match targets.iter().position(|&t| t == dst) {
                Some(s) => s,
                None => {
                    targets.push(dst);
                    literals.push(Vec::new());
                    targets.len() - 1
                }
            };
            literals[slot].push((e, src));
        }
    }
    Plan { targets, literals, events: events.len() }
}

struct BatchTally {
    trials: u64,
    counts: Vec<u64>,
}

fn validate(cfg: &McConfig) -> Result<Bias, McError> {
    if cfg.trials == 0 {
        return Err(McError::ZeroTrials);
    }
    if cfg.batch_size == 0 {
        return Err(McError::ZeroBatch);
    }
    compile_bias(&cfg.p)
}

fn run_tallies(shape: GraphShape, events: &[AvoidanceEvent], cfg: &McConfig) -> Result<Vec<BatchTally>, McError> {
    let bias = validate(cfg)?;
    let plan = compile(events);
    let batches = cfg.trials.div_ceil(cfg.batch_size);
    let worker = |b: u64| -> BatchTally {
        let start = b * cfg.batch_size;
        let count = cfg.batch_size.min(cfg.trials - start);
        let mut rng = rng_for_batch(cfg.seed, b);
        let mut scratch = Scratch::new(shape);
        let mut counts = vec![0u64; plan.events];
        let mut ok = vec![false; plan.events];
        for _ in 0..count {
            scratch.sample(&mut rng, &bias);
            ok.fill(true);
            for (slot, target) in plan.targets.iter().enumerate() {
                scratch.reach_set(*target);
                for &(e, src) in &plan.literals[slot] {
                    if scratch.reaches_current_target(src) {
                        ok[e] = false;
                    }
                }
            }
            for (e, &hit) in ok.iter().enumerate() {
                counts[e] += hit as u64;
            }
        }
        BatchTally { trials: count, counts }
    };
    match cfg.threads {
        None => Ok((0..batches).map(worker).collect()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| McError::ThreadPool(e.to_string()))?;
            Ok(pool.install(|| (0..batches).into_par_iter().map(worker).collect()))
        }
    }
}

/// 95% Wilson score interval around a binomial proportion.
fn wilson(count: u64, trials: u64) -> Estimate {
    let nf = trials as f64;
    let phat = count as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (phat + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // at the boundaries the Wilson bound is exactly the proportion
    let ci_low = if count == 0 { 0.0 } else { (center - half).max(0.0) };
    let ci_high = if count == trials { 1.0 } else { (center + half).min(1.0) };
    Estimate {
        mean: phat,
        stderr: (phat * (1.0 - phat) / nf).sqrt(),
        ci_low,
        ci_high,
        trials,
        method: CiMethod::Binomial,
    }
}

/// Estimates the probability of one avoidance event.
pub fn estimate_event(shape: GraphShape, event: &AvoidanceEvent, cfg: &McConfig) -> Result<Estimate, McError> {
    let tallies = run_tallies(shape, std::slice::from_ref(event), cfg)?;
    let count: u64 = tallies.iter().map(|t| t.counts[0]).sum();
    Ok(wilson(count, cfg.trials))
}

/// Estimates the placement's marginals, joint, covariance, and rc from a
/// single common sample stream.
pub fn estimate_rc(shape: GraphShape, kind: PlacementKind, cfg: &McConfig) -> Result<RcEstimate, McError> {
    let placement = Placement::new(kind, shape)?;
    let (ac, bc, joint) = placement.events(shape)?;
    let tallies = run_tallies(shape, &[ac, bc, joint], cfg)?;

    let mut totals = [0u64; 3];
    for t in &tallies {
        debug_assert!(t.counts[2] <= t.counts[0].min(t.counts[1]));
        for (acc, &c) in totals.iter_mut().zip(&t.counts) {
            *acc += c;
        }
    }
    let nf = cfg.trials as f64;
    let (pa, pb, pj) = (totals[0] as f64 / nf, totals[1] as f64 / nf, totals[2] as f64 / nf);
    let cov_point = pj - pa * pb;

    let covariance = if tallies.len() >= 30 {
        // batch means: the per-batch covariance is an iid-ish statistic
        // whose spread gives an honest stderr for the nonlinear functional
        let k = tallies.len() as f64;
        let cov_i: Vec<f64> = tallies
            .iter()
            .map(|t| {
                let b = t.trials as f64;
                t.counts[2] as f64 / b - (t.counts[0] as f64 / b) * (t.counts[1] as f64 / b)
            })
            .collect();
        let mean_i = cov_i.iter().sum::<f64>() / k;
        let var = cov_i.iter().map(|c| (c - mean_i) * (c - mean_i)).sum::<f64>() / (k - 1.0);
        let stderr = (var / k).sqrt();
        Estimate {
            mean: cov_point,
            stderr,
            ci_low: cov_point - Z95 * stderr,
            ci_high: cov_point + Z95 * stderr,
            trials: cfg.trials,
            method: CiMethod::BatchMeans,
        }
    } else {
        // too few batches for batch means: bound the covariance by
        // combining the Wilson bounds of the three probabilities, and flag
        // the method so callers can tell
        let wa = wilson(totals[0], cfg.trials);
        let wb = wilson(totals[1], cfg.trials);
        let wj = wilson(totals[2], cfg.trials);
        let lo = wj.ci_low - wa.ci_high * wb.ci_high;
        let hi = wj.ci_high - wa.ci_low * wb.ci_low;
        Estimate {
            mean: cov_point,
            stderr: (hi - lo) / (2.0 * Z95),
            ci_low: lo,
            ci_high: hi,
            trials: cfg.trials,
            method: CiMethod::Binomial,
        }
    };

    let sign_verdict = if covariance.ci_high < 0.0 {
        SignVerdict::Negative
    } else if covariance.ci_low > 0.0 {
        SignVerdict::Positive
    } else {
        SignVerdict::Inconclusive
    };
    let rc = (pj > 0.0).then_some(cov_point / pj);

    Ok(RcEstimate {
        p_ac: wilson(totals[0], cfg.trials),
        p_bc: wilson(totals[1], cfg.trials),
        p_joint: wilson(totals[2], cfg.trials),
        covariance,
        rc,
        sign_verdict,
    })
}
