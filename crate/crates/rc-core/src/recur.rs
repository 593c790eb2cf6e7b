//! Peeling recursions for avoidance probabilities, scaling far beyond the
//! enumeration cap.
//!
//! The peeling step conditions on the exact one-step out-neighbourhood of the
//! distinguished source set: each forced edge costs a factor 1/2, the choices
//! of the neighbourhood contribute a binomial, and what remains is the same
//! kind of event on a smaller graph. Six mutually recursive families cover
//! the three placements:
//!
//! * `fx(m,n,k)`: P(K avoids a), K a k-subset of X, a in X.
//! * `fy(m,n,l)`: P(L avoids a), L an l-subset of Y, a in X.
//! * `gx(m,n,k)`: P(K avoids b and b avoids a), all in X.
//! * `gy(m,n,l)`: P(L avoids b and b avoids a), L in Y, a, b in X.
//! * `hx(m,n,k)`: P(K avoids d and d avoids a), K in X, d in Y, a in X.
//! * `hy(m,n,l)`: P(L avoids d and d avoids a), L in Y (not containing d).
//!
//! Two modes: [`Mode::Validated`] is the re-derived, oracle-checked system;
//! [`Mode::AsPrinted`] transcribes a published variant verbatim (its `fy` and
//! `hy` steps differ) so the two can be compared mechanically. Two backends:
//! exact dyadic arithmetic, or directed-rounding interval floats for large
//! shapes where exact numerators get bulky.
//!
//! An evaluator owns its memo tables and is deliberately single-threaded
//! (`&mut self`); results are independent of evaluation order, which is
//! covered by a test.

use std::collections::HashMap;
use std::fmt;

use num::bigint::BigUint;
use num::One;
use thiserror::Error;

use crate::bigfloat::{Interval, SignedInterval};
use crate::dyadic::{DyadicProb, ExactProb};
use crate::model::{GraphShape, ModelError, Placement, PlacementKind};
use crate::relcov::{ExactRcResult, RcError, SignVerdict, rc_from_probs};

#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub enum Family {
    FX,
    FY,
    GX,
    GY,
    HX,
    HY,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::FX, Family::FY, Family::GX, Family::GY, Family::HX, Family::HY];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::FX => "fx",
            Family::FY => "fy",
            Family::GX => "gx",
            Family::GY => "gy",
            Family::HX => "hx",
            Family::HY => "hy",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fx" => Ok(Family::FX),
            "fy" => Ok(Family::FY),
            "gx" => Ok(Family::GX),
            "gy" => Ok(Family::GY),
            "hx" => Ok(Family::HX),
            "hy" => Ok(Family::HY),
            other => Err(format!("unknown family {other:?} (expected fx, fy, gx, gy, hx or hy)")),
        }
    }
}

/// Memo key: family, class sizes, and the size of the avoiding set.
#[derive(Clone, Copy, Debug, Eq, Hash, PartialEq)]
pub struct MemoKey {
    pub family: Family,
    pub m: u32,
    pub n: u32,
    pub size: u32,
}

impl MemoKey {
    pub fn new(family: Family, m: u32, n: u32, size: u32) -> Self {
        MemoKey { family, m, n, size }
    }
}

impl fmt::Display for MemoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{},{})", self.family, self.m, self.n, self.size)
    }
}

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum Mode {
    /// Verbatim transcription of the published recursion text.
    AsPrinted,
    /// Re-derived system; matches the enumeration oracle exactly.
    Validated,
}

#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum Backend {
    ExactDyadic,
    BigFloat,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    pub mode: Mode,
    /// Refuse evaluations whose estimated memo size exceeds this.
    pub state_budget: u64,
    /// Mantissa bits for the float backend; default 4 * max(m, n) of the
    /// first float evaluation.
    pub precision_bits: Option<u32>,
    /// Maximum tolerated enclosure width for float rc results.
    pub tolerance: Option<f64>,
}

pub const DEFAULT_STATE_BUDGET: u64 = 10_000_000;

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mode: Mode::Validated,
            state_budget: DEFAULT_STATE_BUDGET,
            precision_bits: None,
            tolerance: None,
        }
    }
}

impl EvalConfig {
    pub fn validated() -> Self {
        Self::default()
    }

    pub fn printed() -> Self {
        EvalConfig { mode: Mode::AsPrinted, ..Self::default() }
    }
}

#[derive(Debug, Error)]
pub enum RecurError {
    #[error("recursion key {key} out of bounds: {reason}")]
    KeyOutOfBounds { key: String, reason: String },
    #[error("estimated recursion state count {estimate} exceeds the budget {budget}; raise the state budget or use a smaller shape")]
    StateBudget { estimate: u64, budget: u64 },
    #[error("float enclosure width {width:.3e} exceeds tolerance {tolerance:.3e}; raise the mantissa precision")]
    PrecisionLoss { width: f64, tolerance: f64 },
    #[error("relative covariance is defined for validated mode only")]
    PrintedModeRc,
    #[error(transparent)]
    Rc(#[from] RcError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Result of one evaluation; exactly one field is populated, according to the
/// backend requested.
#[derive(Clone, Debug)]
pub struct RecurValue {
    pub exact: Option<DyadicProb>,
    pub approx: Option<Interval>,
}

/// Which single-pair avoidance probability to evaluate.
#[derive(Clone, Copy, Debug, Eq, PartialEq)]
pub enum PairKind {
    /// P(one X vertex avoids another): fx(m,n,1).
    XAvoidsX,
    /// P(a Y vertex avoids an X vertex): fy(m,n,1).
    YAvoidsX,
}

/// Interval analogue of [`ExactRcResult`] for the float backend.
#[derive(Clone, Debug)]
pub struct RcEnclosure {
    pub p_ac: Interval,
    pub p_bc: Interval,
    pub p_joint: Interval,
    pub covariance: SignedInterval,
    /// None when the joint lower bound is 0 (enclosure cannot be divided).
    pub rc: Option<SignedInterval>,
    pub verdict: SignVerdict,
}

enum Base {
    One,
    Delegate(MemoKey),
}

/// One summand of a recursion step: coeff / 2^exp times the child value.
pub(crate) struct Term {
    pub child: MemoKey,
    pub coeff: BigUint,
    pub denom_exp: u32,
}

pub struct Evaluator {
    cfg: EvalConfig,
    memo: HashMap<MemoKey, DyadicProb>,
    fmemo: HashMap<MemoKey, Interval>,
    binom: Vec<Vec<BigUint>>,
    prec: Option<u32>,
}

impl Evaluator {
    pub fn new(cfg: EvalConfig) -> Self {
        Evaluator {
            cfg,
            memo: HashMap::new(),
            fmemo: HashMap::new(),
            binom: vec![vec![BigUint::one()]],
            prec: cfg.precision_bits,
        }
    }

    pub fn mode(&self) -> Mode {
        self.cfg.mode
    }

    /// In-bounds check for a public key.
    pub fn validate_key(key: MemoKey) -> Result<(), RecurError> {
        let fail = |reason: &str| {
            Err(RecurError::KeyOutOfBounds { key: key.to_string(), reason: reason.to_string() })
        };
        let MemoKey { family, m, n, size } = key;
        match family {
            Family::FX => {
                if m < 1 {
                    return fail("fx needs m >= 1");
                }
                if size + 1 > m {
                    return fail("fx needs size <= m - 1");
                }
            }
            Family::FY => {
                if m < 1 {
                    return fail("fy needs m >= 1");
                }
                if size > n {
                    return fail("fy needs size <= n");
                }
            }
            Family::GX => {
                if m < 2 {
                    return fail("gx needs m >= 2");
                }
                if size + 2 > m {
                    return fail("gx needs size <= m - 2");
                }
            }
            Family::GY => {
                if m < 2 {
                    return fail("gy needs m >= 2");
                }
                if size > n {
                    return fail("gy needs size <= n");
                }
            }
            Family::HX => {
                if m < 1 || n < 1 {
                    return fail("hx needs m >= 1 and n >= 1");
                }
                if size + 1 > m {
                    return fail("hx needs size <= m - 1");
                }
            }
            Family::HY => {
                if m < 1 || n < 1 {
                    return fail("hy needs m >= 1 and n >= 1");
                }
                if size + 1 > n {
                    return fail("hy needs size <= n - 1");
                }
            }
        }
        Ok(())
    }

    /// Upper estimate of reachable memo entries for a top-level (m, n).
    pub fn state_estimate(m: u32, n: u32) -> u64 {
        (m as u64 + 1) * (n as u64 + 1) * (m as u64 + n as u64 + 2)
    }

    fn check_budget(&self, m: u32, n: u32) -> Result<(), RecurError> {
        let estimate = Self::state_estimate(m, n);
        if estimate > self.cfg.state_budget {
            return Err(RecurError::StateBudget { estimate, budget: self.cfg.state_budget });
        }
        Ok(())
    }

    /// Evaluates one recursion key with the requested backend.
    pub fn eval(&mut self, key: MemoKey, backend: Backend) -> Result<RecurValue, RecurError> {
        Self::validate_key(key)?;
        self.check_budget(key.m, key.n)?;
        match backend {
            Backend::ExactDyadic => {
                let v = self.eval_exact_key(key);
                debug_assert!(self.cfg.mode == Mode::AsPrinted || v.is_probability(), "{key}");
                Ok(RecurValue { exact: Some(v), approx: None })
            }
            Backend::BigFloat => {
                let prec = *self.prec.get_or_insert_with(|| 4 * key.m.max(key.n).max(1));
                let v = self.eval_float_key(key, prec);
                Ok(RecurValue { exact: None, approx: Some(v) })
            }
        }
    }

    fn binom_value(&mut self, n: u32, k: u32) -> BigUint {
        while self.binom.len() <= n as usize {
            let prev = self.binom.last().unwrap();
            let mut row = Vec::with_capacity(prev.len() + 1);
            row.push(BigUint::one());
            for w in prev.windows(2) {
                row.push(&w[0] + &w[1]);
            }
            row.push(BigUint::one());
            self.binom.push(row);
        }
        self.binom[n as usize][k as usize].clone()
    }

    fn base_case(key: MemoKey) -> Option<Base> {
        if key.size > 0 {
            return None;
        }
        Some(match key.family {
            Family::FX | Family::FY => Base::One,
            Family::GX | Family::GY => Base::Delegate(MemoKey::new(Family::FX, key.m, key.n, 1)),
            Family::HX | Family::HY => Base::Delegate(MemoKey::new(Family::FY, key.m, key.n, 1)),
        })
    }

    /// Summands of the peeling step for a size >= 1 key. The structure is
    /// described once here; both backends fold over it.
    pub(crate) fn recursion_terms(&mut self, mode: Mode, key: MemoKey) -> Vec<Term> {
        debug_assert!(key.size >= 1);
        let MemoKey { family, m, n, size } = key;
        match family {
            // X-side step: condition on the out-neighbourhood L (inside the
            // allowed part of Y) of the avoiding set K; |K| = k edges toward
            // each chosen Y vertex cost (1/2)^(nk) in total.
            Family::FX | Family::GX | Family::HX => {
                let (partner, limit) = match family {
                    Family::FX => (Family::FY, n),
                    Family::GX => (Family::GY, n),
                    Family::HX => (Family::HY, n - 1),
                    _ => unreachable!(),
                };
                let k = size;
                let base = (BigUint::one() << k) - 1u32;
                let mut pow = BigUint::one(); // (2^k - 1)^l
                let mut terms = Vec::with_capacity(limit as usize + 1);
                for l in 0..=limit {
                    let coeff = self.binom_value(limit, l) * &pow;
                    terms.push(Term {
                        child: MemoKey::new(partner, m - k, n, l),
                        coeff,
                        denom_exp: n * k,
                    });
                    pow *= &base;
                }
                terms
            }
            // Y-side step, validated form: symmetric to the X-side step.
            Family::GY => self.y_step_terms(Family::GX, m, n, size, m - 2),
            Family::FY if mode == Mode::Validated => self.y_step_terms(Family::FX, m, n, size, m - 1),
            Family::HY if mode == Mode::Validated => self.y_step_terms(Family::HX, m, n, size, m - 1),
            // Verbatim transcriptions. fy: constant binomial C(m-1, l) (zero
            // once l > m-1), power (2^k-1)^l, denominator 2^(mk). hy: only
            // the denominator deviates from the validated form.
            Family::FY => {
                let l = size;
                let mut terms = Vec::with_capacity(m as usize);
                let c0 = if l + 1 > m { BigUint::from(0u32) } else { self.binom_value(m - 1, l) };
                for k in 0..m {
                    let pow = ((BigUint::one() << k) - 1u32).pow(l);
                    terms.push(Term {
                        child: MemoKey::new(Family::FX, m, n - l, k),
                        coeff: &c0 * pow,
                        denom_exp: m * k,
                    });
                }
                terms
            }
            Family::HY => {
                let l = size;
                let base = (BigUint::one() << l) - 1u32;
                let mut pow = BigUint::one();
                let mut terms = Vec::with_capacity(m as usize);
                for k in 0..m {
                    let coeff = self.binom_value(m - 1, k) * &pow;
                    terms.push(Term {
                        child: MemoKey::new(Family::HX, m, n - l, k),
                        coeff,
                        denom_exp: m * k,
                    });
                    pow *= &base;
                }
                terms
            }
        }
    }

    fn y_step_terms(&mut self, partner: Family, m: u32, n: u32, l: u32, kmax: u32) -> Vec<Term> {
        let base = (BigUint::one() << l) - 1u32;
        let mut pow = BigUint::one(); // (2^l - 1)^k
        let mut terms = Vec::with_capacity(kmax as usize + 1);
        for k in 0..=kmax {
            let coeff = self.binom_value(kmax, k) * &pow;
            terms.push(Term {
                child: MemoKey::new(partner, m, n - l, k),
                coeff,
                denom_exp: l * m,
            });
            pow *= &base;
        }
        terms
    }

    pub(crate) fn eval_exact_key(&mut self, key: MemoKey) -> DyadicProb {
        debug_assert!(Self::validate_key(key).is_ok(), "{key}");
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let value = match Self::base_case(key) {
            Some(Base::One) => DyadicProb::one(),
            Some(Base::Delegate(k2)) => self.eval_exact_key(k2),
            None => {
                let terms = self.recursion_terms(self.cfg.mode, key);
                let mut acc = DyadicProb::zero();
                for t in terms {
                    let child = self.eval_exact_key(t.child);
                    if !child.is_zero() {
                        acc = acc.add(&child.mul_scaled(&t.coeff, t.denom_exp));
                    }
                }
                acc
            }
        };
        self.memo.insert(key, value.clone());
        value
    }

    fn eval_float_key(&mut self, key: MemoKey, prec: u32) -> Interval {
        if let Some(v) = self.fmemo.get(&key) {
            return v.clone();
        }
        let value = match Self::base_case(key) {
            Some(Base::One) => Interval::one(),
            Some(Base::Delegate(k2)) => self.eval_float_key(k2, prec),
            None => {
                let terms = self.recursion_terms(self.cfg.mode, key);
                let mut acc = Interval::zero();
                for t in terms {
                    let child = self.eval_float_key(t.child, prec);
                    acc = acc.add(&child.mul_scaled(&t.coeff, t.denom_exp, prec), prec);
                }
                acc
            }
        };
        self.fmemo.insert(key, value.clone());
        value
    }

    fn pair_key(m: u32, n: u32, pair: PairKind) -> MemoKey {
        match pair {
            PairKind::XAvoidsX => MemoKey::new(Family::FX, m, n, 1),
            PairKind::YAvoidsX => MemoKey::new(Family::FY, m, n, 1),
        }
    }

    /// P(x avoids y) for the two cross- and in-class pair kinds.
    pub fn single_pair_prob(&mut self, m: u32, n: u32, pair: PairKind, backend: Backend) -> Result<RecurValue, RecurError> {
        self.eval(Self::pair_key(m, n, pair), backend)
    }

    fn joint_key(shape: GraphShape, kind: PlacementKind) -> Result<MemoKey, RecurError> {
        Placement::new(kind, shape)?;
        let (m, n) = (shape.m(), shape.n());
        Ok(match kind {
            PlacementKind::AllInX => MemoKey::new(Family::GX, m, n, 1),
            PlacementKind::Xxy => MemoKey::new(Family::GY, m, n, 1),
            PlacementKind::Xyx => MemoKey::new(Family::HX, m, n, 1),
        })
    }

    /// P(x avoids y and y avoids z) for a placement.
    pub fn joint_prob(&mut self, m: u32, n: u32, kind: PlacementKind, backend: Backend) -> Result<RecurValue, RecurError> {
        let shape = GraphShape::new(m, n)?;
        self.eval(Self::joint_key(shape, kind)?, backend)
    }

    fn marginal_keys(m: u32, n: u32, kind: PlacementKind) -> (MemoKey, MemoKey) {
        let fx = MemoKey::new(Family::FX, m, n, 1);
        let fy = MemoKey::new(Family::FY, m, n, 1);
        match kind {
            PlacementKind::AllInX => (fx, fx),
            PlacementKind::Xxy => (fx, fy),
            PlacementKind::Xyx => (fy, fy),
        }
    }

    /// Exact relative covariance via the validated recursions; structurally
    /// equal to the oracle's result wherever both run.
    pub fn rc_recursion(&mut self, m: u32, n: u32, kind: PlacementKind) -> Result<ExactRcResult, RecurError> {
        if self.cfg.mode != Mode::Validated {
            return Err(RecurError::PrintedModeRc);
        }
        let shape = GraphShape::new(m, n)?;
        let joint_key = Self::joint_key(shape, kind)?;
        self.check_budget(m, n)?;
        let (ka, kb) = Self::marginal_keys(m, n, kind);
        let p_ac = self.eval_exact_key(ka);
        let p_bc = self.eval_exact_key(kb);
        let p_joint = self.eval_exact_key(joint_key);
        debug_assert!(p_ac.is_probability() && p_bc.is_probability() && p_joint.is_probability());
        Ok(rc_from_probs(
            ExactProb::Dyadic(p_ac),
            ExactProb::Dyadic(p_bc),
            ExactProb::Dyadic(p_joint),
        )?)
    }

    /// Interval version: encloses the exact rc and certifies the covariance
    /// sign when the enclosure allows it.
    pub fn rc_recursion_float(&mut self, m: u32, n: u32, kind: PlacementKind) -> Result<RcEnclosure, RecurError> {
        if self.cfg.mode != Mode::Validated {
            return Err(RecurError::PrintedModeRc);
        }
        let shape = GraphShape::new(m, n)?;
        let joint_key = Self::joint_key(shape, kind)?;
        self.check_budget(m, n)?;
        let prec = *self.prec.get_or_insert_with(|| 4 * m.max(n).max(1));
        let (ka, kb) = Self::marginal_keys(m, n, kind);
        let p_ac = self.eval_float_key(ka, prec);
        let p_bc = self.eval_float_key(kb, prec);
        let p_joint = self.eval_float_key(joint_key, prec);
        let product = p_ac.mul(&p_bc, prec);
        let covariance = SignedInterval::sub_intervals(&p_joint, &product);
        let rc = if p_joint.lo().is_zero() {
            None
        } else {
            Some(SignedInterval::one_minus(&product.div(&p_joint, prec)))
        };
        let verdict = match covariance.certified_sign() {
            Some(-1) => SignVerdict::Negative,
            Some(1) => SignVerdict::Positive,
            _ => SignVerdict::Inconclusive,
        };
        if let (Some(tol), Some(rc_iv)) = (self.cfg.tolerance, rc.as_ref()) {
            let width = rc_iv.width();
            if width > tol {
                return Err(RecurError::PrecisionLoss { width, tolerance: tol });
            }
        }
        Ok(RcEnclosure { p_ac, p_bc, p_joint, covariance, rc, verdict })
    }
}

/// One-shot convenience wrapper around a fresh evaluator.
pub fn recur_eval(key: MemoKey, mode: Mode, backend: Backend) -> Result<RecurValue, RecurError> {
    let cfg = EvalConfig { mode, ..EvalConfig::default() };
    Evaluator::new(cfg).eval(key, backend)
}
