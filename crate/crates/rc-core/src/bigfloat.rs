//! Arbitrary-precision binary floats with directed rounding, and the interval
//! arithmetic built on them.
//!
//! The recursion engine's float backend works entirely in enclosures: every
//! operation rounds its lower bound down and its upper bound up, so the true
//! (dyadic-rational) value is always inside the interval and the final sign
//! verdict is rigorous, not heuristic. Values in the recursions are
//! non-negative; signed quantities (covariance, rc) appear only at the end
//! and get their own thin wrapper.

use num::bigint::BigUint;
use num::{One, Zero};
use std::cmp::Ordering;

use crate::dyadic::DyadicProb;

/// Non-negative binary float `mant * 2^exp` with unbounded exponent.
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct BigFloat {
    mant: BigUint,
    exp: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { mant: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        BigFloat { mant: BigUint::one(), exp: 0 }
    }

    pub fn from_dyadic(d: &DyadicProb) -> Self {
        BigFloat { mant: d.numerator().clone(), exp: -(d.exponent() as i64) }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// Rounds the mantissa to at most `prec` bits, toward zero or away from
    /// zero depending on `up`.
    fn round(mut self, prec: u32, up: bool) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self;
        }
        let shift = bits - prec as u64;
        let dropped = !(self.mant.trailing_zeros().unwrap_or(0) >= shift);
        self.mant >>= shift;
        self.exp += shift as i64;
        if up && dropped {
            self.mant += 1u32;
            if self.mant.bits() > prec as u64 {
                // carry made it a power of two; halve exactly
                self.mant >>= 1;
                self.exp += 1;
            }
        }
        self
    }

    fn add(a: &Self, b: &Self, prec: u32, up: bool) -> Self {
        if a.is_zero() {
            return b.clone().round(prec, up);
        }
        if b.is_zero() {
            return a.clone().round(prec, up);
        }
        let exp = a.exp.min(b.exp);
        let mant = (&a.mant << (a.exp - exp) as u64) + (&b.mant << (b.exp - exp) as u64);
        BigFloat { mant, exp }.round(prec, up)
    }

    fn mul(a: &Self, b: &Self, prec: u32, up: bool) -> Self {
        if a.is_zero() || b.is_zero() {
            return Self::zero();
        }
        BigFloat { mant: &a.mant * &b.mant, exp: a.exp + b.exp }.round(prec, up)
    }

    /// Divides with `prec`-bit directed rounding; `b` must be nonzero.
    fn div(a: &Self, b: &Self, prec: u32, up: bool) -> Self {
        assert!(!b.is_zero(), "division by zero BigFloat");
        if a.is_zero() {
            return Self::zero();
        }
        // Shift the numerator so the integer quotient carries >= prec+1 bits.
        let extra = (b.mant.bits() + prec as u64 + 2).saturating_sub(a.mant.bits());
        let num = &a.mant << extra;
        let (q, r) = (&num / &b.mant, &num % &b.mant);
        let mut out = BigFloat { mant: q, exp: a.exp - extra as i64 - b.exp };
        if up && !r.is_zero() {
            out.mant += 1u32;
        }
        out.round(prec, up)
    }

    /// Exact difference (requires `a >= b`).
    fn sub_exact(a: &Self, b: &Self) -> Self {
        if b.is_zero() {
            return a.clone();
        }
        let exp = a.exp.min(b.exp);
        let mant = (&a.mant << (a.exp - exp) as u64) - (&b.mant << (b.exp - exp) as u64);
        BigFloat { mant, exp }
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let shift = bits.saturating_sub(53);
        let top = (&self.mant >> shift).to_u64_digits().first().copied().unwrap_or(0) as f64;
        let e = self.exp + shift as i64;
        if e > 1100 {
            f64::INFINITY
        } else if e < -1150 {
            0.0
        } else {
            top * 2f64.powi(e as i32)
        }
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigFloat {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.mant.is_zero() || other.mant.is_zero() {
            return self.mant.cmp(&other.mant);
        }
        // Compare magnitudes via (bits + exp) first, fall back to aligning.
        let ord_a = self.mant.bits() as i64 + self.exp;
        let ord_b = other.mant.bits() as i64 + other.exp;
        if ord_a != ord_b {
            return ord_a.cmp(&ord_b);
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &other.mant << (other.exp - exp) as u64;
        a.cmp(&b)
    }
}

/// Enclosure `[lo, hi]` of a non-negative value.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: BigFloat,
    hi: BigFloat,
}

impl Interval {
    pub fn exact(v: BigFloat) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Self::exact(BigFloat::zero())
    }

    pub fn one() -> Self {
        Self::exact(BigFloat::one())
    }

    pub fn from_dyadic(d: &DyadicProb, prec: u32) -> Self {
        let v = BigFloat::from_dyadic(d);
        Interval { lo: v.clone().round(prec, false), hi: v.round(prec, true) }
    }

    pub fn lo(&self) -> &BigFloat {
        &self.lo
    }

    pub fn hi(&self) -> &BigFloat {
        &self.hi
    }

    fn check(self) -> Self {
        debug_assert!(self.lo <= self.hi);
        self
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        Interval {
            lo: BigFloat::add(&self.lo, &other.lo, prec, false),
            hi: BigFloat::add(&self.hi, &other.hi, prec, true),
        }
        .check()
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        Interval {
            lo: BigFloat::mul(&self.lo, &other.lo, prec, false),
            hi: BigFloat::mul(&self.hi, &other.hi, prec, true),
        }
        .check()
    }

    /// Multiplies by the exact dyadic scalar `coeff / 2^coeff_exp`.
    pub fn mul_scaled(&self, coeff: &BigUint, coeff_exp: u32, prec: u32) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        let scalar = BigFloat { mant: coeff.clone(), exp: -(coeff_exp as i64) };
        Interval {
            lo: BigFloat::mul(&self.lo, &scalar, prec, false),
            hi: BigFloat::mul(&self.hi, &scalar, prec, true),
        }
        .check()
    }

    /// Division; the divisor's lower bound must be positive.
    pub fn div(&self, other: &Self, prec: u32) -> Self {
        assert!(!other.lo.is_zero(), "interval division requires a positive divisor");
        Interval {
            lo: BigFloat::div(&self.lo, &other.hi, prec, false),
            hi: BigFloat::div(&self.hi, &other.lo, prec, true),
        }
        .check()
    }

    pub fn contains_dyadic(&self, d: &DyadicProb) -> bool {
        let v = BigFloat::from_dyadic(d);
        self.lo <= v && v <= self.hi
    }

    /// Exact interval width, as f64.
    pub fn width(&self) -> f64 {
        BigFloat::sub_exact(&self.hi, &self.lo).to_f64()
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }
}

/// Signed big float: sign in {-1, 0, +1} times a magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedValue {
    sign: i8,
    mag: BigFloat,
}

impl SignedValue {
    fn new(sign: i8, mag: BigFloat) -> Self {
        if mag.is_zero() {
            SignedValue { sign: 0, mag }
        } else {
            SignedValue { sign, mag }
        }
    }

    /// Exact signed difference a - b of non-negative floats.
    pub fn sub(a: &BigFloat, b: &BigFloat) -> Self {
        match a.cmp(b) {
            Ordering::Less => SignedValue::new(-1, BigFloat::sub_exact(b, a)),
            Ordering::Equal => SignedValue::new(0, BigFloat::zero()),
            Ordering::Greater => SignedValue::new(1, BigFloat::sub_exact(a, b)),
        }
    }

    pub fn signum(&self) -> i8 {
        self.sign
    }

    pub fn to_f64(&self) -> f64 {
        self.sign as f64 * self.mag.to_f64()
    }

    fn le(&self, other: &Self) -> bool {
        match (self.sign, other.sign) {
            (-1, -1) => self.mag >= other.mag,
            (1, 1) => self.mag <= other.mag,
            (a, b) => a <= b,
        }
    }
}

/// Enclosure of a signed value, produced by subtracting enclosures.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedInterval {
    pub lo: SignedValue,
    pub hi: SignedValue,
}

impl SignedInterval {
    /// a - b, where a and b are enclosures of non-negative values. The bounds
    /// are exact differences (no rounding needed at this final stage).
    pub fn sub_intervals(a: &Interval, b: &Interval) -> Self {
        let out = SignedInterval {
            lo: SignedValue::sub(&a.lo, &b.hi),
            hi: SignedValue::sub(&a.hi, &b.lo),
        };
        debug_assert!(out.lo.le(&out.hi));
        out
    }

    /// 1 - r for an enclosure r of a non-negative ratio.
    pub fn one_minus(r: &Interval) -> Self {
        Self::sub_intervals(&Interval::one(), r)
    }

    /// Strict sign knowledge: Some(-1) if hi < 0, Some(1) if lo > 0,
    /// Some(0) if the interval is exactly zero, None if it straddles.
    pub fn certified_sign(&self) -> Option<i8> {
        if self.hi.sign < 0 {
            Some(-1)
        } else if self.lo.sign > 0 {
            Some(1)
        } else if self.lo.sign == 0 && self.hi.sign == 0 {
            Some(0)
        } else {
            None
        }
    }

    pub fn width(&self) -> f64 {
        self.hi.to_f64() - self.lo.to_f64()
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::bigint::BigInt;
    use num::rational::BigRational;

    fn dy(s: &str) -> DyadicProb {
        s.parse().unwrap()
    }

    fn rat(f: &BigFloat) -> BigRational {
        let m = BigInt::from(f.mant.clone());
        if f.exp >= 0 {
            BigRational::from(m << f.exp as u64)
        } else {
            BigRational::new(m, BigInt::one() << (-f.exp) as u64)
        }
    }

    #[test]
    fn directed_rounding() {
        let v = BigFloat::from_dyadic(&dy("7/2^3")); // 0.875, 3 mantissa bits
        let down = v.clone().round(2, false);
        let up = v.round(2, true);
        assert_eq!(rat(&down), BigRational::new(BigInt::from(3), BigInt::from(4)));
        assert_eq!(rat(&up), BigRational::from(BigInt::from(1)));
    }

    #[test]
    fn exact_values_do_not_round() {
        let v = BigFloat::from_dyadic(&dy("3/2^2"));
        assert_eq!(v.clone().round(2, true), v);
    }

    #[test]
    fn interval_ops_enclose_exact_arithmetic() {
        let prec = 8;
        let a = Interval::from_dyadic(&dy("113/2^7"), prec);
        let b = Interval::from_dyadic(&dy("89/2^7"), prec);
        let sum = a.add(&b, prec);
        let prod = a.mul(&b, prec);
        let exact_sum = dy("113/2^7").add(&dy("89/2^7"));
        let exact_prod = dy("113/2^7").mul(&dy("89/2^7"));
        assert!(sum.contains_dyadic(&exact_sum));
        assert!(prod.contains_dyadic(&exact_prod));
        assert!(sum.width() <= 2f64.powi(-5));
    }

    #[test]
    fn division_encloses_one_third() {
        let one = Interval::one();
        let three = Interval::exact(BigFloat { mant: BigUint::from(3u32), exp: 0 });
        let third = one.div(&three, 20);
        let (lo, hi) = third.to_f64s();
        assert!(lo < 1.0 / 3.0 && 1.0 / 3.0 < hi);
        assert!(third.width() <= 2f64.powi(-18));
    }

    #[test]
    fn signed_subtraction() {
        let a = BigFloat::from_dyadic(&dy("3/2^3"));
        let b = BigFloat::from_dyadic(&dy("5/2^3"));
        let d = SignedValue::sub(&a, &b);
        assert_eq!(d.signum(), -1);
        assert_eq!(d.to_f64(), -0.25);
        assert_eq!(SignedValue::sub(&a, &a).signum(), 0);
    }

    #[test]
    fn signed_interval_verdicts() {
        let j = Interval::from_dyadic(&dy("1/2^2"), 30);
        let p = Interval::from_dyadic(&dy("3/2^2"), 30);
        let neg = SignedInterval::sub_intervals(&j, &p);
        assert_eq!(neg.certified_sign(), Some(-1));
        let pos = SignedInterval::sub_intervals(&p, &j);
        assert_eq!(pos.certified_sign(), Some(1));
        let wide_lo = Interval { lo: BigFloat::zero(), hi: BigFloat::one() };
        let straddle = SignedInterval::sub_intervals(&wide_lo, &j);
        assert_eq!(straddle.certified_sign(), None);
    }

    #[test]
    fn f64_saturation() {
        let huge = BigFloat { mant: BigUint::one(), exp: 3000 };
        assert_eq!(huge.to_f64(), f64::INFINITY);
        let tiny = BigFloat { mant: BigUint::one(), exp: -3000 };
        assert_eq!(tiny.to_f64(), 0.0);
    }

    #[test]
    fn accumulated_enclosure_stays_tight() {
        // repeated low-precision ops still enclose the exact running value
        let prec = 24;
        let mut exact = dy("1");
        let mut iv = Interval::one();
        for k in 1..40u32 {
            let c = dy(&format!("{}/2^{}", 2 * k + 1, 5));
            exact = exact.mul(&c).add(&dy("1/2^3"));
            iv = iv
                .mul_scaled(&BigUint::from(2 * k + 1), 5, prec)
                .add(&Interval::from_dyadic(&dy("1/2^3"), prec), prec);
            assert!(iv.contains_dyadic(&exact), "k={k}");
        }
    }
}
