//! Exact dyadic rationals (num / 2^exp) and exact-probability containers.
//!
//! Uniform-orientation probabilities are counts over a power-of-two sample
//! space, so they stay dyadic through every recursion step. Values are kept in
//! canonical form (numerator odd, or zero with exponent zero) so structural
//! equality is value equality and serialized strings are unique.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Non-negative dyadic rational `num / 2^exp` in canonical form.
///
/// Most values handled here are probabilities, but the literal-transcription
/// recursion mode can produce values above 1, so the type itself does not cap
/// the numerator; callers that require a probability check [`is_probability`].
///
/// [`is_probability`]: DyadicProb::is_probability
#[derive(Clone, Debug, Eq, PartialEq)]
pub struct DyadicProb {
    num: BigUint,
    exp: u32,
}

impl DyadicProb {
    /// Builds `num / 2^exp` and reduces to canonical form.
    pub fn new(num: BigUint, exp: u32) -> Self {
        let mut v = DyadicProb { num, exp };
        v.normalize();
        v
    }

    /// Orientation-count constructor: `count / 2^exp`.
    pub fn from_count(count: u64, exp: u32) -> Self {
        Self::new(BigUint::from(count), exp)
    }

    pub fn zero() -> Self {
        DyadicProb { num: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        DyadicProb { num: BigUint::one(), exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True iff the value is at most 1.
    pub fn is_probability(&self) -> bool {
        self.num <= BigUint::one() << self.exp
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0) as u32;
        let shift = tz.min(self.exp);
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let exp = self.exp.max(other.exp);
        let num = (&self.num << (exp - self.exp)) + (&other.num << (exp - other.exp));
        Self::new(num, exp)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.num * &other.num, self.exp + other.exp)
    }

    /// Multiplies by the dyadic `coeff / 2^coeff_exp` in one step.
    pub fn mul_scaled(&self, coeff: &BigUint, coeff_exp: u32) -> Self {
        Self::new(&self.num * coeff, self.exp + coeff_exp)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.num.clone()),
            BigInt::from(BigUint::one() << self.exp),
        )
    }

    pub fn to_f64(&self) -> f64 {
        // Scale the numerator down so the conversion stays in f64 range.
        let bits = self.num.bits();
        if bits <= 52 {
            let n: u64 = self.num.to_u64_digits().first().copied().unwrap_or(0);
            return n as f64 * 2f64.powi(-(self.exp as i32));
        }
        let shift = bits - 52;
        let top: u64 = (&self.num >> shift).to_u64_digits().first().copied().unwrap_or(0);
        top as f64 * 2f64.powi(shift as i32 - self.exp as i32)
    }
}

impl PartialOrd for DyadicProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicProb {
    fn cmp(&self, other: &Self) -> Ordering {
        // Cross-multiplied exact comparison.
        let lhs = &self.num << other.exp;
        let rhs = &other.num << self.exp;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for DyadicProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl FromStr for DyadicProb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_num = |t: &str| t.parse::<BigUint>().map_err(|e| format!("bad numerator {t:?}: {e}"));
        match s.split_once('/') {
            None => Ok(Self::new(parse_num(s)?, 0)),
            Some((num, den)) => {
                let exp = den
                    .strip_prefix("2^")
                    .ok_or_else(|| format!("denominator must be 2^e, got {den:?}"))?
                    .parse::<u32>()
                    .map_err(|e| format!("bad exponent in {den:?}: {e}"))?;
                Ok(Self::new(parse_num(num)?, exp))
            }
        }
    }
}

impl serde::Serialize for DyadicProb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Exact probability: dyadic for uniform edge bias, big rational otherwise.
#[derive(Clone, Debug)]
pub enum ExactProb {
    Dyadic(DyadicProb),
    Rational(BigRational),
}

impl ExactProb {
    pub fn to_rational(&self) -> BigRational {
        match self {
            ExactProb::Dyadic(d) => d.to_rational(),
            ExactProb::Rational(r) => r.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactProb::Dyadic(d) => d.to_f64(),
            ExactProb::Rational(r) => rational_to_f64(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExactProb::Dyadic(d) => d.is_zero(),
            ExactProb::Rational(r) => r.is_zero(),
        }
    }
}

impl PartialEq for ExactProb {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ExactProb::Dyadic(a), ExactProb::Dyadic(b)) => a == b,
            _ => self.to_rational() == other.to_rational(),
        }
    }
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactProb::Dyadic(d) => d.fmt(f),
            ExactProb::Rational(r) => write!(f, "{r}"),
        }
    }
}

impl serde::Serialize for ExactProb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Exact sign of a computed quantity.
#[derive(Clone, Copy, Debug, Eq, PartialEq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_rational(r: &BigRational) -> Self {
        if r.is_zero() {
            Sign::Zero
        } else if r.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Negative => "negative",
            Sign::Zero => "zero",
            Sign::Positive => "positive",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lossy f64 view of a big rational, scale-managed so huge numerators and
/// denominators cancel before conversion.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    let nbits = num.magnitude().bits() as i64;
    let dbits = den.magnitude().bits() as i64;
    // Keep ~64 significant bits of each side.
    let nshift = (nbits - 64).max(0);
    let dshift = (dbits - 64).max(0);
    let ntop = (num.magnitude() >> nshift as u64)
        .to_u64_digits()
        .first()
        .copied()
        .unwrap_or(0) as f64;
    let dtop = (den.magnitude() >> dshift as u64)
        .to_u64_digits()
        .first()
        .copied()
        .unwrap_or(0) as f64;
    let mag = ntop / dtop * 2f64.powi((nshift - dshift) as i32);
    if num.is_negative() {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> DyadicProb {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        assert_eq!(DyadicProb::from_count(8, 4), d("1/2^1"));
        assert_eq!(DyadicProb::from_count(0, 7), DyadicProb::zero());
        assert_eq!(DyadicProb::from_count(16, 4), DyadicProb::one());
        assert_eq!(d("9/2^4").to_string(), "9/2^4");
        assert_eq!(d("6/2^4").to_string(), "3/2^3");
    }

    #[test]
    fn arithmetic() {
        let a = d("3/2^3");
        let b = d("1/2^3");
        assert_eq!(a.add(&b), d("1/2^1"));
        assert_eq!(a.mul(&b), d("3/2^6"));
        assert_eq!(a.mul_scaled(&BigUint::from(5u32), 1), d("15/2^4"));
    }

    #[test]
    fn ordering_is_by_value() {
        assert!(d("1/2^1") < d("9/2^4"));
        assert!(d("7/2^4") < d("1/2^1"));
        assert_eq!(d("2/2^2").cmp(&d("1/2^1")), Ordering::Equal);
    }

    #[test]
    fn probability_check_allows_over_one_values() {
        assert!(d("9/2^4").is_probability());
        assert!(d("1").is_probability());
        let over = d("23/2^4"); // legal value, not a probability
        assert!(!over.is_probability());
    }

    #[test]
    fn f64_view() {
        assert_eq!(d("9/2^4").to_f64(), 0.5625);
        assert_eq!(DyadicProb::zero().to_f64(), 0.0);
        let tiny = DyadicProb::new(BigUint::one(), 100);
        assert!((tiny.to_f64() - 2f64.powi(-100)).abs() < 1e-45);
    }

    #[test]
    fn rational_f64_view() {
        let r = BigRational::new(BigInt::from(-5), BigInt::from(16));
        assert_eq!(rational_to_f64(&r), -0.3125);
        let huge = BigRational::new(BigInt::from(1) << 200, BigInt::from(3) << 200);
        assert!((rational_to_f64(&huge) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn roundtrip_strings() {
        for s in ["0", "1", "9/2^4", "7/2^4", "1/2^20"] {
            assert_eq!(d(s).to_string(), s);
        }
    }
}
