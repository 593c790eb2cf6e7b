//! Covariance and relative covariance assembled from exact probabilities.
//!
//! Shared by the enumeration oracle and the recursion engine so that equal
//! inputs produce structurally equal results.

use num::rational::BigRational;
use num::{One, Zero};
use thiserror::Error;

use crate::dyadic::{ExactProb, Sign};

#[derive(Debug, Error, Eq, PartialEq)]
pub enum RcError {
    #[error("relative covariance undefined: joint probability is 0 but the marginal product is not")]
    Undefined,
}

/// Relative covariance of two avoidance events with its exact ingredients:
/// `rc = (p_joint - p_ac*p_bc) / p_joint`.
#[derive(Clone, Debug)]
pub struct ExactRcResult {
    pub p_ac: ExactProb,
    pub p_bc: ExactProb,
    pub p_joint: ExactProb,
    pub covariance: BigRational,
    pub rc: BigRational,
    pub sign: Sign,
}

impl PartialEq for ExactRcResult {
    fn eq(&self, other: &Self) -> bool {
        self.p_ac == other.p_ac
            && self.p_bc == other.p_bc
            && self.p_joint == other.p_joint
            && self.covariance == other.covariance
            && self.rc == other.rc
            && self.sign == other.sign
    }
}

/// Builds the result from P(Ac), P(Bc), P(Ac and Bc).
///
/// When the joint probability is 0 (possible only when a marginal is 0 too,
/// i.e. at degenerate edge bias) the 0/0 ratio is taken as 0, giving rc = 1.
/// A zero joint with a nonzero marginal product is reported as undefined.
pub fn rc_from_probs(
    p_ac: ExactProb,
    p_bc: ExactProb,
    p_joint: ExactProb,
) -> Result<ExactRcResult, RcError> {
    let ra = p_ac.to_rational();
    let rb = p_bc.to_rational();
    let rj = p_joint.to_rational();
    let product = &ra * &rb;
    let covariance = &rj - &product;
    // Identity check against the uncomplemented events: with
    // P(A and B) = 1 - P(Ac) - P(Bc) + P(Ac and Bc),
    // P(A and B) - P(A)P(B) must equal the covariance of the complements.
    debug_assert_eq!(
        (BigRational::one() - &ra - &rb + &rj)
            - (BigRational::one() - &ra) * (BigRational::one() - &rb),
        covariance
    );
    let rc = if product.is_zero() {
        BigRational::one()
    } else if rj.is_zero() {
        return Err(RcError::Undefined);
    } else {
        BigRational::one() - product / &rj
    };
    let sign = Sign::of_rational(&covariance);
    Ok(ExactRcResult { p_ac, p_bc, p_joint, covariance, rc, sign })
}

/// Three-valued sign verdict for estimated or interval-bounded quantities.
#[derive(Clone, Copy, Debug, Eq, PartialEq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignVerdict {
    Negative,
    Positive,
    Inconclusive,
}

impl SignVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SignVerdict::Negative => "negative",
            SignVerdict::Positive => "positive",
            SignVerdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for SignVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicProb;
    use num::BigInt;

    fn dy(s: &str) -> ExactProb {
        ExactProb::Dyadic(s.parse::<DyadicProb>().unwrap())
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn k31_numbers() {
        let r = rc_from_probs(dy("3/2^2"), dy("3/2^2"), dy("1/2^1")).unwrap();
        assert_eq!(r.covariance, rat(-1, 16));
        assert_eq!(r.rc, rat(-1, 8));
        assert_eq!(r.sign, Sign::Negative);
    }

    #[test]
    fn zero_joint_with_zero_marginal() {
        let r = rc_from_probs(dy("1/2^1"), dy("0"), dy("0")).unwrap();
        assert_eq!(r.rc, rat(1, 1));
        assert_eq!(r.sign, Sign::Zero);
    }

    #[test]
    fn zero_joint_with_nonzero_product_is_undefined() {
        assert_eq!(
            rc_from_probs(dy("1/2^1"), dy("1/2^1"), dy("0")).unwrap_err(),
            RcError::Undefined
        );
    }

    #[test]
    fn positive_sign() {
        let r = rc_from_probs(dy("1/2^1"), dy("1/2^1"), dy("3/2^3")).unwrap();
        assert_eq!(r.covariance, rat(1, 8));
        assert_eq!(r.sign, Sign::Positive);
        assert_eq!(r.rc, rat(1, 3));
    }
}
