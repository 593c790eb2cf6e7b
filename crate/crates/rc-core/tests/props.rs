//! Randomized invariants for the arithmetic kernels and the orientation
//! model. Each property is cheap per case; the case counts keep the whole
//! file around a second of runtime.

use num::{BigUint, One};
use proptest::prelude::*;

use rc_core::bigfloat::Interval;
use rc_core::dyadic::{rational_to_f64, DyadicProb, Sign};
use rc_core::model::{AvoidanceEvent, GraphShape, Orientation, Side, Vertex};

fn dyadic() -> impl Strategy<Value = DyadicProb> {
    (any::<u64>(), 0..48u32).prop_map(|(n, e)| DyadicProb::new(BigUint::from(n), e))
}

/// A uniformly drawn orientation of a shape with at most 25 edges, plus raw
/// vertex selectors the properties reduce modulo the class sizes.
fn oriented() -> impl Strategy<Value = Orientation> {
    (1..=5u32, 1..=5u32).prop_flat_map(|(m, n)| {
        let shape = GraphShape::new(m, n).unwrap();
        let edges = (m * n) as u64;
        (0..(1u64 << edges)).prop_map(move |i| Orientation::from_index(shape, i).unwrap())
    })
}

fn vertex(shape: GraphShape, side: bool, raw: u32) -> Vertex {
    if side {
        Vertex::x(raw % shape.m())
    } else {
        Vertex::y(raw % shape.n())
    }
}

proptest! {
    #[test]
    fn dyadic_arithmetic_matches_rationals(a in dyadic(), b in dyadic(), c in any::<u64>(), ce in 0..48u32) {
        prop_assert_eq!(a.add(&b).to_rational(), a.to_rational() + b.to_rational());
        prop_assert_eq!(a.mul(&b).to_rational(), a.to_rational() * b.to_rational());
        let coeff = DyadicProb::new(BigUint::from(c), ce);
        prop_assert_eq!(
            a.mul_scaled(&BigUint::from(c), ce).to_rational(),
            a.to_rational() * coeff.to_rational()
        );
    }

    #[test]
    fn dyadic_form_is_canonical(a in dyadic(), b in dyadic()) {
        // after any operation the numerator is odd unless the exponent is 0
        for v in [a.add(&b), a.mul(&b)] {
            if v.exponent() > 0 {
                prop_assert!(v.numerator() % BigUint::from(2u32) == BigUint::one());
            }
            prop_assert!(!v.is_probability() || v.to_rational() <= num::BigRational::one());
        }
    }

    #[test]
    fn sign_of_rational_tracks_the_numerator(n in any::<i64>(), d in 1..=i64::MAX) {
        let r = num::BigRational::new(n.into(), d.into());
        let expected = match n {
            0 => Sign::Zero,
            _ if n < 0 => Sign::Negative,
            _ => Sign::Positive,
        };
        prop_assert_eq!(Sign::of_rational(&r), expected);
    }

    #[test]
    fn small_dyadics_convert_to_f64_exactly(n in 0..(1u64 << 52), e in 0..40u32) {
        let d = DyadicProb::new(BigUint::from(n), e);
        let want = n as f64 * 2f64.powi(-(e as i32));
        prop_assert_eq!(d.to_f64(), want);
        prop_assert_eq!(rational_to_f64(&d.to_rational()), want);
    }

    /// Interval arithmetic over dyadic-exact op sequences always encloses
    /// the exact value, and higher precision never widens the enclosure.
    #[test]
    fn intervals_enclose_exact_dyadic_sequences(
        start in dyadic(),
        ops in prop::collection::vec((0..2u8, dyadic()), 1..8),
    ) {
        let mut exact = start.clone();
        let mut coarse = Interval::from_dyadic(&start, 24);
        let mut fine = Interval::from_dyadic(&start, 96);
        for (op, d) in &ops {
            match op {
                0 => {
                    exact = exact.add(d);
                    coarse = coarse.add(&Interval::from_dyadic(d, 24), 24);
                    fine = fine.add(&Interval::from_dyadic(d, 96), 96);
                }
                _ => {
                    exact = exact.mul(d);
                    coarse = coarse.mul(&Interval::from_dyadic(d, 24), 24);
                    fine = fine.mul(&Interval::from_dyadic(d, 96), 96);
                }
            }
        }
        prop_assert!(coarse.contains_dyadic(&exact));
        prop_assert!(fine.contains_dyadic(&exact));
        // outward rounding at lower precision nests the fine interval inside
        prop_assert!(coarse.lo() <= fine.lo() && fine.hi() <= coarse.hi());
    }

    /// (a / b) * b must still enclose a: division rounds outward too.
    #[test]
    fn interval_division_round_trips(
        an in 1..=u64::MAX, ae in 0..32u32,
        bn in 1..=u64::MAX, be in 0..32u32,
    ) {
        let a = DyadicProb::new(BigUint::from(an), ae);
        let b = DyadicProb::new(BigUint::from(bn), be);
        let ia = Interval::from_dyadic(&a, 64);
        let ib = Interval::from_dyadic(&b, 64);
        let q = ia.div(&ib, 64);
        prop_assert!(q.mul(&ib, 64).contains_dyadic(&a));
        prop_assert!(q.width() >= 0.0);
    }

    #[test]
    fn orientation_index_round_trips(o in oriented()) {
        let idx = o.to_index().unwrap();
        let back = Orientation::from_index(o.shape(), idx).unwrap();
        prop_assert_eq!(back.to_index().unwrap(), idx);
        for i in 0..o.shape().m() {
            for j in 0..o.shape().n() {
                prop_assert_eq!(back.flag(i, j), o.flag(i, j));
            }
        }
    }

    #[test]
    fn reversal_is_an_involution_that_swaps_reachability(
        o in oriented(),
        s1 in any::<bool>(), r1 in any::<u32>(),
        s2 in any::<bool>(), r2 in any::<u32>(),
    ) {
        let rev = o.reverse();
        prop_assert_eq!(rev.reverse().to_index().unwrap(), o.to_index().unwrap());
        let u = vertex(o.shape(), s1, r1);
        let v = vertex(o.shape(), s2, r2);
        prop_assert_eq!(o.reaches(u, v), rev.reaches(v, u));
    }

    #[test]
    fn relabeling_preserves_reachability(
        o in oriented(),
        seed in any::<u64>(),
        s1 in any::<bool>(), r1 in any::<u32>(),
        s2 in any::<bool>(), r2 in any::<u32>(),
    ) {
        // cheap seeded Fisher-Yates so the permutations vary with the case
        let perm = |len: u32, mut state: u64| -> Vec<u32> {
            let mut p: Vec<u32> = (0..len).collect();
            for i in (1..p.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                p.swap(i, (state >> 33) as usize % (i + 1));
            }
            p
        };
        let (px, py) = (perm(o.shape().m(), seed), perm(o.shape().n(), seed ^ 0x9e3779b97f4a7c15));
        let relabeled = o.relabel(&px, &py).unwrap();
        let u = vertex(o.shape(), s1, r1);
        let v = vertex(o.shape(), s2, r2);
        // vertex i of the relabeled orientation plays the role perm[i] had
        let map = |w: Vertex| match w.side {
            Side::X => Vertex::x(px[w.index as usize]),
            Side::Y => Vertex::y(py[w.index as usize]),
        };
        prop_assert_eq!(relabeled.reaches(u, v), o.reaches(map(u), map(v)));
    }

    #[test]
    fn single_atom_events_hold_exactly_when_unreachable(
        o in oriented(),
        s1 in any::<bool>(), r1 in any::<u32>(),
        s2 in any::<bool>(), r2 in any::<u32>(),
    ) {
        let u = vertex(o.shape(), s1, r1);
        let v = vertex(o.shape(), s2, r2);
        prop_assume!(u != v);
        let event = AvoidanceEvent::new(o.shape(), vec![(u, v)]).unwrap();
        prop_assert_eq!(event.holds(&o), !o.reaches(u, v));
    }
}
