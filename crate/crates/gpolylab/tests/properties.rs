//! Property suites for the algebraic core: scalar field laws, certified
//! sign/interval behavior, bracket identities, canonical-form stability,
//! printer/parser round trips, and finite-sums additivity.

use num_bigint::BigInt;
use proptest::prelude::*;

use gpolylab::gpeval::{self, Flavor};
use gpolylab::gpexpr::GpExpr;
use gpolylab::ipsets::{self, FSGenerators, FiniteIndexSet};
use gpolylab::scalar::{ExactScalar, Rational, Sign};

fn rational_scalar() -> impl Strategy<Value = ExactScalar> {
    (-40i64..=40, 1i64..=12).prop_map(|(p, q)| ExactScalar::from_ratio(p, q))
}

fn scalar() -> impl Strategy<Value = ExactScalar> {
    (rational_scalar(), 0usize..=5, -5i64..=5, 1i64..=3).prop_map(|(q, pick, num, den)| {
        let irr = match pick {
            0 => return q,
            1 => ExactScalar::sqrt(2),
            2 => ExactScalar::sqrt(3),
            3 => ExactScalar::sqrt(5),
            4 => ExactScalar::pi(),
            _ => ExactScalar::e(),
        };
        q.add(&ExactScalar::from_ratio(num, den).mul(&irr))
    })
}

proptest! {
    #[test]
    fn scalar_ring_laws(a in scalar(), b in scalar(), c in scalar()) {
        let left = a.add(&b).add(&c);
        let right = a.add(&b.add(&c));
        prop_assert_eq!(left, right);

        prop_assert_eq!(a.mul(&b), b.mul(&a));

        let distributed = a.mul(&b).add(&a.mul(&c));
        prop_assert_eq!(a.mul(&b.add(&c)), distributed);

        // canonical representation makes equality syntactic
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn scalar_sign_antisymmetry(a in scalar()) {
        let s = a.sign().unwrap();
        let neg = a.neg().sign().unwrap();
        prop_assert_eq!(s.as_i8(), -neg.as_i8());
        if s == Sign::Zero {
            prop_assert!(a.is_zero());
        }
    }

    #[test]
    fn interval_refinement_nests(a in scalar()) {
        let coarse = a.enclosure(32);
        let fine = a.enclosure(128);
        prop_assert!(fine.lo >= coarse.lo);
        prop_assert!(fine.hi <= coarse.hi);
        prop_assert!(fine.width() <= coarse.width());
    }

    #[test]
    fn nearest_bracket_shift_invariance(a in scalar(), k in -50i64..=50) {
        let shifted = a.add(&ExactScalar::from_int(k));
        let ni_a = gpeval::nearest_int(&a).unwrap();
        prop_assert_eq!(gpeval::nearest_int(&shifted).unwrap(), ni_a + BigInt::from(k));
        // {a} lands in (-1/2, 1/2]
        let frac = gpeval::frac(&a, Flavor::Nearest).unwrap().value;
        let half = ExactScalar::from_ratio(1, 2);
        prop_assert!(frac.sub(&half).sign().unwrap() != Sign::Positive);
        prop_assert!(frac.add(&half).sign().unwrap() == Sign::Positive);
    }

    #[test]
    fn floor_bracket_window(a in scalar()) {
        let frac = gpeval::frac(&a, Flavor::Floor).unwrap().value;
        let one = ExactScalar::one();
        prop_assert!(frac.sign().unwrap() != Sign::Negative);
        prop_assert!(frac.sub(&one).sign().unwrap() == Sign::Negative);
    }

    #[test]
    fn window_test_matches_fraction(a in scalar(), num in 1i64..=4, den in 9i64..=30) {
        let delta = Rational::new(num.into(), den.into());
        prop_assume!(delta < Rational::new(1.into(), 2.into()));
        let inside = gpeval::frac_in_window(&a, &delta).unwrap();
        let frac = gpeval::frac(&a, Flavor::Nearest).unwrap().value;
        let d = ExactScalar::from_rational(delta);
        let expect = frac.sub(&d).sign().unwrap() == Sign::Negative
            && frac.add(&d).sign().unwrap() == Sign::Positive;
        prop_assert_eq!(inside, expect);
    }
}

fn expr() -> impl Strategy<Value = GpExpr> {
    let coeff = (-6i64..=6, 1i64..=4, 0usize..=3).prop_map(|(p, q, pick)| {
        let base = ExactScalar::from_ratio(p, q);
        match pick {
            0 => base,
            1 => base.mul(&ExactScalar::sqrt(2)),
            2 => base.mul(&ExactScalar::sqrt(3)),
            _ => base.mul(&ExactScalar::pi()),
        }
    });
    let leaf = (coeff, 1u32..=3).prop_map(|(c, k)| GpExpr::monomial(c, k));
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(GpExpr::sum),
            prop::collection::vec(inner.clone(), 2..=2).prop_map(GpExpr::product),
            inner.clone().prop_map(GpExpr::ni),
            inner.clone().prop_map(GpExpr::fl),
            (inner, -5i64..=5).prop_map(|(e, c)| {
                GpExpr::ScalarMul(ExactScalar::from_int(c), Box::new(e))
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn print_parse_round_trip(p in expr()) {
        let canon = p.canonicalize();
        let text = canon.print();
        let back = GpExpr::parse(&text).unwrap();
        prop_assert_eq!(back, canon);
    }

    #[test]
    fn canonicalization_is_idempotent_and_value_preserving(p in expr(), n in -12i64..=12) {
        let canon = p.canonicalize();
        prop_assert_eq!(canon.canonicalize(), canon.clone());
        let nn = BigInt::from(n);
        let before = gpeval::eval_real(&p, &nn).unwrap();
        let after = gpeval::eval_real(&canon, &nn).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn every_expression_vanishes_at_zero(p in expr()) {
        let v = gpeval::eval_real(&p, &BigInt::from(0)).unwrap();
        prop_assert!(v.is_zero());
    }

    #[test]
    fn sum_evaluation_is_additive(p in expr(), q in expr(), n in -10i64..=10) {
        let nn = BigInt::from(n);
        let s = GpExpr::sum(vec![p.clone(), q.clone()]);
        let lhs = gpeval::eval_real(&s, &nn).unwrap();
        let rhs = gpeval::eval_real(&p, &nn).unwrap().add(&gpeval::eval_real(&q, &nn).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn degree_is_subadditive(p in expr(), q in expr()) {
        let prod = GpExpr::product(vec![p.clone(), q.clone()]).canonicalize();
        if !prod.is_zero() {
            prop_assert!(prod.degree() <= p.degree() + q.degree());
        }
    }
}

proptest! {
    #[test]
    fn finite_sums_are_additive_on_disjoint_supports(
        vals in prop::collection::vec((1i64..=60).prop_union(-60i64..=-1), 2..=10),
        mask_a in 1u64..=255,
        mask_b in 1u64..=255,
    ) {
        let len = vals.len();
        let cap = (1u64 << len) - 1;
        let a = mask_a & cap;
        let b = mask_b & cap & !a;
        prop_assume!(a != 0 && b != 0);
        let g = FSGenerators::new(vals).unwrap();
        let ia = FiniteIndexSet::from_bitmask(a).unwrap();
        let ib = FiniteIndexSet::from_bitmask(b).unwrap();
        prop_assert!(ia.disjoint(&ib));
        let union = ia.union(&ib);
        let lhs = ipsets::n_alpha(&g, &union).unwrap();
        let rhs = ipsets::n_alpha(&g, &ia).unwrap() + ipsets::n_alpha(&g, &ib).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
