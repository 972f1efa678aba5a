//! Property tests for the arithmetic and evaluation laws each module
//! promises on sampled inputs.

use germlab_core::denefpas::{parse, Env, Evaluator, Value};
use germlab_core::localfield::{FieldKind, FieldSpec, LocalElement};
use proptest::prelude::*;

fn specs() -> Vec<FieldSpec> {
    vec![
        FieldSpec::qp(5, 12).unwrap(),
        FieldSpec::qp(7, 12).unwrap(),
        FieldSpec::fpt(5, 12).unwrap(),
    ]
}

fn digit_vec(p: u64, max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..p, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// ord is additive and ac multiplicative on nonzero products.
    #[test]
    fn ord_ac_laws(digits_a in digit_vec(5, 6), digits_b in digit_vec(5, 6), va in -3i64..4, vb in -3i64..4) {
        for spec in specs() {
            let p = spec.p;
            let clip = |ds: &Vec<u64>| -> Vec<u64> { ds.iter().map(|d| d % p).collect() };
            let a = LocalElement::from_digits(spec, va, clip(&digits_a), true);
            let b = LocalElement::from_digits(spec, vb, clip(&digits_b), true);
            let (Ok(a), Ok(b)) = (a, b) else { continue };
            if a.is_zero() || b.is_zero() { continue; }
            let prod = a.mul(&b).unwrap();
            prop_assert_eq!(prod.ord().unwrap(), a.ord().unwrap() + b.ord().unwrap());
            prop_assert_eq!(prod.ac(), a.ac() * b.ac() % p);
        }
    }

    /// The ultrametric inequality, with equality at distinct valuations.
    #[test]
    fn ultrametric(digits_a in digit_vec(5, 6), digits_b in digit_vec(5, 6), va in -3i64..4, vb in -3i64..4) {
        for spec in specs() {
            let p = spec.p;
            let clip = |ds: &Vec<u64>| -> Vec<u64> { ds.iter().map(|d| d % p).collect() };
            let (Ok(a), Ok(b)) = (
                LocalElement::from_digits(spec, va, clip(&digits_a), true),
                LocalElement::from_digits(spec, vb, clip(&digits_b), true),
            ) else { continue };
            if a.is_zero() || b.is_zero() { continue; }
            let Ok(sum) = a.add(&b) else { continue };
            let (oa, ob) = (a.ord().unwrap(), b.ord().unwrap());
            match sum.ord() {
                None => prop_assert_eq!(oa, ob),
                Some(os) => {
                    prop_assert!(os >= oa.min(ob));
                    if oa != ob { prop_assert_eq!(os, oa.min(ob)); }
                }
            }
        }
    }

    /// Square classes are constant on square multiples.
    #[test]
    fn square_class_square_invariance(digits in digit_vec(5, 4), v in -2i64..3, sq in 1i64..40) {
        for spec in specs() {
            let p = spec.p;
            let clip: Vec<u64> = digits.iter().map(|d| d % p).collect();
            let Ok(r) = LocalElement::from_digits(spec, v, clip, true) else { continue };
            if r.is_zero() { continue; }
            let s = LocalElement::from_integer(spec, sq);
            if s.is_zero() { continue; }
            let scaled = r.mul(&s).unwrap().mul(&s).unwrap();
            prop_assert_eq!(scaled.square_class().unwrap(), r.square_class().unwrap());
        }
    }

    /// Literal round-trip: print then parse is the identity on the data.
    #[test]
    fn literal_round_trip(digits in digit_vec(7, 8), v in -5i64..6, exact in any::<bool>()) {
        for spec in [FieldSpec::qp(7, 12).unwrap(), FieldSpec::fpt(7, 12).unwrap()] {
            let Ok(e) = LocalElement::from_digits(spec, v, digits.clone(), exact) else { continue };
            let printed = germlab_core::localfield::format_element(&e);
            let reparsed = germlab_core::localfield::parse_element(spec, &printed).unwrap();
            prop_assert_eq!(germlab_core::localfield::format_element(&reparsed), printed);
        }
    }

    /// De Morgan pointwise over sampled environments.
    #[test]
    fn de_morgan(n in 1i64..200) {
        let spec = FieldSpec::qp(5, 12).unwrap();
        let eval = Evaluator::new(spec, 2);
        let a = parse("vf x; ord(x) >= 1").unwrap().formula;
        let b = parse("vf x; ac(x) = 2").unwrap().formula;
        let lhs = a.clone().and(b.clone()).not();
        let rhs = a.not().or(b.not());
        let mut env = Env::new();
        env.insert("x".into(), Value::Vf(LocalElement::from_integer(spec, n)));
        prop_assert_eq!(
            eval.evaluate(&lhs, &env).unwrap().value,
            eval.evaluate(&rhs, &env).unwrap().value
        );
    }

    /// Carry-free digit agreement between the two characteristics.
    #[test]
    fn carry_free_agreement(da in digit_vec(7, 5), db in digit_vec(7, 5)) {
        let p = 7u64;
        // Force digit sums below p so no carries can occur.
        let da: Vec<u64> = da.iter().map(|d| d % (p / 2)).collect();
        let db: Vec<u64> = db.iter().map(|d| d % (p / 2)).collect();
        let qp = FieldSpec::qp(p, 12).unwrap();
        let ft = FieldSpec::fpt(p, 12).unwrap();
        let (Ok(aq), Ok(bq), Ok(at), Ok(bt)) = (
            LocalElement::from_digits(qp, 0, da.clone(), true),
            LocalElement::from_digits(qp, 0, db.clone(), true),
            LocalElement::from_digits(ft, 0, da, true),
            LocalElement::from_digits(ft, 0, db, true),
        ) else { return Ok(()); };
        if aq.is_zero() || bq.is_zero() { return Ok(()); }
        let sq = aq.add(&bq).unwrap();
        let st = at.add(&bt).unwrap();
        prop_assert_eq!(sq.digits(), st.digits());
        prop_assert_eq!(sq.ord(), st.ord());
        let _ = FieldKind::MixedChar;
    }
}
