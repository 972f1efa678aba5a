use super::residue::ResidueRing;
use super::*;

fn qp5() -> FieldSpec {
    FieldSpec::qp(5, 8).unwrap()
}

fn ft5() -> FieldSpec {
    FieldSpec::fpt(5, 8).unwrap()
}

fn int(spec: FieldSpec, n: i64) -> LocalElement {
    LocalElement::from_integer(spec, n)
}

#[test]
fn spec_validation() {
    assert!(FieldSpec::qp(2, 8).is_err());
    assert!(FieldSpec::qp(9, 8).is_err());
    assert!(FieldSpec::qp(5, 1).is_err());
    assert!(FieldSpec::qp(3, 4).is_ok());
    assert!(FieldSpec::qp(3, 4).unwrap().check_endoscopy_ready().is_err());
    assert!(FieldSpec::qp(5, 4).unwrap().check_endoscopy_ready().is_ok());
}

#[test]
fn difference_of_squares() {
    // (1+5)(1-5) = 1 - 5^2 in Q_5.
    let s = qp5();
    let lhs = int(s, 6).mul(&int(s, -4)).unwrap();
    let rhs = int(s, -24);
    assert!(lhs.agrees_on_window(&rhs).unwrap());
    assert_eq!(lhs.ord(), Some(0));
}

#[test]
fn uniformizer_inverse_in_equal_char() {
    let s = ft5();
    let t = LocalElement::uniformizer(s);
    let prod = t.mul(&t.inv().unwrap()).unwrap();
    assert!(prod.eq_checked(&LocalElement::one(s)).unwrap());
}

#[test]
fn base_p_carry() {
    // 3 + 4 = 2 + 1*5 in Q_5.
    let s = qp5();
    let sum = int(s, 3).add(&int(s, 4)).unwrap();
    assert_eq!(sum.ord(), Some(0));
    assert_eq!(sum.digits()[..2], [2, 1]);
    // No carry in F_5((t)): 3 + 4 = 2.
    let s = ft5();
    let sum = int(s, 3).add(&int(s, 4)).unwrap();
    assert!(sum.eq_checked(&int(s, 2)).unwrap());
}

#[test]
fn ord_and_ac() {
    let s = qp5();
    // a = 3*5^2
    let a = int(s, 75);
    assert_eq!(a.ord(), Some(2));
    assert_eq!(a.ac(), 3);
    // zero conventions
    let z = LocalElement::zero(s);
    assert_eq!(z.ord(), None);
    assert_eq!(z.ac(), 0);
    // a = t^-1*(2 + t) in F_5((t))
    let s = ft5();
    let a = parse_element(s, "t^-1*(2 + 1*t)").unwrap();
    assert_eq!(a.ord(), Some(-1));
    assert_eq!(a.ac(), 2);
}

#[test]
fn ord_additive_ac_multiplicative() {
    let s = qp5();
    for (x, y) in [(7i64, 30i64), (12, 45), (250, 13), (6, 6)] {
        let a = int(s, x);
        let b = int(s, y);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.ord().unwrap(), a.ord().unwrap() + b.ord().unwrap());
        assert_eq!(prod.ac(), a.ac() * b.ac() % s.p);
    }
}

#[test]
fn ultrametric_inequality() {
    let s = qp5();
    for (x, y) in [(3i64, 7i64), (25, 10), (5, 120), (75, 50)] {
        let a = int(s, x);
        let b = int(s, y);
        let sum = a.add(&b).unwrap();
        let (va, vb) = (a.ord().unwrap(), b.ord().unwrap());
        let vs = sum.ord().unwrap();
        assert!(vs >= va.min(vb));
        if va != vb {
            assert_eq!(vs, va.min(vb));
        }
    }
}

#[test]
fn exact_cancellation_gives_zero_but_inexact_errors() {
    let s = qp5();
    let a = int(s, 17);
    assert!(a.sub(&a).unwrap().is_zero());
    // 1/3 is inexact; (1/3 - 1/3) cannot be proven zero.
    let third = int(s, 3).inv().unwrap();
    assert!(matches!(third.sub(&third), Err(Error::PrecisionLoss { .. })));
}

#[test]
fn inversion_of_zero_rejected() {
    let s = qp5();
    assert_eq!(LocalElement::zero(s).inv().unwrap_err(), Error::DivisionByZero);
}

#[test]
fn spec_mismatch_rejected() {
    let a = int(qp5(), 1);
    let b = int(ft5(), 1);
    assert!(matches!(a.add(&b), Err(Error::SpecMismatch(_))));
}

#[test]
fn inverse_roundtrip() {
    for spec in [qp5(), ft5(), FieldSpec::qp(7, 8).unwrap()] {
        for n in [1i64, 2, 3, 6, 7, 30] {
            let a = int(spec, n);
            if a.is_zero() {
                continue;
            }
            let prod = a.mul(&a.inv().unwrap()).unwrap();
            assert!(
                prod.agrees_on_window(&LocalElement::one(spec)).unwrap(),
                "n={n} in {:?}: got {prod}",
                spec.kind
            );
        }
    }
}

#[test]
fn square_classes_small_cases() {
    let s = qp5();
    assert_eq!(int(s, 4).square_class().unwrap(), SquareClass::One);
    assert_eq!(int(s, 5).square_class().unwrap(), SquareClass::Pi);
    // 2 is a nonresidue mod 5: squares mod 5 are {1, 4}.
    let squares: Vec<u64> = (1..5u64).map(|x| x * x % 5).collect();
    assert!(!squares.contains(&2));
    assert_eq!(int(s, 2).square_class().unwrap(), SquareClass::U);
}

#[test]
fn square_class_constant_on_squares() {
    let s = qp5();
    for r in [2i64, 5, 7, 10, 30] {
        let rep = int(s, r);
        let base = rep.square_class().unwrap();
        for a in [2i64, 3, 6, 15] {
            let sq = int(s, a * a);
            let prod = sq.mul(&rep).unwrap();
            assert_eq!(prod.square_class().unwrap(), base, "a^2={} r={}", a * a, r);
        }
    }
}

#[test]
fn sqrt_examples() {
    let s = qp5();
    let two = int(s, 4).sqrt().unwrap();
    assert!(two.agrees_on_window(&int(s, 2)).unwrap());
    assert_eq!((two.ord(), two.ac()), (Some(0), 2));
    assert_eq!(int(s, 5).sqrt().unwrap_err(), Error::OddValuationSqrt);
    assert_eq!(int(s, 2).sqrt().unwrap_err(), Error::NonResidueSqrt);
    // Newton root of 6, squared back, agrees with 6 mod 5^4 and beyond.
    let six = int(s, 6);
    let r = six.sqrt().unwrap();
    let back = r.mul(&r).unwrap();
    let ring = ResidueRing::new(&s, 4).unwrap();
    assert_eq!(ring.reduce(&back).unwrap(), ring.reduce(&six).unwrap());
    assert!(back.agrees_on_window(&six).unwrap());
    // Branch choice: ac in 1..=(p-1)/2.
    assert!(r.ac() >= 1 && r.ac() <= 2);
}

#[test]
fn sqrt_in_equal_char() {
    let s = ft5();
    // 4 + t is a square in F_5((t)).
    let a = parse_element(s, "4 + 1*t").unwrap();
    let r = a.sqrt().unwrap();
    let back = r.mul(&r).unwrap();
    assert!(back.agrees_on_window(&a).unwrap());
}

/// Brute-force Hilbert symbol: z^2 = a x^2 + b y^2 has a primitive solution
/// mod p^3 after normalizing valuations into {0, 1}. Tame, p odd.
fn hilbert_oracle(spec: &FieldSpec, a: &LocalElement, b: &LocalElement) -> i8 {
    let norm = |x: &LocalElement| {
        let v = x.ord().unwrap();
        x.shift(-(v - v.rem_euclid(2)))
    };
    let (a, b) = (norm(a), norm(b));
    let ring = ResidueRing::new(spec, 3).unwrap();
    let ra = ring.reduce(&a).unwrap();
    let rb = ring.reduce(&b).unwrap();
    for x in 0..ring.size {
        for y in 0..ring.size {
            for z in 0..ring.size {
                if x % spec.p == 0 && y % spec.p == 0 && z % spec.p == 0 {
                    continue;
                }
                let lhs = ring.mul(z, z);
                let rhs = ring.add(ring.mul(ra, ring.mul(x, x)), ring.mul(rb, ring.mul(y, y)));
                if lhs == rhs {
                    return 1;
                }
            }
        }
    }
    -1
}

#[test]
fn hilbert_symbol_examples() {
    let s = qp5();
    // (a, -a) = 1 always.
    for n in [2i64, 5, 10, 7] {
        let a = int(s, n);
        let na = a.neg().unwrap();
        assert_eq!(a.hilbert_symbol(&na).unwrap(), 1, "(a,-a) for a={n}");
    }
    // Unit pairs are trivial for p odd.
    for (x, y) in [(2i64, 3i64), (2, 2), (3, 7), (1, 2)] {
        assert_eq!(int(s, x).hilbert_symbol(&int(s, y)).unwrap(), 1);
    }
    // (5, 2) = -1 since 2 is a nonresidue mod 5.
    assert_eq!(int(s, 5).hilbert_symbol(&int(s, 2)).unwrap(), -1);
}

#[test]
fn hilbert_symbol_matches_bruteforce() {
    for p in [5u64, 7] {
        let s = FieldSpec::qp(p, 8).unwrap();
        let u = s.nonresidue() as i64;
        let reps = [1i64, u, p as i64, u * p as i64];
        for &x in &reps {
            for &y in &reps {
                let a = int(s, x);
                let b = int(s, y);
                let fast = a.hilbert_symbol(&b).unwrap();
                let slow = hilbert_oracle(&s, &a, &b);
                assert_eq!(fast, slow, "({x},{y}) at p={p}");
            }
        }
    }
}

#[test]
fn hilbert_symmetric_and_bimultiplicative() {
    for spec in [qp5(), ft5()] {
        let u = spec.nonresidue();
        let reps: Vec<LocalElement> = SquareClass::ALL
            .iter()
            .map(|&c| class_representative(spec, c))
            .collect();
        let _ = u;
        for a in &reps {
            for b in &reps {
                let ab = a.hilbert_symbol(b).unwrap();
                assert_eq!(ab, b.hilbert_symbol(a).unwrap());
                for c in &reps {
                    let bc = b.mul(c).unwrap();
                    let lhs = a.hilbert_symbol(&bc).unwrap();
                    let rhs = ab * a.hilbert_symbol(c).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

#[test]
fn carry_free_digit_agreement() {
    // When all digit sums stay below p, both characteristics agree digitwise.
    let (sq, st) = (qp5(), ft5());
    let digits_a = vec![1u64, 2, 0, 1];
    let digits_b = vec![3u64, 2, 1, 0];
    let aq = LocalElement::from_digits(sq, 0, digits_a.clone(), true).unwrap();
    let bq = LocalElement::from_digits(sq, 0, digits_b.clone(), true).unwrap();
    let at = LocalElement::from_digits(st, 0, digits_a, true).unwrap();
    let bt = LocalElement::from_digits(st, 0, digits_b, true).unwrap();
    assert_eq!(aq.add(&bq).unwrap().digits(), at.add(&bt).unwrap().digits());
}

#[test]
fn literal_round_trip() {
    let cases = [
        (qp5(), "5^2*(3 + 1*5 + 0*5^2)"),
        (qp5(), "3 + 1*5"),
        (qp5(), "0"),
        (qp5(), "5"),
        (ft5(), "t^-1*(2 + 1*t)"),
        (ft5(), "4 + 1*t + 2*t^3"),
        (ft5(), "t^3"),
    ];
    for (spec, text) in cases {
        let e = parse_element(spec, text).unwrap();
        let printed = format_element(&e);
        let e2 = parse_element(spec, &printed).unwrap();
        assert_eq!(format_element(&e2), printed, "round-trip of `{text}`");
    }
    // Inexact elements round-trip through the O-marker.
    let third = int(qp5(), 3).inv().unwrap();
    let printed = format_element(&third);
    assert!(printed.contains("O("), "{printed}");
    let re = parse_element(qp5(), &printed).unwrap();
    assert_eq!(format_element(&re), printed);
}

#[test]
fn parse_errors_have_positions() {
    match parse_element(qp5(), "3 + *5") {
        Err(Error::Parse { pos, .. }) => assert!(pos > 0),
        other => panic!("expected parse error, got {other:?}"),
    }
}
