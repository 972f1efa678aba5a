use super::quadric::{quadric_count_bruteforce, ClassFilter, QuadricFiber};
use super::*;
use crate::denefpas::{parse, Ball};
use crate::localfield::{FieldSpec, LocalElement, SquareClass};
use crate::{q_int, q_ratio};

fn qp5() -> FieldSpec {
    FieldSpec::qp(5, 16).unwrap()
}

fn ft5() -> FieldSpec {
    FieldSpec::fpt(5, 16).unwrap()
}

#[test]
fn measure_normalization() {
    let spec = qp5();
    let s = parse("vf x; ord(x) >= 0").unwrap();
    let r = measure(&s, &[Ball::unit(spec)], 2, spec).unwrap();
    assert_eq!(r.value, q_int(1));
    assert!(r.stable);
}

#[test]
fn measure_depth_two_lattice() {
    let spec = qp5();
    let s = parse("vf x; ord(x) >= 2").unwrap();
    let r = measure(&s, &[Ball::unit(spec)], 3, spec).unwrap();
    assert_eq!(r.value, q_ratio(1, 25));
    assert!(r.stable);
}

#[test]
fn measure_ac_set_truncates_with_flag() {
    // {x in O : ac x = 1} has measure 1/(p-1) as a shell series; at depth k
    // the enumeration sees (1 - p^-k)/(p-1) and must flag instability.
    let spec = qp5();
    let s = parse("vf x; ac(x) = 1").unwrap();
    let r = measure(&s, &[Ball::unit(spec)], 3, spec).unwrap();
    let expected = (q_int(1) - crate::q_pow(5, -3)) / q_int(4);
    assert_eq!(r.value, expected);
    assert!(!r.stable);
    // Bounding the shell range makes it exactly stable: measure 1/(p-1) - tail.
    let s = parse("vf x; ac(x) = 1 && ord(x) <= 2").unwrap();
    let r = measure(&s, &[Ball::unit(spec)], 4, spec).unwrap();
    assert_eq!(r.value, expected);
    assert!(r.stable);
}

#[test]
fn measure_additivity_on_disjoint_union() {
    let spec = qp5();
    let a = parse("vf x; ord(x) = 0 && ac(x) = 1").unwrap();
    let b = parse("vf x; ord(x) = 1").unwrap();
    let union = parse("vf x; (ord(x) = 0 && ac(x) = 1) || ord(x) = 1").unwrap();
    let box_ = [Ball::unit(spec)];
    let ra = measure(&a, &box_, 3, spec).unwrap();
    let rb = measure(&b, &box_, 3, spec).unwrap();
    let ru = measure(&union, &box_, 3, spec).unwrap();
    assert_eq!(ru.value, ra.value + rb.value);
    assert!(ru.stable);
}

#[test]
fn measure_translation_and_scaling_invariance() {
    let spec = qp5();
    // Translation: {ord(x - 3) >= 1} inside 3 + O equals {ord x >= 1} in O.
    let s0 = parse("vf x; ord(x) >= 1").unwrap();
    let st = parse("vf x; ord(x - 3) >= 1").unwrap();
    let m0 = measure(&s0, &[Ball::unit(spec)], 2, spec).unwrap();
    let mt = measure(
        &st,
        &[Ball::new(LocalElement::from_integer(spec, 3), 0)],
        2,
        spec,
    )
    .unwrap();
    assert_eq!(m0.value, mt.value);
    // Scaling by pi: measure multiplies by p^-1 per variable.
    let s1 = parse("vf x; ord(x) >= 2").unwrap();
    let m1 = measure(&s1, &[Ball::at_origin(spec, 1)], 2, spec).unwrap();
    assert_eq!(m1.value, m0.value * crate::q_pow(5, -1));
}

#[test]
fn integrate_constant_is_measure() {
    let spec = qp5();
    let s = parse("vf x; ord(x) >= 1").unwrap();
    let f = Integrand::constant(q_int(1));
    let int = integrate(&f, &s, &[Ball::unit(spec)], 3, spec).unwrap();
    let mes = measure(&s, &[Ball::unit(spec)], 3, spec).unwrap();
    assert_eq!(int.value, mes.value);
}

#[test]
fn integrate_shell_weighted() {
    // Integrating |x|^-1 = p^(+ord x) over 1 <= ord x <= 2 at p = 5:
    // shell volumes 4/25 and 4/125 weighted by 5 and 25: 4/5 + 4/5 = 8/5.
    let spec = qp5();
    let s = parse("vf x; ord(x) >= 1 && ord(x) <= 2").unwrap();
    let f = Integrand {
        terms: vec![IntegrandTerm {
            coeff: q_int(1),
            ord_factor: Some((1, crate::denefpas::VfTerm::Var("x".into()))),
            support: None,
        }],
    };
    let r = integrate(&f, &s, &[Ball::unit(spec)], 3, spec).unwrap();
    assert_eq!(r.value, q_ratio(8, 5));
    assert!(r.stable);
}

#[test]
fn integrate_off_support_is_zero() {
    let spec = qp5();
    let s = parse("vf x; ord(x) >= 1").unwrap();
    let off = parse("vf x; ord(x) <= -1").unwrap();
    let f = Integrand {
        terms: vec![IntegrandTerm { coeff: q_int(1), ord_factor: None, support: Some(off) }],
    };
    let r = integrate(&f, &s, &[Ball::unit(spec)], 2, spec).unwrap();
    assert!(r.value.is_zero());
}

#[test]
fn integrate_refine_or_fail_on_vanishing_ord() {
    let spec = qp5();
    let s = parse("vf x; ord(x) >= 0").unwrap();
    // ord(x) of the zero representative is +infinity: must refine-or-fail.
    let f = Integrand {
        terms: vec![IntegrandTerm {
            coeff: q_int(1),
            ord_factor: Some((-1, crate::denefpas::VfTerm::Var("x".into()))),
            support: None,
        }],
    };
    assert!(matches!(
        integrate(&f, &s, &[Ball::unit(spec)], 2, spec),
        Err(Error::RefineNeeded(_))
    ));
}

#[test]
fn leray_projection_example() {
    // c(a, b, x) = x with target 0 over O^3: the fiber is O^2, measure 1.
    for spec in [qp5(), ft5()] {
        let fiber = LerayFiberSpec {
            map: FiberMap::Polynomial {
                map: crate::denefpas::VfTerm::Var("x".into()),
                vars: vec!["a".into(), "b".into(), "x".into()],
            },
            target: LocalElement::zero(spec),
            boxes: vec![Ball::unit(spec); 3],
            restrict: None,
        };
        let r = leray_fiber_measure(&fiber, 2, spec).unwrap();
        assert_eq!(r.value, q_int(1));
        assert!(r.stable);
    }
}

#[test]
fn leray_valuation_incompatible_target_is_zero() {
    // target of odd small valuation cannot meet det over pi O-balls:
    // on (pi O)^3 every det value has ord >= 2.
    let spec = qp5();
    let fiber = LerayFiberSpec {
        map: FiberMap::Sl2Det { filter: ClassFilter::All },
        target: LocalElement::from_integer(spec, 5),
        boxes: vec![Ball::at_origin(spec, 1); 3],
        restrict: None,
    };
    let r = leray_fiber_measure(&fiber, 3, spec).unwrap();
    assert!(r.value.is_zero());
    assert!(r.stable);
}

/// The frozen quadric regression value: det = -a^2 - bc = 5 over O^3 at p=5.
/// Depths 2, 3, 4 agree (value from the brute-force oracle).
#[test]
fn leray_quadric_frozen_baseline() {
    let spec = qp5();
    let fiber = LerayFiberSpec {
        map: FiberMap::Sl2Det { filter: ClassFilter::All },
        target: LocalElement::from_integer(spec, 5),
        boxes: vec![Ball::unit(spec); 3],
        restrict: None,
    };
    let r2 = leray_fiber_measure(&fiber, 2, spec).unwrap();
    let r3 = leray_fiber_measure(&fiber, 3, spec).unwrap();
    assert!(r2.stable && r3.stable);
    assert_eq!(r2.value, r3.value);
    // Cross-check the fast path against brute force at m = 2 and 3.
    let qf = QuadricFiber {
        spec,
        delta: LocalElement::from_integer(spec, -5),
        ball_a: Ball::unit(spec),
        ball_b: Ball::unit(spec),
        ball_c: Ball::unit(spec),
        filter: ClassFilter::All,
    };
    for m in [2usize, 3] {
        assert_eq!(qf.count(m).unwrap(), quadric_count_bruteforce(&qf, m).unwrap());
    }
}

fn delta_cases(spec: FieldSpec) -> Vec<LocalElement> {
    let u = spec.nonresidue() as i64;
    let p = spec.p as i64;
    vec![
        LocalElement::zero(spec),
        LocalElement::from_integer(spec, 1),
        LocalElement::from_integer(spec, u),
        LocalElement::from_integer(spec, p),
        LocalElement::from_integer(spec, u * p),
        LocalElement::from_integer(spec, p * p),
        LocalElement::from_integer(spec, u * p * p),
    ]
}

fn ball_cases(spec: FieldSpec) -> Vec<[Ball; 3]> {
    let u = spec.nonresidue() as i64;
    let one = LocalElement::from_integer(spec, 1);
    let uu = LocalElement::from_integer(spec, u);
    vec![
        [Ball::unit(spec), Ball::unit(spec), Ball::unit(spec)],
        [Ball::at_origin(spec, 1), Ball::at_origin(spec, 1), Ball::at_origin(spec, 1)],
        [Ball::at_origin(spec, 1), Ball::new(one.clone(), 1), Ball::at_origin(spec, 1)],
        [Ball::at_origin(spec, 1), Ball::new(uu, 1), Ball::at_origin(spec, 1)],
        [Ball::at_origin(spec, 1), Ball::new(one, 2), Ball::at_origin(spec, 2)],
        [Ball::at_origin(spec, 2), Ball::at_origin(spec, 0), Ball::at_origin(spec, 1)],
    ]
}

#[test]
fn quadric_fast_path_matches_bruteforce() {
    for spec in [FieldSpec::qp(3, 16).unwrap(), qp5(), FieldSpec::fpt(3, 16).unwrap(), ft5()] {
        let mut filters = vec![ClassFilter::All];
        for sc in SquareClass::ALL {
            filters.push(ClassFilter::ConeLabel(sc));
        }
        for delta in delta_cases(spec) {
            let delta_class = if delta.is_zero() { None } else { Some(delta.square_class().unwrap()) };
            let mut local_filters = filters.clone();
            if let Some(dc) = delta_class {
                for sign in [1i8, -1] {
                    local_filters.push(ClassFilter::Sign { delta: dc, sign });
                }
            }
            for balls in ball_cases(spec) {
                for filter in &local_filters {
                    for m in [2usize, 3] {
                        if let ClassFilter::Sign { .. } = filter {
                            // Sign filters need the modulus past ord(Delta).
                            let v = delta.ord().unwrap_or(i64::MAX);
                            if (m as i64) < v + 1 {
                                continue;
                            }
                        }
                        if balls.iter().any(|b| b.radius as usize > m) {
                            continue;
                        }
                        let qf = QuadricFiber {
                            spec,
                            delta: delta.clone(),
                            ball_a: balls[0].clone(),
                            ball_b: balls[1].clone(),
                            ball_c: balls[2].clone(),
                            filter: *filter,
                        };
                        let fast = qf.count(m).unwrap();
                        let slow = quadric_count_bruteforce(&qf, m).unwrap();
                        assert_eq!(
                            fast, slow,
                            "mismatch: {:?} p={} m={m} delta={} filter={filter:?} balls={balls:?}",
                            spec.kind, spec.p, delta
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn transfer_compare_measure_example() {
    let report = transfer_compare(5, 16, |spec| {
        let s = parse("vf x; ord(x) >= 1").unwrap();
        measure(&s, &[Ball::unit(spec)], 2, spec)
    })
    .unwrap();
    assert!(report.agree);
    assert_eq!(report.value_mixed, q_ratio(1, 5));
    assert_eq!(report.value_equal, q_ratio(1, 5));
}

#[test]
fn transfer_compare_rejects_p2() {
    let r = transfer_compare(2, 16, |spec| {
        let s = parse("vf x; ord(x) >= 1").unwrap();
        measure(&s, &[Ball::unit(spec)], 2, spec)
    });
    assert!(r.is_err());
}

#[test]
fn vanishing_scan() {
    let spec = qp5();
    // Identically zero integrand vanishes everywhere.
    let zero_family = |_a: i64| -> Result<IntegralResult> {
        Ok(IntegralResult { value: q_int(0), depth: 2, stable: true, field: spec })
    };
    assert_eq!(
        asymptotic_vanishing_check((0, 5), zero_family).unwrap(),
        VanishingReport::VanishesOnRange { lo: 0, hi: 5 }
    );
    // Indicator of {ord x = 3} against supports {ord x >= a}.
    let family = |a: i64| -> Result<IntegralResult> {
        let s = parse(&format!("vf x; ord(x) = 3 && ord(x) >= {a}")).unwrap();
        measure(&s, &[Ball::unit(spec)], 4, spec)
    };
    match asymptotic_vanishing_check((0, 8), family).unwrap() {
        VanishingReport::FirstNonzero { a, .. } => assert!(a <= 3),
        other => panic!("expected a nonzero value, got {other:?}"),
    }
    assert_eq!(
        asymptotic_vanishing_check((4, 8), family).unwrap(),
        VanishingReport::VanishesOnRange { lo: 4, hi: 8 }
    );
}

#[test]
fn quadric_measure_stability() {
    // Unit-target fiber over the full lattice stabilizes immediately.
    for spec in [qp5(), ft5()] {
        let qf = QuadricFiber {
            spec,
            delta: LocalElement::from_integer(spec, 1),
            ball_a: Ball::unit(spec),
            ball_b: Ball::unit(spec),
            ball_c: Ball::unit(spec),
            filter: ClassFilter::All,
        };
        let (v2, stable) = qf.measure(2).unwrap();
        assert!(stable);
        let (v3, stable3) = qf.measure(3).unwrap();
        assert!(stable3);
        assert_eq!(v2, v3);
    }
}


#[test]
fn leray_partition_additivity() {
    // Summing fiber counts over a partition of the a-coordinate ball into
    // its p depth-1 cosets reproduces the unpartitioned value.
    let spec = qp5();
    let full = QuadricFiber {
        spec,
        delta: LocalElement::from_integer(spec, -5),
        ball_a: Ball::unit(spec),
        ball_b: Ball::unit(spec),
        ball_c: Ball::unit(spec),
        filter: ClassFilter::All,
    };
    let m = 3;
    let total = full.count(m).unwrap();
    let mut sum = 0u128;
    for r in 0..5i64 {
        let part = QuadricFiber {
            ball_a: Ball::new(LocalElement::from_integer(spec, r), 1),
            ..full.clone()
        };
        sum += part.count(m).unwrap();
    }
    assert_eq!(total, sum);
}

#[test]
fn leray_polynomial_with_restriction() {
    // Restricting the projection fiber {x = 0} to {ord a >= 1} scales the
    // measure by 1/p.
    let spec = qp5();
    let fiber = LerayFiberSpec {
        map: FiberMap::Polynomial {
            map: crate::denefpas::VfTerm::Var("x".into()),
            vars: vec!["a".into(), "b".into(), "x".into()],
        },
        target: LocalElement::zero(spec),
        boxes: vec![Ball::unit(spec); 3],
        restrict: Some(parse("vf a; ord(a) >= 1").unwrap()),
    };
    let r = leray_fiber_measure(&fiber, 2, spec).unwrap();
    assert_eq!(r.value, q_ratio(1, 5));
    assert!(r.stable);
}
