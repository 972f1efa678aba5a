//! Measures and integrals of definable sets and simple constructible
//! integrands over a concrete local field, by residue-ring coset enumeration
//! and Leray fiber counting, plus the two-field comparator.
//!
//! Normalization: vol(O) = 1 per valued-field coordinate. A fiber measure is
//! `N_m p^(-(n-1)m)` with `N_m` the congruence solution count at modulus m.
//! Every result carries its depth and a stability flag comparing one level
//! deeper; unstable values are returned flagged, never silently.

pub mod quadric;

pub use quadric::{ClassFilter, QuadricFiber};

use crate::denefpas::{Ball, CosetGrid, DefinableSet, Env, Evaluator, Value, VfTerm};
use crate::error::{Error, Result};
use crate::localfield::{FieldKind, FieldSpec, LocalElement};
use crate::{Q, Z};
use num_traits::Zero;
use rayon::prelude::*;

/// An exact measured value with its evaluation depth and stability report.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralResult {
    pub value: Q,
    pub depth: usize,
    pub stable: bool,
    pub field: FieldSpec,
}

impl IntegralResult {
    pub fn require_stable(&self) -> Result<&Self> {
        if self.stable {
            Ok(self)
        } else {
            Err(Error::Unstable(format!(
                "value {} at depth {} changed under refinement",
                self.value, self.depth
            )))
        }
    }
}

/// One term `coeff * p^(a * ord(g(x))) * [x in support]` of an integrand.
#[derive(Debug, Clone)]
pub struct IntegrandTerm {
    pub coeff: Q,
    /// Optional factor `p^(a * ord(g(x)))`.
    pub ord_factor: Option<(i64, VfTerm)>,
    /// Optional indicator of a definable set sharing the ambient signature.
    pub support: Option<DefinableSet>,
}

/// Finite sum of indicator-with-ord-weight terms; the shape of every
/// integrand this laboratory needs (orbital integrals and Theta entries).
#[derive(Debug, Clone, Default)]
pub struct Integrand {
    pub terms: Vec<IntegrandTerm>,
}

impl Integrand {
    pub fn constant(coeff: Q) -> Self {
        Integrand { terms: vec![IntegrandTerm { coeff, ord_factor: None, support: None }] }
    }

    pub fn indicator(set: DefinableSet) -> Self {
        Integrand {
            terms: vec![IntegrandTerm { coeff: crate::q_int(1), ord_factor: None, support: Some(set) }],
        }
    }
}

fn box_volume(spec: FieldSpec, boxes: &[Ball], depth: usize) -> Q {
    let mut exp = 0i64;
    for b in boxes {
        exp += b.radius + depth as i64;
    }
    crate::q_pow(spec.p, -exp)
}

fn count_satisfying(
    set: &DefinableSet,
    boxes: &[Ball],
    depth: usize,
    spec: FieldSpec,
) -> Result<u64> {
    let vf_vars = set.vf_vars();
    if vf_vars.len() != set.signature.len() || boxes.len() != vf_vars.len() {
        return Err(Error::Domain(format!(
            "box/signature mismatch: {} balls for signature {:?}",
            boxes.len(),
            set.signature
        )));
    }
    let grid = CosetGrid::new(spec, boxes, depth)?;
    let eval = Evaluator::new(spec, depth);
    let total = grid.len();
    let count = (0..total)
        .into_par_iter()
        .map(|idx| -> Result<u64> {
            let rep = grid.rep(idx)?;
            let mut env = Env::new();
            for (name, value) in vf_vars.iter().zip(&rep) {
                env.insert(name.to_string(), Value::Vf(value.clone()));
            }
            Ok(eval.evaluate(&set.formula, &env)?.value as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;
    Ok(count)
}

/// Measure of a definable set inside a box: satisfying depth-k cosets times
/// the coset volume. Stability compares depth k and k+1.
pub fn measure(
    set: &DefinableSet,
    boxes: &[Ball],
    depth: usize,
    spec: FieldSpec,
) -> Result<IntegralResult> {
    if depth == 0 {
        return Err(Error::Domain("measure needs depth >= 1".into()));
    }
    let value = |k: usize| -> Result<Q> {
        let n = count_satisfying(set, boxes, k, spec)?;
        Ok(Q::from_integer(Z::from(n)) * box_volume(spec, boxes, k))
    };
    let v = value(depth)?;
    let v_next = value(depth + 1)?;
    Ok(IntegralResult { stable: v == v_next, value: v, depth, field: spec })
}

fn integrand_value_on_rep(
    f: &Integrand,
    set: &DefinableSet,
    vf_vars: &[&str],
    eval: &Evaluator,
    rep: &[LocalElement],
    spec: FieldSpec,
) -> Result<Q> {
    let mut env = Env::new();
    for (name, value) in vf_vars.iter().zip(rep) {
        env.insert(name.to_string(), Value::Vf(value.clone()));
    }
    if !eval.evaluate(&set.formula, &env)?.value {
        return Ok(Q::zero());
    }
    let mut acc = Q::zero();
    for term in &f.terms {
        if let Some(support) = &term.support {
            if !eval.evaluate(&support.formula, &env)?.value {
                continue;
            }
        }
        let mut contribution = term.coeff.clone();
        if let Some((a, g)) = &term.ord_factor {
            let gval = eval.vf(g, &env)?;
            match gval.ord() {
                Some(v) => contribution *= crate::q_pow(spec.p, a * v),
                None => {
                    return Err(Error::RefineNeeded(format!(
                        "ord({g}) vanishes identically on a depth-{} coset; refine the depth",
                        eval.vf_depth
                    )))
                }
            }
        }
        acc += contribution;
    }
    Ok(acc)
}

/// Riemann-style coset sum of an integrand over a definable set.
pub fn integrate(
    f: &Integrand,
    set: &DefinableSet,
    boxes: &[Ball],
    depth: usize,
    spec: FieldSpec,
) -> Result<IntegralResult> {
    if depth == 0 {
        return Err(Error::Domain("integrate needs depth >= 1".into()));
    }
    let vf_vars = set.vf_vars();
    if vf_vars.len() != set.signature.len() || boxes.len() != vf_vars.len() {
        return Err(Error::Domain("box/signature mismatch".into()));
    }
    let value = |k: usize| -> Result<Q> {
        let grid = CosetGrid::new(spec, boxes, k)?;
        let eval = Evaluator::new(spec, k);
        let total = grid.len();
        let sum = (0..total)
            .into_par_iter()
            .map(|idx| -> Result<Q> {
                let rep = grid.rep(idx)?;
                integrand_value_on_rep(f, set, &vf_vars, &eval, &rep, spec)
            })
            .try_reduce(Q::zero, |a, b| Ok(a + b))?;
        Ok(sum * box_volume(spec, boxes, k))
    };
    let v = value(depth)?;
    let v_next = value(depth + 1)?;
    Ok(IntegralResult { stable: v == v_next, value: v, depth, field: spec })
}

/// The fiber map of a Leray measurement: either a general polynomial in the
/// box coordinates or the sl2 determinant quadric (which gets the fast
/// stratified counter).
#[derive(Debug, Clone)]
pub enum FiberMap {
    /// One polynomial equation `map(x) = target`.
    Polynomial { map: VfTerm, vars: Vec<String> },
    /// `-a^2 - bc = target` in coordinates (a, b, c), with an optional class
    /// filter on the counted points.
    Sl2Det { filter: ClassFilter },
}

#[derive(Debug, Clone)]
pub struct LerayFiberSpec {
    pub map: FiberMap,
    pub target: LocalElement,
    pub boxes: Vec<Ball>,
    /// Optional definable restriction of the counted region (used to carve
    /// out declared singular loci). Only the polynomial path supports it;
    /// the det quadric expresses restrictions through balls and filters.
    pub restrict: Option<DefinableSet>,
}

/// Leray fiber measure `N_m p^(-(n-1)m)` of `{map = target}` inside the box.
pub fn leray_fiber_measure(
    fiber: &LerayFiberSpec,
    depth: usize,
    spec: FieldSpec,
) -> Result<IntegralResult> {
    if depth == 0 {
        return Err(Error::Domain("leray_fiber_measure needs depth >= 1".into()));
    }
    match &fiber.map {
        FiberMap::Sl2Det { filter } => {
            if fiber.restrict.is_some() {
                return Err(Error::Domain(
                    "the det quadric expresses restrictions through balls and class filters".into(),
                ));
            }
            if fiber.boxes.len() != 3 {
                return Err(Error::Domain("the det quadric needs exactly 3 coordinate balls".into()));
            }
            // a^2 + bc = -target.
            let delta = fiber.target.neg()?;
            let qf = QuadricFiber {
                spec,
                delta,
                ball_a: fiber.boxes[0].clone(),
                ball_b: fiber.boxes[1].clone(),
                ball_c: fiber.boxes[2].clone(),
                filter: *filter,
            };
            let (value, stable) = qf.measure(depth)?;
            Ok(IntegralResult { value, depth, stable, field: spec })
        }
        FiberMap::Polynomial { map, vars } => {
            let value = |m: usize| -> Result<Q> {
                let n = count_polynomial_fiber(
                    map,
                    vars,
                    &fiber.target,
                    &fiber.boxes,
                    fiber.restrict.as_ref(),
                    m,
                    spec,
                )?;
                let exp = (fiber.boxes.len() as i64 - 1) * m as i64;
                Ok(Q::from_integer(Z::from(n)) * crate::q_pow(spec.p, -exp))
            };
            let v = value(depth)?;
            let v_next = value(depth + 1)?;
            Ok(IntegralResult { stable: v == v_next, value: v, depth, field: spec })
        }
    }
}

fn count_polynomial_fiber(
    map: &VfTerm,
    vars: &[String],
    target: &LocalElement,
    boxes: &[Ball],
    restrict: Option<&DefinableSet>,
    m: usize,
    spec: FieldSpec,
) -> Result<u128> {
    use crate::localfield::residue::ResidueRing;
    if vars.len() != boxes.len() {
        return Err(Error::Domain("fiber map variable count != box count".into()));
    }
    let ring = ResidueRing::new(&spec, m)?;
    let t = ring.reduce(target)?;
    // Grid of reps mod p^m per variable.
    let mut sizes = Vec::new();
    let mut offsets: Vec<(u64, u64)> = Vec::new(); // (center, step)
    let mut total: u128 = 1;
    for b in boxes {
        if b.radius < 0 {
            return Err(Error::Domain("fiber boxes must sit inside O".into()));
        }
        let depth = (b.radius as usize).min(m);
        let n = ring.pow_p(m - depth);
        sizes.push(n);
        offsets.push((ring.reduce(&b.center)? % ring.pow_p(depth), ring.pow_p(depth)));
        total = total.saturating_mul(n as u128);
        if total > 200_000_000 {
            return Err(Error::Domain(format!(
                "polynomial fiber grid of {total} points is too large; use the quadric fast path"
            )));
        }
    }
    let restrict_vars: Vec<&str> = restrict.map(|r| r.vf_vars()).unwrap_or_default();
    if let Some(r) = restrict {
        if restrict_vars.len() != r.signature.len() {
            return Err(Error::Domain("restriction must have an all-VF signature".into()));
        }
        for v in &restrict_vars {
            if !vars.iter().any(|w| w == v) {
                return Err(Error::UnboundVariable((*v).to_string()));
            }
        }
    }
    let eval = Evaluator::new(spec, m);
    let count = (0..total as u64)
        .into_par_iter()
        .map(|mut idx| -> Result<u128> {
            let mut env = std::collections::BTreeMap::new();
            for (i, var) in vars.iter().enumerate() {
                let n = sizes[i];
                let digit = idx % n;
                idx /= n;
                let (center, step) = offsets[i];
                env.insert(var.clone(), ring.add(center, ring.mul(step, digit)));
            }
            if let Some(r) = restrict {
                // Lift the ring representatives to exact elements and test
                // the formula.
                let mut fenv = Env::new();
                for (var, &val) in &env {
                    let digits = ring.to_digits(val);
                    let e = LocalElement::from_digits(spec, 0, digits, true)
                        .unwrap_or_else(|_| LocalElement::zero(spec));
                    fenv.insert(var.clone(), Value::Vf(e));
                }
                if !eval.evaluate(&r.formula, &fenv)?.value {
                    return Ok(0);
                }
            }
            let v = eval_vf_ring(map, &ring, &env)?;
            Ok((v == t) as u128)
        })
        .try_reduce(|| 0u128, |a, b| Ok(a + b))?;
    Ok(count)
}

/// Evaluates a polynomial VF term over a residue ring.
pub fn eval_vf_ring(
    t: &VfTerm,
    ring: &crate::localfield::residue::ResidueRing,
    env: &std::collections::BTreeMap<String, u64>,
) -> Result<u64> {
    use crate::denefpas::RingOp;
    Ok(match t {
        VfTerm::Var(v) => *env
            .get(v)
            .ok_or_else(|| Error::UnboundVariable(v.clone()))?,
        VfTerm::Int(n) => {
            let p = ring.p;
            match ring.kind {
                FieldKind::MixedChar => (n.rem_euclid(ring.size as i64)) as u64,
                FieldKind::EqualChar => (n.rem_euclid(p as i64)) as u64,
            }
        }
        VfTerm::Bin(op, a, b) => {
            let x = eval_vf_ring(a, ring, env)?;
            let y = eval_vf_ring(b, ring, env)?;
            match op {
                RingOp::Add => ring.add(x, y),
                RingOp::Sub => ring.sub(x, y),
                RingOp::Mul => ring.mul(x, y),
            }
        }
        VfTerm::Neg(a) => ring.neg(eval_vf_ring(a, ring, env)?),
    })
}

/// Two-field comparison report: the exact values over `Q_p` and `F_p((t))`
/// and whether they agree. Disagreement is a first-class result.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub p: u64,
    pub depth: usize,
    pub value_mixed: Q,
    pub value_equal: Q,
    pub agree: bool,
}

/// Runs the same computation over both completions with residue field F_p and
/// compares exactly. Both runs must be stable at their reported depth.
pub fn transfer_compare(
    p: u64,
    precision: usize,
    run: impl Fn(FieldSpec) -> Result<IntegralResult>,
) -> Result<TransferReport> {
    let mixed = FieldSpec::qp(p, precision)?;
    let equal = FieldSpec::fpt(p, precision)?;
    let rm = run(mixed)?;
    rm.require_stable()?;
    let re = run(equal)?;
    re.require_stable()?;
    if rm.depth != re.depth {
        return Err(Error::Domain("transfer comparison ran at differing depths".into()));
    }
    Ok(TransferReport {
        p,
        depth: rm.depth,
        agree: rm.value == re.value,
        value_mixed: rm.value,
        value_equal: re.value,
    })
}

/// Scan of an integer-indexed family: first index with a nonzero stable value,
/// or vanishing on the whole range.
#[derive(Debug, Clone, PartialEq)]
pub enum VanishingReport {
    VanishesOnRange { lo: i64, hi: i64 },
    FirstNonzero { a: i64, value: Q },
}

pub fn asymptotic_vanishing_check(
    range: (i64, i64),
    family: impl Fn(i64) -> Result<IntegralResult>,
) -> Result<VanishingReport> {
    for a in range.0..=range.1 {
        let r = family(a)?;
        r.require_stable()?;
        if !r.value.is_zero() {
            return Ok(VanishingReport::FirstNonzero { a, value: r.value });
        }
    }
    Ok(VanishingReport::VanishesOnRange { lo: range.0, hi: range.1 })
}

#[cfg(test)]
mod tests;
