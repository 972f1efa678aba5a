//! Concrete evaluation of formulas over a chosen local field.

use super::ast::*;
use crate::error::{Error, Result};
use crate::localfield::{FieldSpec, LocalElement};
use std::collections::BTreeMap;

/// Value-group values: integers extended by `+infinity` (the ord of zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VgValue {
    Int(i64),
    Inf,
}

impl VgValue {
    fn add(self, other: Self) -> Result<Self> {
        Ok(match (self, other) {
            (VgValue::Int(a), VgValue::Int(b)) => VgValue::Int(a + b),
            _ => VgValue::Inf,
        })
    }

    fn sub(self, other: Self) -> Result<Self> {
        match (self, other) {
            (VgValue::Int(a), VgValue::Int(b)) => Ok(VgValue::Int(a - b)),
            (VgValue::Inf, VgValue::Int(_)) => Ok(VgValue::Inf),
            _ => Err(Error::Domain("cannot subtract +infinity in the value group".into())),
        }
    }

    fn neg(self) -> Result<Self> {
        match self {
            VgValue::Int(a) => Ok(VgValue::Int(-a)),
            VgValue::Inf => Err(Error::Domain("cannot negate +infinity in the value group".into())),
        }
    }
}

/// A variable assignment covering the free variables of a formula.
#[derive(Debug, Clone)]
pub enum Value {
    Vf(LocalElement),
    Rf(u64),
    Vg(VgValue),
}

pub type Env = BTreeMap<String, Value>;

/// Truth value together with the valued-field quantifier stability report:
/// `vf_stable` is true when re-running every ball quantifier one digit deeper
/// does not change the outcome (trivially true without VF quantifiers).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truth {
    pub value: bool,
    pub vf_stable: bool,
}

pub struct Evaluator {
    pub spec: FieldSpec,
    /// Coset depth used to enumerate valued-field ball quantifiers.
    pub vf_depth: usize,
}

impl Evaluator {
    pub fn new(spec: FieldSpec, vf_depth: usize) -> Self {
        Evaluator { spec, vf_depth }
    }

    /// Evaluates a closed-under-`env` formula; ball quantifiers are enumerated
    /// at `vf_depth` and re-checked at `vf_depth + 1` for the stability flag.
    pub fn evaluate(&self, f: &Formula, env: &Env) -> Result<Truth> {
        let value = self.eval_at(f, env, self.vf_depth)?;
        let vf_stable = if f.contains_vf_quantifier() {
            self.eval_at(f, env, self.vf_depth + 1)? == value
        } else {
            true
        };
        Ok(Truth { value, vf_stable })
    }

    fn eval_at(&self, f: &Formula, env: &Env, depth: usize) -> Result<bool> {
        match f {
            Formula::VfEq(a, b) => {
                let x = self.vf(a, env)?;
                let y = self.vf(b, env)?;
                x.eq_checked(&y).or_else(|e| match e {
                    // Agreeing on the joint window counts as equal at this
                    // precision; the window is the evaluation contract.
                    Error::InsufficientPrecision(_) => Ok(true),
                    other => Err(other),
                })
            }
            Formula::VfNe(a, b) => Ok(!self.eval_at(&Formula::VfEq(a.clone(), b.clone()), env, depth)?),
            Formula::RfEq(a, b) => Ok(self.rf(a, env)? == self.rf(b, env)?),
            Formula::RfNe(a, b) => Ok(self.rf(a, env)? != self.rf(b, env)?),
            Formula::VgCmp(op, a, b) => {
                let x = self.vg(a, env)?;
                let y = self.vg(b, env)?;
                Ok(compare(*op, x, y))
            }
            Formula::VgCong(a, b, n) => {
                let x = self.vg(a, env)?;
                let y = self.vg(b, env)?;
                match (x, y) {
                    (VgValue::Int(x), VgValue::Int(y)) => Ok((x - y).rem_euclid(*n as i64) == 0),
                    // Congruences never hold at +infinity (convention).
                    _ => Ok(false),
                }
            }
            Formula::Not(inner) => Ok(!self.eval_at(inner, env, depth)?),
            Formula::And(a, b) => Ok(self.eval_at(a, env, depth)? && self.eval_at(b, env, depth)?),
            Formula::Or(a, b) => Ok(self.eval_at(a, env, depth)? || self.eval_at(b, env, depth)?),
            Formula::QuantRf(q, var, body) => {
                let mut result = matches!(q, Quantifier::Forall);
                for r in 0..self.spec.p {
                    let mut env2 = env.clone();
                    env2.insert(var.clone(), Value::Rf(r));
                    let v = self.eval_at(body, &env2, depth)?;
                    match q {
                        Quantifier::Exists if v => {
                            result = true;
                            break;
                        }
                        Quantifier::Forall if !v => {
                            result = false;
                            break;
                        }
                        _ => {}
                    }
                }
                Ok(result)
            }
            Formula::QuantVg(q, var, lo, hi, body) => {
                let mut result = matches!(q, Quantifier::Forall);
                for n in *lo..=*hi {
                    let mut env2 = env.clone();
                    env2.insert(var.clone(), Value::Vg(VgValue::Int(n)));
                    let v = self.eval_at(body, &env2, depth)?;
                    match q {
                        Quantifier::Exists if v => {
                            result = true;
                            break;
                        }
                        Quantifier::Forall if !v => {
                            result = false;
                            break;
                        }
                        _ => {}
                    }
                }
                Ok(result)
            }
            Formula::QuantVf(q, var, center, radius, body) => {
                let c = self.vf(center, env)?;
                let total: u64 = self.spec.p.pow(depth as u32);
                let mut result = matches!(q, Quantifier::Forall);
                for idx in 0..total {
                    let rep = coset_representative(self.spec, &c, *radius, depth, idx)?;
                    let mut env2 = env.clone();
                    env2.insert(var.clone(), Value::Vf(rep));
                    let v = self.eval_at(body, &env2, depth)?;
                    match q {
                        Quantifier::Exists if v => {
                            result = true;
                            break;
                        }
                        Quantifier::Forall if !v => {
                            result = false;
                            break;
                        }
                        _ => {}
                    }
                }
                Ok(result)
            }
        }
    }

    pub fn vf(&self, t: &VfTerm, env: &Env) -> Result<LocalElement> {
        match t {
            VfTerm::Var(v) => match env.get(v) {
                Some(Value::Vf(e)) => Ok(e.clone()),
                Some(_) => Err(Error::Sort(format!("`{v}` bound to a non-VF value"))),
                None => Err(Error::UnboundVariable(v.clone())),
            },
            VfTerm::Int(n) => Ok(LocalElement::from_integer(self.spec, *n)),
            VfTerm::Bin(op, a, b) => {
                let x = self.vf(a, env)?;
                let y = self.vf(b, env)?;
                match op {
                    RingOp::Add => x.add(&y),
                    RingOp::Sub => x.sub(&y),
                    RingOp::Mul => x.mul(&y),
                }
            }
            VfTerm::Neg(a) => self.vf(a, env)?.neg(),
        }
    }

    pub fn rf(&self, t: &RfTerm, env: &Env) -> Result<u64> {
        let p = self.spec.p;
        match t {
            RfTerm::Var(v) => match env.get(v) {
                Some(Value::Rf(r)) => Ok(*r % p),
                Some(_) => Err(Error::Sort(format!("`{v}` bound to a non-RF value"))),
                None => Err(Error::UnboundVariable(v.clone())),
            },
            RfTerm::Const(n) => Ok(n.rem_euclid(p as i64) as u64),
            RfTerm::Ac(a) => Ok(self.vf(a, env)?.ac()),
            RfTerm::Bin(op, a, b) => {
                let x = self.rf(a, env)?;
                let y = self.rf(b, env)?;
                Ok(match op {
                    RingOp::Add => (x + y) % p,
                    RingOp::Sub => (x + p - y) % p,
                    RingOp::Mul => x * y % p,
                })
            }
            RfTerm::Neg(a) => {
                let x = self.rf(a, env)?;
                Ok((p - x) % p)
            }
        }
    }

    pub fn vg(&self, t: &VgTerm, env: &Env) -> Result<VgValue> {
        match t {
            VgTerm::Var(v) => match env.get(v) {
                Some(Value::Vg(n)) => Ok(*n),
                Some(_) => Err(Error::Sort(format!("`{v}` bound to a non-VG value"))),
                None => Err(Error::UnboundVariable(v.clone())),
            },
            VgTerm::Int(n) => Ok(VgValue::Int(*n)),
            VgTerm::Ord(a) => {
                let x = self.vf(a, env)?;
                Ok(match x.ord() {
                    Some(v) => VgValue::Int(v),
                    None => VgValue::Inf,
                })
            }
            VgTerm::Add(a, b) => self.vg(a, env)?.add(self.vg(b, env)?),
            VgTerm::Sub(a, b) => self.vg(a, env)?.sub(self.vg(b, env)?),
            VgTerm::Neg(a) => self.vg(a, env)?.neg(),
        }
    }
}

fn compare(op: VgCmp, x: VgValue, y: VgValue) -> bool {
    use VgValue::*;
    let le = |a: VgValue, b: VgValue| match (a, b) {
        (Int(a), Int(b)) => a <= b,
        (Int(_), Inf) => true,
        (Inf, Int(_)) => false,
        (Inf, Inf) => true,
    };
    match op {
        VgCmp::Eq => x == y,
        VgCmp::Ne => x != y,
        VgCmp::Le => le(x, y),
        VgCmp::Ge => le(y, x),
        VgCmp::Lt => le(x, y) && x != y,
        VgCmp::Gt => le(y, x) && x != y,
    }
}

/// The `idx`-th depth-`depth` coset representative of the ball
/// `center + pi^radius O`, in lexicographic digit order.
pub fn coset_representative(
    spec: FieldSpec,
    center: &LocalElement,
    radius: i64,
    depth: usize,
    idx: u64,
) -> Result<LocalElement> {
    let mut digits = Vec::with_capacity(depth);
    let mut v = idx;
    for _ in 0..depth {
        digits.push(v % spec.p);
        v /= spec.p;
    }
    if v != 0 {
        return Err(Error::Domain("coset index out of range".into()));
    }
    let offset = LocalElement::from_digits(spec, radius, digits, true);
    match offset {
        Ok(off) => center.add(&off),
        // All-zero digits: the offset is zero.
        Err(Error::PrecisionLoss { .. }) => Ok(center.clone()),
        Err(e) => Err(e),
    }
}
