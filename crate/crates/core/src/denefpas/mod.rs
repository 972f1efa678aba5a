//! Abstract syntax, parser, and concrete-field evaluator for the three-sorted
//! first-order language with `ord` and `ac`, defining subsets of affine space
//! over a local field.
//!
//! Quantifiers are explicitly bounded (residues, finite integer intervals,
//! balls at a chosen coset depth): this is what makes desk-scale evaluation
//! decidable without a quantifier-elimination engine. Every formula built by
//! the other modules is ball-bounded by construction.

pub mod ast;
pub mod eval;
mod parse;

pub use ast::{Formula, Quantifier, RfTerm, RingOp, Sort, VfTerm, VgCmp, VgTerm};
pub use eval::{coset_representative, Env, Evaluator, Truth, Value, VgValue};
pub use parse::Parser;

use crate::error::{Error, Result};
use crate::localfield::{FieldSpec, LocalElement};
use rayon::prelude::*;

/// A ball `center + pi^radius O` in one valued-field coordinate.
#[derive(Debug, Clone)]
pub struct Ball {
    pub center: LocalElement,
    pub radius: i64,
}

impl Ball {
    pub fn new(center: LocalElement, radius: i64) -> Self {
        Ball { center, radius }
    }

    /// The integral unit ball of a field.
    pub fn unit(spec: FieldSpec) -> Self {
        Ball { center: LocalElement::zero(spec), radius: 0 }
    }

    pub fn at_origin(spec: FieldSpec, radius: i64) -> Self {
        Ball { center: LocalElement::zero(spec), radius }
    }
}

/// A formula together with its explicit free-variable signature.
#[derive(Debug, Clone, PartialEq)]
pub struct DefinableSet {
    pub formula: Formula,
    pub signature: Vec<(String, Sort)>,
}

impl DefinableSet {
    pub fn new(formula: Formula) -> Self {
        let signature = formula.free_vars();
        DefinableSet { formula, signature }
    }

    pub fn with_signature(formula: Formula, signature: Vec<(String, Sort)>) -> Result<Self> {
        for (v, s) in formula.free_vars() {
            match signature.iter().find(|(n, _)| *n == v) {
                Some((_, declared)) if *declared == s => {}
                Some((_, declared)) => {
                    return Err(Error::Sort(format!(
                        "signature declares `{v}` : {declared:?} but the formula uses it as {s:?}"
                    )))
                }
                None => {
                    return Err(Error::Sort(format!("free variable `{v}` missing from the signature")))
                }
            }
        }
        Ok(DefinableSet { formula, signature })
    }

    pub fn vf_vars(&self) -> Vec<&str> {
        self.signature
            .iter()
            .filter(|(_, s)| *s == Sort::Vf)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Parses a `.dp` program: `vf x; rf r; vg n;` declarations followed by one
/// formula. The declaration order fixes the signature order.
pub fn parse(text: &str) -> Result<DefinableSet> {
    let mut parser = Parser::new();
    let (formula, mut sig) = parser.parse_program(text)?;
    let free = formula.free_vars();
    sig.retain(|(n, _)| free.iter().any(|(m, _)| m == n));
    for (n, s) in free {
        if !sig.iter().any(|(m, _)| *m == n) {
            sig.push((n, s));
        }
    }
    DefinableSet::with_signature(formula, sig)
}

/// Prints a formula in re-parseable form.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

/// Result of a bounded point enumeration.
#[derive(Debug, Clone)]
pub struct EnumeratedPoints {
    /// Satisfying coset representatives, one `Vec` per VF variable, in
    /// lexicographic coset order.
    pub points: Vec<Vec<LocalElement>>,
    /// Number of cosets inspected (p^(depth * nvars)).
    pub total_cosets: u64,
    /// True when refining every sampled coset one digit deeper changes no
    /// membership verdict.
    pub stable: bool,
}

/// The depth-`k` coset grid of a product of balls.
pub struct CosetGrid<'a> {
    pub spec: FieldSpec,
    pub balls: &'a [Ball],
    pub depth: usize,
}

impl<'a> CosetGrid<'a> {
    pub fn new(spec: FieldSpec, balls: &'a [Ball], depth: usize) -> Result<Self> {
        let cells = (balls.len() * depth) as u32;
        if (spec.p as f64).powi(cells as i32) > 5e8 {
            return Err(Error::Domain(format!("coset grid p^{cells} too large to enumerate")));
        }
        Ok(CosetGrid { spec, balls, depth })
    }

    pub fn len(&self) -> u64 {
        self.spec.p.pow((self.balls.len() * self.depth) as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Representative tuple of the `idx`-th coset, variable-major lex order.
    pub fn rep(&self, idx: u64) -> Result<Vec<LocalElement>> {
        let per_var = self.spec.p.pow(self.depth as u32);
        let mut out = Vec::with_capacity(self.balls.len());
        let mut v = idx;
        for ball in self.balls.iter().rev() {
            let sub = v % per_var;
            v /= per_var;
            out.push(coset_representative(self.spec, &ball.center, ball.radius, self.depth, sub)?);
        }
        out.reverse();
        Ok(out)
    }
}

/// Enumerates exactly the depth-`k` cosets of the box whose representative
/// satisfies the formula. The stability flag reports whether refining to
/// depth k+1 changes membership on a deterministic sample of cosets (all of
/// them when the grid is small, a lexicographic prefix otherwise).
pub fn enumerate_points(
    set: &DefinableSet,
    boxes: &[Ball],
    depth: usize,
    spec: FieldSpec,
) -> Result<EnumeratedPoints> {
    if depth == 0 {
        return Err(Error::Domain("enumeration depth must be at least 1".into()));
    }
    let vf_vars = set.vf_vars();
    if vf_vars.len() != set.signature.len() {
        return Err(Error::Domain(
            "enumerate_points needs an all-VF signature (bind RF/VG variables first)".into(),
        ));
    }
    if boxes.len() != vf_vars.len() {
        return Err(Error::Domain(format!(
            "box/signature mismatch: {} balls for {} VF variables",
            boxes.len(),
            vf_vars.len()
        )));
    }
    let grid = CosetGrid::new(spec, boxes, depth)?;
    let eval = Evaluator::new(spec, depth);
    let member = |eval: &Evaluator, rep: &[LocalElement]| -> Result<bool> {
        let mut env = Env::new();
        for (name, value) in vf_vars.iter().zip(rep) {
            env.insert(name.to_string(), Value::Vf(value.clone()));
        }
        Ok(eval.evaluate(&set.formula, &env)?.value)
    };

    let total = grid.len();
    let verdicts: Vec<bool> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let rep = grid.rep(idx)?;
            member(&eval, &rep)
        })
        .collect::<Result<Vec<bool>>>()?;
    let points: Vec<Vec<LocalElement>> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(idx, _)| grid.rep(idx as u64))
        .collect::<Result<_>>()?;

    // Stability: compare each sampled coset's verdict with its depth-(k+1)
    // children. The sample is a lexicographic prefix, hence deterministic.
    const SAMPLE: u64 = 4096;
    let sample_end = total.min(SAMPLE);
    let child_grid = CosetGrid::new(spec, boxes, depth + 1)?;
    let child_eval = Evaluator::new(spec, depth + 1);
    let n = boxes.len();
    let per_var = spec.p.pow(depth as u32);
    let per_var_child = spec.p.pow((depth + 1) as u32);
    let stable = (0..sample_end)
        .into_par_iter()
        .map(|idx| -> Result<bool> {
            let parent = verdicts[idx as usize];
            let mut var_digits = Vec::with_capacity(n);
            let mut v = idx;
            for _ in 0..n {
                var_digits.push(v % per_var);
                v /= per_var;
            }
            var_digits.reverse(); // variable-major order
            let children = spec.p.pow(n as u32);
            for extra in 0..children {
                let mut e = extra;
                let mut hi_digits = Vec::with_capacity(n);
                for _ in 0..n {
                    hi_digits.push(e % spec.p);
                    e /= spec.p;
                }
                hi_digits.reverse();
                let mut child_idx = 0u64;
                for (vd, hd) in var_digits.iter().zip(&hi_digits) {
                    child_idx = child_idx * per_var_child + (vd + hd * per_var);
                }
                let rep = child_grid.rep(child_idx)?;
                if member_with(&child_eval, &vf_vars, &set.formula, &rep)? != parent {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);

    Ok(EnumeratedPoints { points, total_cosets: total, stable })
}

fn member_with(
    eval: &Evaluator,
    vf_vars: &[&str],
    formula: &Formula,
    rep: &[LocalElement],
) -> Result<bool> {
    let mut env = Env::new();
    for (name, value) in vf_vars.iter().zip(rep) {
        env.insert(name.to_string(), Value::Vf(value.clone()));
    }
    Ok(eval.evaluate(formula, &env)?.value)
}
