//! Typed abstract syntax for the three-sorted formula language.
//!
//! Terms are sort-correct by construction: the valued-field sort carries ring
//! operations and integer constants, the residue-field sort carries ring
//! operations, residue constants, and `ac` of valued-field terms, and the
//! value-group sort carries integer constants, addition, and `ord` of
//! valued-field terms.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sort {
    Vf,
    Rf,
    Vg,
}

impl Sort {
    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Vf => "vf",
            Sort::Rf => "rf",
            Sort::Vg => "vg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Sub,
    Mul,
}

impl RingOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RingOp::Add => "+",
            RingOp::Sub => "-",
            RingOp::Mul => "*",
        }
    }
}

/// Valued-field terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VfTerm {
    Var(String),
    Int(i64),
    Bin(RingOp, Box<VfTerm>, Box<VfTerm>),
    Neg(Box<VfTerm>),
}

/// Residue-field terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RfTerm {
    Var(String),
    Const(i64),
    Ac(Box<VfTerm>),
    Bin(RingOp, Box<RfTerm>, Box<RfTerm>),
    Neg(Box<RfTerm>),
}

/// Value-group terms (Presburger: no multiplication).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VgTerm {
    Var(String),
    Int(i64),
    Ord(Box<VfTerm>),
    Add(Box<VgTerm>, Box<VgTerm>),
    Sub(Box<VgTerm>, Box<VgTerm>),
    Neg(Box<VgTerm>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VgCmp {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl VgCmp {
    pub fn symbol(self) -> &'static str {
        match self {
            VgCmp::Eq => "=",
            VgCmp::Ne => "!=",
            VgCmp::Le => "<=",
            VgCmp::Lt => "<",
            VgCmp::Ge => ">=",
            VgCmp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn keyword(&self) -> &'static str {
        match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        }
    }
}

/// Formulas. Every quantifier carries an explicitly bounded range, so
/// evaluation always terminates: residue-field quantifiers run over the p
/// residues, value-group quantifiers over a finite interval, valued-field
/// quantifiers over a ball given by a center term and a radius valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    VfEq(VfTerm, VfTerm),
    VfNe(VfTerm, VfTerm),
    RfEq(RfTerm, RfTerm),
    RfNe(RfTerm, RfTerm),
    VgCmp(VgCmp, VgTerm, VgTerm),
    /// `t1 = t2 mod n`
    VgCong(VgTerm, VgTerm, u64),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    QuantRf(Quantifier, String, Box<Formula>),
    QuantVg(Quantifier, String, i64, i64, Box<Formula>),
    QuantVf(Quantifier, String, VfTerm, i64, Box<Formula>),
}

impl Formula {
    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn contains_vf_quantifier(&self) -> bool {
        match self {
            Formula::QuantVf(..) => true,
            Formula::Not(f) => f.contains_vf_quantifier(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.contains_vf_quantifier() || b.contains_vf_quantifier()
            }
            Formula::QuantRf(_, _, f) | Formula::QuantVg(_, _, _, _, f) => {
                f.contains_vf_quantifier()
            }
            _ => false,
        }
    }

    /// Free variables with their sorts, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<(String, Sort)> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<(String, Sort)>) {
        match self {
            Formula::VfEq(a, b) | Formula::VfNe(a, b) => {
                free_vf(a, bound, out);
                free_vf(b, bound, out);
            }
            Formula::RfEq(a, b) | Formula::RfNe(a, b) => {
                free_rf(a, bound, out);
                free_rf(b, bound, out);
            }
            Formula::VgCmp(_, a, b) | Formula::VgCong(a, b, _) => {
                free_vg(a, bound, out);
                free_vg(b, bound, out);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::QuantRf(_, v, f) | Formula::QuantVg(_, v, _, _, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            Formula::QuantVf(_, v, center, _, f) => {
                free_vf(center, bound, out);
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }
}

fn note_free(name: &str, sort: Sort, bound: &[String], out: &mut Vec<(String, Sort)>) {
    if !bound.iter().any(|b| b == name) && !out.iter().any(|(n, _)| n == name) {
        out.push((name.to_string(), sort));
    }
}

fn free_vf(t: &VfTerm, bound: &[String], out: &mut Vec<(String, Sort)>) {
    match t {
        VfTerm::Var(v) => note_free(v, Sort::Vf, bound, out),
        VfTerm::Int(_) => {}
        VfTerm::Bin(_, a, b) => {
            free_vf(a, bound, out);
            free_vf(b, bound, out);
        }
        VfTerm::Neg(a) => free_vf(a, bound, out),
    }
}

fn free_rf(t: &RfTerm, bound: &[String], out: &mut Vec<(String, Sort)>) {
    match t {
        RfTerm::Var(v) => note_free(v, Sort::Rf, bound, out),
        RfTerm::Const(_) => {}
        RfTerm::Ac(a) => free_vf(a, bound, out),
        RfTerm::Bin(_, a, b) => {
            free_rf(a, bound, out);
            free_rf(b, bound, out);
        }
        RfTerm::Neg(a) => free_rf(a, bound, out),
    }
}

fn free_vg(t: &VgTerm, bound: &[String], out: &mut Vec<(String, Sort)>) {
    match t {
        VgTerm::Var(v) => note_free(v, Sort::Vg, bound, out),
        VgTerm::Int(_) => {}
        VgTerm::Ord(a) => free_vf(a, bound, out),
        VgTerm::Add(a, b) | VgTerm::Sub(a, b) => {
            free_vg(a, bound, out);
            free_vg(b, bound, out);
        }
        VgTerm::Neg(a) => free_vg(a, bound, out),
    }
}

// --- printing ----------------------------------------------------------------

impl fmt::Display for VfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VfTerm::Var(v) => write!(f, "{v}"),
            VfTerm::Int(n) => write!(f, "{n}"),
            VfTerm::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            VfTerm::Neg(a) => write!(f, "(- {a})"),
        }
    }
}

impl fmt::Display for RfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RfTerm::Var(v) => write!(f, "{v}"),
            RfTerm::Const(n) => write!(f, "{n}"),
            RfTerm::Ac(t) => write!(f, "ac({t})"),
            RfTerm::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            RfTerm::Neg(a) => write!(f, "(- {a})"),
        }
    }
}

impl fmt::Display for VgTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VgTerm::Var(v) => write!(f, "{v}"),
            VgTerm::Int(n) => write!(f, "{n}"),
            VgTerm::Ord(t) => write!(f, "ord({t})"),
            VgTerm::Add(a, b) => write!(f, "({a} + {b})"),
            VgTerm::Sub(a, b) => write!(f, "({a} - {b})"),
            VgTerm::Neg(a) => write!(f, "(- {a})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::VfEq(a, b) => write!(f, "{a} = {b}"),
            Formula::VfNe(a, b) => write!(f, "{a} != {b}"),
            Formula::RfEq(a, b) => write!(f, "{a} = {b}"),
            Formula::RfNe(a, b) => write!(f, "{a} != {b}"),
            Formula::VgCmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Formula::VgCong(a, b, n) => write!(f, "{a} = {b} mod {n}"),
            Formula::Not(inner) => write!(f, "!({inner})"),
            Formula::And(a, b) => write!(f, "({a}) && ({b})"),
            Formula::Or(a, b) => write!(f, "({a}) || ({b})"),
            Formula::QuantRf(q, v, inner) => write!(f, "{} {v} in rf : ({inner})", q.keyword()),
            Formula::QuantVg(q, v, lo, hi, inner) => {
                write!(f, "{} {v} in [{lo}..{hi}] : ({inner})", q.keyword())
            }
            Formula::QuantVf(q, v, center, radius, inner) => {
                write!(f, "{} {v} in ball({center}, {radius}) : ({inner})", q.keyword())
            }
        }
    }
}
