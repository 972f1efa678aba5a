//! Recursive-descent parser for `.dp` formula text.
//!
//! Grammar (tokens are bit-exact):
//!
//! ```text
//! program  := decl* formula
//! decl     := ("vf" | "rf" | "vg") ident ";"
//! formula  := or
//! or       := and ("||" and)*
//! and      := unary ("&&" unary)*
//! unary    := "!" unary | quant | "(" formula ")" | atom
//! quant    := ("exists" | "forall") ident "in" domain ":" unary
//! domain   := "rf" | "[" int ".." int "]" | "ball" "(" term "," int ")"
//! atom     := term cmp term ["mod" nat]
//! cmp      := "=" | "!=" | "<=" | ">=" | "<" | ">"
//! term     := factor (("+" | "-") factor)*
//! factor   := prim ("*" prim)*
//! prim     := "-" prim | "ord" "(" term ")" | "ac" "(" term ")"
//!           | ident | int | "(" term ")"
//! ident    := [a-z][a-z0-9]*
//! ```
//!
//! Sorts are resolved from the declarations and from `ord`/`ac`; an atom whose
//! two sides are both bare integers defaults to the value-group sort.

use super::ast::*;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

struct Tokens {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

const SYMBOLS: [&str; 15] =
    ["&&", "||", "!=", "<=", ">=", "(", ")", "[", "]", "..", ":", ";", ",", "<", ">"];

fn tokenize(src: &str) -> Result<Tokens> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    'outer: while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            // comment to end of line
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        for sym in SYMBOLS {
            if bytes[i..].starts_with(sym.as_bytes()) {
                toks.push((Tok::Sym(sym), i));
                i += sym.len();
                continue 'outer;
            }
        }
        match c {
            b'=' => {
                toks.push((Tok::Sym("="), i));
                i += 1;
            }
            b'!' => {
                toks.push((Tok::Sym("!"), i));
                i += 1;
            }
            b'+' => {
                toks.push((Tok::Sym("+"), i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Sym("-"), i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Sym("*"), i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let n: i64 = text
                    .parse()
                    .map_err(|e: std::num::ParseIntError| Error::Parse { pos: start, msg: e.to_string() })?;
                toks.push((Tok::Int(n), start));
            }
            b'a'..=b'z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit()) {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            other => {
                return Err(Error::Parse { pos: i, msg: format!("unexpected character `{}`", other as char) });
            }
        }
    }
    Ok(Tokens { toks, pos: 0 })
}

impl Tokens {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, p)| p).unwrap_or(usize::MAX)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.peek() == Some(&Tok::Sym(match_sym(s))) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(Error::Parse { pos: self.here(), msg: format!("expected `{s}`") })
        }
    }

    fn expect_int(&mut self) -> Result<i64> {
        // allow a leading minus
        let neg = self.eat_sym("-");
        match self.bump() {
            Some(Tok::Int(n)) => Ok(if neg { -n } else { n }),
            _ => Err(Error::Parse { pos: self.here(), msg: "expected integer".into() }),
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.bump() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(Error::Parse { pos: self.here(), msg: "expected identifier".into() }),
        }
    }
}

fn match_sym(s: &str) -> &'static str {
    for sym in SYMBOLS {
        if sym == s {
            return sym;
        }
    }
    match s {
        "=" => "=",
        "!" => "!",
        "+" => "+",
        "-" => "-",
        "*" => "*",
        _ => unreachable!("unknown symbol {s}"),
    }
}

/// Untyped term tree prior to sort resolution.
#[derive(Debug, Clone)]
enum Raw {
    Var(String, usize),
    Int(i64),
    Ord(Box<Raw>),
    Ac(Box<Raw>),
    Bin(RingOp, Box<Raw>, Box<Raw>),
    Neg(Box<Raw>),
}

impl Raw {
    fn describe(&self) -> String {
        match self {
            Raw::Var(v, _) => v.clone(),
            Raw::Int(n) => n.to_string(),
            Raw::Ord(a) => format!("ord({})", a.describe()),
            Raw::Ac(a) => format!("ac({})", a.describe()),
            Raw::Bin(op, a, b) => format!("({} {} {})", a.describe(), op.symbol(), b.describe()),
            Raw::Neg(a) => format!("(- {})", a.describe()),
        }
    }
}

pub struct Parser {
    scope: BTreeMap<String, Sort>,
}

impl Parser {
    pub fn new() -> Self {
        Parser { scope: BTreeMap::new() }
    }

    pub fn with_scope(scope: impl IntoIterator<Item = (String, Sort)>) -> Self {
        Parser { scope: scope.into_iter().collect() }
    }

    /// Parses a full program: declarations followed by one formula.
    /// Returns the formula and the declared signature in declaration order.
    pub fn parse_program(&mut self, src: &str) -> Result<(Formula, Vec<(String, Sort)>)> {
        let mut toks = tokenize(src)?;
        let mut sig = Vec::new();
        loop {
            let decl = match toks.peek() {
                Some(Tok::Ident(w)) if w == "vf" || w == "rf" || w == "vg" => {
                    // Only a declaration if followed by ident then `;`.
                    matches!(toks.peek2(), Some(Tok::Ident(_)))
                }
                _ => false,
            };
            if !decl {
                break;
            }
            let kw = toks.expect_ident()?;
            let sort = match kw.as_str() {
                "vf" => Sort::Vf,
                "rf" => Sort::Rf,
                "vg" => Sort::Vg,
                _ => unreachable!(),
            };
            let name = toks.expect_ident()?;
            toks.expect_sym(";")?;
            if self.scope.insert(name.clone(), sort).is_some() {
                return Err(Error::Parse { pos: toks.here(), msg: format!("variable `{name}` declared twice") });
            }
            sig.push((name, sort));
        }
        let f = self.parse_or(&mut toks)?;
        if toks.peek().is_some() {
            return Err(Error::Parse { pos: toks.here(), msg: "trailing input after formula".into() });
        }
        Ok((f, sig))
    }

    /// Parses just a formula in the current scope.
    pub fn parse_formula(&mut self, src: &str) -> Result<Formula> {
        let mut toks = tokenize(src)?;
        let f = self.parse_or(&mut toks)?;
        if toks.peek().is_some() {
            return Err(Error::Parse { pos: toks.here(), msg: "trailing input after formula".into() });
        }
        Ok(f)
    }

    fn parse_or(&mut self, toks: &mut Tokens) -> Result<Formula> {
        let mut f = self.parse_and(toks)?;
        while toks.eat_sym("||") {
            let g = self.parse_and(toks)?;
            f = f.or(g);
        }
        Ok(f)
    }

    fn parse_and(&mut self, toks: &mut Tokens) -> Result<Formula> {
        let mut f = self.parse_unary(toks)?;
        while toks.eat_sym("&&") {
            let g = self.parse_unary(toks)?;
            f = f.and(g);
        }
        Ok(f)
    }

    fn parse_unary(&mut self, toks: &mut Tokens) -> Result<Formula> {
        if toks.eat_sym("!") {
            return Ok(self.parse_unary(toks)?.not());
        }
        if let Some(Tok::Ident(w)) = toks.peek() {
            if w == "exists" || w == "forall" {
                return self.parse_quant(toks);
            }
        }
        if toks.peek() == Some(&Tok::Sym("(")) {
            // Could be a parenthesized formula or a parenthesized term starting
            // an atom; try the formula reading first, backtracking on failure.
            let save = toks.pos;
            let save_scope = self.scope.clone();
            toks.pos += 1;
            if let Ok(f) = self.parse_or(toks) {
                if toks.eat_sym(")") {
                    // If an atom continues here, this was actually a term.
                    if !matches!(
                        toks.peek(),
                        Some(Tok::Sym("=") | Tok::Sym("!=") | Tok::Sym("<=") | Tok::Sym(">=") | Tok::Sym("<") | Tok::Sym(">") | Tok::Sym("+") | Tok::Sym("-") | Tok::Sym("*"))
                    ) {
                        return Ok(f);
                    }
                }
            }
            toks.pos = save;
            self.scope = save_scope;
        }
        self.parse_atom(toks)
    }

    fn parse_quant(&mut self, toks: &mut Tokens) -> Result<Formula> {
        let kw = toks.expect_ident()?;
        let q = if kw == "exists" { Quantifier::Exists } else { Quantifier::Forall };
        let var = toks.expect_ident()?;
        let kw_in = toks.expect_ident()?;
        if kw_in != "in" {
            return Err(Error::Parse { pos: toks.here(), msg: "expected `in`".into() });
        }
        // Domain decides the sort of the bound variable.
        if let Some(Tok::Ident(w)) = toks.peek() {
            if w == "rf" {
                toks.bump();
                toks.expect_sym(":")?;
                let shadow = self.scope.insert(var.clone(), Sort::Rf);
                let body = self.parse_unary(toks)?;
                restore(&mut self.scope, &var, shadow);
                return Ok(Formula::QuantRf(q, var, Box::new(body)));
            }
            if w == "ball" {
                toks.bump();
                toks.expect_sym("(")?;
                let center_raw = self.parse_term(toks)?;
                let center = self.to_vf(&center_raw)?;
                toks.expect_sym(",")?;
                let radius = toks.expect_int()?;
                toks.expect_sym(")")?;
                toks.expect_sym(":")?;
                let shadow = self.scope.insert(var.clone(), Sort::Vf);
                let body = self.parse_unary(toks)?;
                restore(&mut self.scope, &var, shadow);
                return Ok(Formula::QuantVf(q, var, center, radius, Box::new(body)));
            }
        }
        toks.expect_sym("[")?;
        let lo = toks.expect_int()?;
        toks.expect_sym("..")?;
        let hi = toks.expect_int()?;
        toks.expect_sym("]")?;
        toks.expect_sym(":")?;
        let shadow = self.scope.insert(var.clone(), Sort::Vg);
        let body = self.parse_unary(toks)?;
        restore(&mut self.scope, &var, shadow);
        Ok(Formula::QuantVg(q, var, lo, hi, Box::new(body)))
    }

    fn parse_atom(&mut self, toks: &mut Tokens) -> Result<Formula> {
        let lhs = self.parse_term(toks)?;
        let op = match toks.bump() {
            Some(Tok::Sym(s @ ("=" | "!=" | "<=" | ">=" | "<" | ">"))) => s,
            other => {
                return Err(Error::Parse {
                    pos: toks.here(),
                    msg: format!("expected comparison operator, found {other:?}"),
                })
            }
        };
        let rhs = self.parse_term(toks)?;
        // Congruence: `t1 = t2 mod n`
        if op == "=" {
            if let Some(Tok::Ident(w)) = toks.peek() {
                if w == "mod" {
                    toks.bump();
                    let n = toks.expect_int()?;
                    if n <= 0 {
                        return Err(Error::Parse { pos: toks.here(), msg: "modulus must be positive".into() });
                    }
                    let a = self.to_vg(&lhs)?;
                    let b = self.to_vg(&rhs)?;
                    return Ok(Formula::VgCong(a, b, n as u64));
                }
            }
        }
        let sort = match (self.infer(&lhs)?, self.infer(&rhs)?) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Sort(format!(
                    "cannot compare {} : {:?} with {} : {:?}",
                    lhs.describe(),
                    a,
                    rhs.describe(),
                    b
                )))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            // Integer-only atoms default to the value group.
            (None, None) => Sort::Vg,
        };
        let ordered = matches!(op, "<=" | ">=" | "<" | ">");
        if ordered && sort != Sort::Vg {
            return Err(Error::Sort(format!(
                "order comparison `{op}` needs value-group terms, got {}: {sort:?}",
                lhs.describe()
            )));
        }
        match sort {
            Sort::Vf => {
                let a = self.to_vf(&lhs)?;
                let b = self.to_vf(&rhs)?;
                Ok(match op {
                    "=" => Formula::VfEq(a, b),
                    "!=" => Formula::VfNe(a, b),
                    _ => unreachable!(),
                })
            }
            Sort::Rf => {
                let a = self.to_rf(&lhs)?;
                let b = self.to_rf(&rhs)?;
                Ok(match op {
                    "=" => Formula::RfEq(a, b),
                    "!=" => Formula::RfNe(a, b),
                    _ => unreachable!(),
                })
            }
            Sort::Vg => {
                let a = self.to_vg(&lhs)?;
                let b = self.to_vg(&rhs)?;
                let cmp = match op {
                    "=" => VgCmp::Eq,
                    "!=" => VgCmp::Ne,
                    "<=" => VgCmp::Le,
                    ">=" => VgCmp::Ge,
                    "<" => VgCmp::Lt,
                    ">" => VgCmp::Gt,
                    _ => unreachable!(),
                };
                Ok(Formula::VgCmp(cmp, a, b))
            }
        }
    }

    fn parse_term(&mut self, toks: &mut Tokens) -> Result<Raw> {
        let mut t = self.parse_factor(toks)?;
        loop {
            if toks.eat_sym("+") {
                let u = self.parse_factor(toks)?;
                t = Raw::Bin(RingOp::Add, Box::new(t), Box::new(u));
            } else if toks.eat_sym("-") {
                let u = self.parse_factor(toks)?;
                t = Raw::Bin(RingOp::Sub, Box::new(t), Box::new(u));
            } else {
                return Ok(t);
            }
        }
    }

    fn parse_factor(&mut self, toks: &mut Tokens) -> Result<Raw> {
        let mut t = self.parse_prim(toks)?;
        while toks.eat_sym("*") {
            let u = self.parse_prim(toks)?;
            t = Raw::Bin(RingOp::Mul, Box::new(t), Box::new(u));
        }
        Ok(t)
    }

    fn parse_prim(&mut self, toks: &mut Tokens) -> Result<Raw> {
        if toks.eat_sym("-") {
            let inner = self.parse_prim(toks)?;
            return Ok(Raw::Neg(Box::new(inner)));
        }
        let pos = toks.here();
        match toks.bump() {
            Some(Tok::Int(n)) => Ok(Raw::Int(n)),
            Some(Tok::Ident(w)) if w == "ord" => {
                toks.expect_sym("(")?;
                let inner = self.parse_term(toks)?;
                toks.expect_sym(")")?;
                Ok(Raw::Ord(Box::new(inner)))
            }
            Some(Tok::Ident(w)) if w == "ac" => {
                toks.expect_sym("(")?;
                let inner = self.parse_term(toks)?;
                toks.expect_sym(")")?;
                Ok(Raw::Ac(Box::new(inner)))
            }
            Some(Tok::Ident(w)) => Ok(Raw::Var(w, pos)),
            Some(Tok::Sym("(")) => {
                let inner = self.parse_term(toks)?;
                toks.expect_sym(")")?;
                Ok(inner)
            }
            other => Err(Error::Parse { pos, msg: format!("expected term, found {other:?}") }),
        }
    }

    fn var_sort(&self, name: &str, pos: usize) -> Result<Sort> {
        self.scope.get(name).copied().ok_or_else(|| Error::Parse {
            pos,
            msg: format!("variable `{name}` is not declared (use `vf {name};`, `rf {name};` or `vg {name};`)"),
        })
    }

    fn infer(&self, raw: &Raw) -> Result<Option<Sort>> {
        Ok(match raw {
            Raw::Var(v, pos) => Some(self.var_sort(v, *pos)?),
            Raw::Int(_) => None,
            Raw::Ord(_) => Some(Sort::Vg),
            Raw::Ac(_) => Some(Sort::Rf),
            Raw::Bin(_, a, b) => match self.infer(a)? {
                Some(s) => {
                    if let Some(t) = self.infer(b)? {
                        if s != t {
                            return Err(Error::Sort(format!(
                                "mixed sorts {s:?} and {t:?} in {}",
                                raw.describe()
                            )));
                        }
                    }
                    Some(s)
                }
                None => self.infer(b)?,
            },
            Raw::Neg(a) => self.infer(a)?,
        })
    }

    fn to_vf(&self, raw: &Raw) -> Result<VfTerm> {
        match raw {
            Raw::Var(v, pos) => {
                let s = self.var_sort(v, *pos)?;
                if s != Sort::Vf {
                    return Err(Error::Sort(format!("`{v}` has sort {s:?}, expected Vf")));
                }
                Ok(VfTerm::Var(v.clone()))
            }
            Raw::Int(n) => Ok(VfTerm::Int(*n)),
            Raw::Bin(op, a, b) => Ok(VfTerm::Bin(*op, Box::new(self.to_vf(a)?), Box::new(self.to_vf(b)?))),
            Raw::Neg(a) => Ok(VfTerm::Neg(Box::new(self.to_vf(a)?))),
            other => Err(Error::Sort(format!("{} is not a valued-field term", other.describe()))),
        }
    }

    fn to_rf(&self, raw: &Raw) -> Result<RfTerm> {
        match raw {
            Raw::Var(v, pos) => {
                let s = self.var_sort(v, *pos)?;
                if s != Sort::Rf {
                    return Err(Error::Sort(format!("`{v}` has sort {s:?}, expected Rf")));
                }
                Ok(RfTerm::Var(v.clone()))
            }
            Raw::Int(n) => Ok(RfTerm::Const(*n)),
            Raw::Ac(a) => Ok(RfTerm::Ac(Box::new(self.to_vf(a)?))),
            Raw::Bin(op, a, b) => Ok(RfTerm::Bin(*op, Box::new(self.to_rf(a)?), Box::new(self.to_rf(b)?))),
            Raw::Neg(a) => Ok(RfTerm::Neg(Box::new(self.to_rf(a)?))),
            other => Err(Error::Sort(format!("{} is not a residue-field term", other.describe()))),
        }
    }

    fn to_vg(&self, raw: &Raw) -> Result<VgTerm> {
        match raw {
            Raw::Var(v, pos) => {
                let s = self.var_sort(v, *pos)?;
                if s != Sort::Vg {
                    return Err(Error::Sort(format!("`{v}` has sort {s:?}, expected Vg")));
                }
                Ok(VgTerm::Var(v.clone()))
            }
            Raw::Int(n) => Ok(VgTerm::Int(*n)),
            Raw::Ord(a) => Ok(VgTerm::Ord(Box::new(self.to_vf(a)?))),
            Raw::Bin(RingOp::Add, a, b) => {
                Ok(VgTerm::Add(Box::new(self.to_vg(a)?), Box::new(self.to_vg(b)?)))
            }
            Raw::Bin(RingOp::Sub, a, b) => {
                Ok(VgTerm::Sub(Box::new(self.to_vg(a)?), Box::new(self.to_vg(b)?)))
            }
            Raw::Bin(RingOp::Mul, _, _) => Err(Error::Sort(format!(
                "multiplication is not a value-group operation in {}",
                raw.describe()
            ))),
            Raw::Neg(a) => Ok(VgTerm::Neg(Box::new(self.to_vg(a)?))),
            other => Err(Error::Sort(format!("{} is not a value-group term", other.describe()))),
        }
    }
}

impl Default for Parser {
    fn default() -> Self {
        Self::new()
    }
}

fn restore(scope: &mut BTreeMap<String, Sort>, var: &str, shadow: Option<Sort>) {
    match shadow {
        Some(s) => {
            scope.insert(var.to_string(), s);
        }
        None => {
            scope.remove(var);
        }
    }
}
