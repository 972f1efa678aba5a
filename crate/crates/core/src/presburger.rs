//! Exact algebra of piecewise exponential polynomials on the integers:
//! functions `t -> sum c_i t^{k_i} q^{l_i t}` on arithmetic-progression pieces.
//! This is the specialized shape of constructible functions of one value-group
//! variable, with the zero-locus and eventual-vanishing logic needed by the
//! uniformity arguments.

use crate::error::{Error, Result};
use crate::{Q, Z};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// One exponential-polynomial term `c * t^k * q^(l*t)` with c a nonzero rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpTerm {
    pub c: Q,
    pub k: u32,
    pub l: i64,
}

/// Exponential polynomial in canonical form: term keys `(l, k)` pairwise
/// distinct and sorted descending (dominant term first), zero coefficients
/// dropped. The empty list is the zero function.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn constant(c: Q) -> Self {
        ExpPoly::from_terms(vec![ExpTerm { c, k: 0, l: 0 }])
    }

    /// Builds and canonicalizes: merges equal `(l, k)` keys, drops zeros, sorts.
    pub fn from_terms(terms: Vec<ExpTerm>) -> Self {
        let mut map: BTreeMap<(i64, u32), Q> = BTreeMap::new();
        for t in terms {
            let entry = map.entry((t.l, t.k)).or_insert_with(Q::zero);
            *entry += t.c;
        }
        let mut canon: Vec<ExpTerm> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((l, k), c)| ExpTerm { c, k, l })
            .collect();
        canon.sort_by(|a, b| (b.l, b.k).cmp(&(a.l, a.k)));
        ExpPoly { terms: canon }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut all = self.terms.clone();
        all.extend(other.terms.iter().cloned());
        ExpPoly::from_terms(all)
    }

    pub fn neg(&self) -> Self {
        ExpPoly {
            terms: self.terms.iter().map(|t| ExpTerm { c: -t.c.clone(), k: t.k, l: t.l }).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut prod = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                prod.push(ExpTerm { c: &a.c * &b.c, k: a.k + b.k, l: a.l + b.l });
            }
        }
        ExpPoly::from_terms(prod)
    }

    /// Exact value at integer `t` for a residue-field size `q >= 2`.
    pub fn specialize(&self, q: u64, t: i64) -> Result<Q> {
        if q < 2 {
            return Err(Error::Domain(format!("specialize needs q >= 2, got {q}")));
        }
        let mut acc = Q::zero();
        for term in &self.terms {
            let tk = Q::from_integer(Z::from(t).pow(term.k));
            let exp = term
                .l
                .checked_mul(t)
                .ok_or_else(|| Error::Domain("exponent overflow".into()))?;
            acc += &term.c * tk * crate::q_pow(q, exp);
        }
        Ok(acc)
    }

    /// Exactly the integer zeros of the specialization inside `range`.
    pub fn zero_set_bounded(&self, q: u64, range: (i64, i64)) -> Result<Vec<i64>> {
        let mut out = Vec::new();
        for t in range.0..=range.1 {
            if self.specialize(q, t)?.is_zero() {
                out.push(t);
            }
        }
        Ok(out)
    }

    /// A certified tail bound: returns `a0` such that the dominant term
    /// strictly exceeds the sum of all other term magnitudes for every
    /// `t >= a0`, hence the function has no zero at or beyond `a0`.
    /// Minimality is not required.
    pub fn uniform_tail_bound(&self, q: u64) -> Result<i64> {
        if q < 2 {
            return Err(Error::Domain(format!("tail bound needs q >= 2, got {q}")));
        }
        if self.is_zero() {
            return Err(Error::Domain("tail bound of the zero function".into()));
        }
        let dom = &self.terms[0];
        if self.terms.len() == 1 {
            // c t^k q^(lt) vanishes only at t = 0, and only when k > 0.
            return Ok(if dom.k > 0 { 1 } else { 0 });
        }
        // For each subordinate term, find a threshold beyond which its ratio
        // against the dominant term is nonincreasing.
        let mut start = 1i64;
        for term in &self.terms[1..] {
            let delta_l = dom.l - term.l;
            let delta_k = term.k as i64 - dom.k as i64;
            if delta_l == 0 || delta_k <= 0 {
                continue;
            }
            // Ratio ~ t^delta_k / q^(delta_l t): decreasing once
            // (t+1)^delta_k < q^delta_l * t^delta_k.
            let qd = Z::from(q).pow(delta_l as u32);
            let mut t = 1i64;
            loop {
                let lhs = Z::from(t + 1).pow(delta_k as u32);
                let rhs = &qd * Z::from(t).pow(delta_k as u32);
                if lhs < rhs {
                    break;
                }
                t += 1;
            }
            start = start.max(t);
        }
        // Scan forward for the first point where the magnitude sum drops
        // strictly below 1; it stays below from then on.
        let mut a = start;
        loop {
            let mut sum = Q::zero();
            for term in &self.terms[1..] {
                sum += ratio_magnitude(term, dom, q, a);
            }
            if sum < Q::one() {
                return Ok(a);
            }
            a += 1;
            if a > start + 10_000 {
                return Err(Error::Domain("tail bound search exceeded 10000 steps".into()));
            }
        }
    }
}

/// |term / dom| evaluated at integer t >= 1, as an exact rational.
fn ratio_magnitude(term: &ExpTerm, dom: &ExpTerm, q: u64, t: i64) -> Q {
    debug_assert!(t >= 1);
    let c = (&term.c / &dom.c).abs();
    let dk = term.k as i64 - dom.k as i64;
    let tk = if dk >= 0 {
        Q::from_integer(Z::from(t).pow(dk as u32))
    } else {
        Q::new(Z::one(), Z::from(t).pow((-dk) as u32))
    };
    let dl = term.l - dom.l;
    c * tk * crate::q_pow(q, dl * t)
}

/// An arithmetic-progression piece of `Z`: an interval (finite, or a right
/// ray `t >= start`) intersected with a congruence class mod `modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresburgerPiece {
    pub start: i64,
    /// Inclusive right endpoint; `None` is a ray.
    pub end: Option<i64>,
    pub modulus: u64,
    pub residue: u64,
}

impl PresburgerPiece {
    pub fn interval(start: i64, end: i64) -> Self {
        PresburgerPiece { start, end: Some(end), modulus: 1, residue: 0 }
    }

    pub fn ray(start: i64) -> Self {
        PresburgerPiece { start, end: None, modulus: 1, residue: 0 }
    }

    pub fn with_congruence(mut self, modulus: u64, residue: u64) -> Self {
        assert!(modulus >= 1);
        self.modulus = modulus;
        self.residue = residue % modulus;
        self
    }

    pub fn contains(&self, t: i64) -> bool {
        t >= self.start
            && self.end.map_or(true, |e| t <= e)
            && t.rem_euclid(self.modulus as i64) as u64 == self.residue
    }

    pub fn is_ray(&self) -> bool {
        self.end.is_none()
    }

    pub fn is_empty(&self) -> bool {
        match self.end {
            Some(e) => {
                if e < self.start {
                    return true;
                }
                (self.start..=e).all(|t| !self.contains(t))
            }
            // A ray always contains some residue representative.
            None => false,
        }
    }

    /// Intersection of two pieces; `None` when empty.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let start = self.start.max(other.start);
        let end = match (self.end, other.end) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        // Chinese remainder on the congruence constraints.
        let (m1, r1) = (self.modulus as i64, self.residue as i64);
        let (m2, r2) = (other.modulus as i64, other.residue as i64);
        let g = m1.gcd(&m2);
        if (r1 - r2).rem_euclid(g) != 0 {
            return None;
        }
        let lcm = m1 / g * m2;
        // Solve r = r1 mod m1, r = r2 mod m2 by stepping through m1-classes.
        let mut r = r1;
        while r.rem_euclid(m2) != r2.rem_euclid(m2) {
            r += m1;
        }
        let piece = PresburgerPiece {
            start,
            end,
            modulus: lcm as u64,
            residue: r.rem_euclid(lcm) as u64,
        };
        if piece.is_empty() {
            None
        } else {
            Some(piece)
        }
    }
}

/// A function on a disjoint union of Presburger pieces, exponential-polynomial
/// on each piece. Points outside every piece are outside the declared domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PiecewiseExpPoly {
    pieces: Vec<(PresburgerPiece, ExpPoly)>,
}

impl PiecewiseExpPoly {
    pub fn new(pieces: Vec<(PresburgerPiece, ExpPoly)>) -> Result<Self> {
        let pieces: Vec<_> = pieces.into_iter().filter(|(p, _)| !p.is_empty()).collect();
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if pieces[i].0.intersect(&pieces[j].0).is_some() {
                    return Err(Error::Domain(format!(
                        "pieces {i} and {j} overlap; a piecewise function needs a disjoint cover"
                    )));
                }
            }
        }
        Ok(PiecewiseExpPoly { pieces })
    }

    /// The function defined by one polynomial on the ray `t >= start`.
    pub fn on_ray(start: i64, poly: ExpPoly) -> Self {
        PiecewiseExpPoly { pieces: vec![(PresburgerPiece::ray(start), poly)] }
    }

    pub fn pieces(&self) -> &[(PresburgerPiece, ExpPoly)] {
        &self.pieces
    }

    pub fn value(&self, q: u64, t: i64) -> Result<Option<Q>> {
        for (p, f) in &self.pieces {
            if p.contains(t) {
                return Ok(Some(f.specialize(q, t)?));
            }
        }
        Ok(None)
    }

    fn combine(&self, other: &Self, op: impl Fn(&ExpPoly, &ExpPoly) -> ExpPoly) -> Self {
        let mut out = Vec::new();
        for (pa, fa) in &self.pieces {
            for (pb, fb) in &other.pieces {
                if let Some(p) = pa.intersect(pb) {
                    out.push((p, op(fa, fb)));
                }
            }
        }
        PiecewiseExpPoly { pieces: out }
    }

    /// Pointwise sum on the common refinement (domain = intersection).
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a.add(b))
    }

    /// Pointwise product on the common refinement.
    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a.mul(b))
    }

    /// True iff the canonical form on every unbounded piece is the zero
    /// function. By the finite-zero property of exponential polynomials this
    /// is equivalent to the tail of the function vanishing identically.
    pub fn is_eventually_zero(&self) -> Result<bool> {
        let mut saw_ray = false;
        for (p, f) in &self.pieces {
            if p.is_ray() {
                saw_ray = true;
                if !f.is_zero() {
                    return Ok(false);
                }
            }
        }
        if !saw_ray {
            return Err(Error::Domain(
                "is_eventually_zero needs a function defined on a ray".into(),
            ));
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Textual form: `3*t^2*q^(-1*t) + 1/2*q^(2*t)`; pieces `[a..b] mod n`, `[a..) mod n`.
// ---------------------------------------------------------------------------

pub fn format_exp_poly(f: &ExpPoly) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, t) in f.terms.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        let mut parts: Vec<String> = Vec::new();
        let one = Q::one();
        if t.c != one || (t.k == 0 && t.l == 0) {
            if t.c.denom().is_one() {
                parts.push(t.c.numer().to_string());
            } else {
                parts.push(format!("{}/{}", t.c.numer(), t.c.denom()));
            }
        }
        match t.k {
            0 => {}
            1 => parts.push("t".into()),
            k => parts.push(format!("t^{k}")),
        }
        if t.l != 0 {
            parts.push(format!("q^({}*t)", t.l));
        }
        out.push_str(&parts.join("*"));
    }
    out
}

pub fn parse_exp_poly(text: &str) -> Result<ExpPoly> {
    let mut terms = Vec::new();
    // Split on top-level + and - signs (no parens except inside q^(..)).
    let bytes = text.as_bytes();
    let mut depth = 0i32;
    let mut starts = vec![(0usize, 1i64)];
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && i > 0 && bytes[i - 1] != b'^' && bytes[i - 1] != b'(' && bytes[i - 1] != b'*' => {
                starts.push((i, if b == b'+' { 1 } else { -1 }));
            }
            _ => {}
        }
    }
    starts.push((bytes.len(), 1));
    for w in starts.windows(2) {
        let (from, sign) = w[0];
        let to = w[1].0;
        let chunk0 = text[from..to].trim();
        let chunk = chunk0.trim_start_matches(['+', '-']).trim();
        if chunk.is_empty() {
            continue;
        }
        let mut c = Q::from_integer(Z::from(sign));
        let mut k = 0u32;
        let mut l = 0i64;
        for factor in split_factors(chunk) {
            let f = factor.trim();
            if f == "t" {
                k += 1;
            } else if let Some(rest) = f.strip_prefix("t^") {
                k += rest.trim().parse::<u32>().map_err(|e| Error::Parse { pos: 0, msg: e.to_string() })?;
            } else if let Some(rest) = f.strip_prefix("q^(") {
                let inner = rest.strip_suffix(')').ok_or(Error::Parse { pos: 0, msg: "unclosed q^(".into() })?;
                let coeff = inner.strip_suffix("*t").unwrap_or(inner.strip_suffix('t').ok_or(
                    Error::Parse { pos: 0, msg: "q exponent must be linear in t".into() },
                )?);
                let coeff = coeff.trim().trim_end_matches('*').trim();
                let val: i64 = if coeff.is_empty() || coeff == "+" {
                    1
                } else if coeff == "-" {
                    -1
                } else {
                    coeff.parse().map_err(|e: std::num::ParseIntError| Error::Parse { pos: 0, msg: e.to_string() })?
                };
                l += val;
            } else if let Some((n, d)) = f.split_once('/') {
                let n: Z = n.trim().parse().map_err(|_| Error::Parse { pos: 0, msg: format!("bad rational `{f}`") })?;
                let d: Z = d.trim().parse().map_err(|_| Error::Parse { pos: 0, msg: format!("bad rational `{f}`") })?;
                c *= Q::new(n, d);
            } else {
                let n: Z = f.parse().map_err(|_| Error::Parse { pos: 0, msg: format!("bad factor `{f}`") })?;
                c *= Q::from_integer(n);
            }
        }
        terms.push(ExpTerm { c, k, l });
    }
    Ok(ExpPoly::from_terms(terms))
}

fn split_factors(chunk: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in chunk.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '*' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    // Re-join `q^` with its exponent if the split was inside (cannot happen at
    // depth 0, so nothing to fix), and drop empty pieces.
    out.into_iter().filter(|s| !s.trim().is_empty()).collect()
}

pub fn format_piece(p: &PresburgerPiece) -> String {
    let base = match p.end {
        Some(e) => format!("[{}..{}]", p.start, e),
        None => format!("[{}..)", p.start),
    };
    if p.modulus == 1 {
        base
    } else {
        format!("{base} mod {} = {}", p.modulus, p.residue)
    }
}

pub fn parse_piece(text: &str) -> Result<PresburgerPiece> {
    let text = text.trim();
    let (range, congruence) = match text.split_once(" mod ") {
        Some((r, m)) => (r.trim(), Some(m.trim())),
        None => (text, None),
    };
    let inner = range
        .strip_prefix('[')
        .ok_or(Error::Parse { pos: 0, msg: "piece must start with [".into() })?;
    let (lo, rest) = inner
        .split_once("..")
        .ok_or(Error::Parse { pos: 0, msg: "piece needs `..`".into() })?;
    let start: i64 = lo.trim().parse().map_err(|e: std::num::ParseIntError| Error::Parse { pos: 0, msg: e.to_string() })?;
    let end = if rest.trim() == ")" {
        None
    } else {
        let e = rest
            .strip_suffix(']')
            .ok_or(Error::Parse { pos: 0, msg: "piece must end with ] or )".into() })?;
        Some(e.trim().parse::<i64>().map_err(|e: std::num::ParseIntError| Error::Parse { pos: 0, msg: e.to_string() })?)
    };
    let mut piece = PresburgerPiece { start, end, modulus: 1, residue: 0 };
    if let Some(m) = congruence {
        let (modulus, residue) = match m.split_once('=') {
            Some((md, r)) => (
                md.trim().parse::<u64>().map_err(|e: std::num::ParseIntError| Error::Parse { pos: 0, msg: e.to_string() })?,
                r.trim().parse::<u64>().map_err(|e: std::num::ParseIntError| Error::Parse { pos: 0, msg: e.to_string() })?,
            ),
            None => (
                m.parse::<u64>().map_err(|e: std::num::ParseIntError| Error::Parse { pos: 0, msg: e.to_string() })?,
                0,
            ),
        };
        piece = piece.with_congruence(modulus, residue);
    }
    Ok(piece)
}

/// Seeded random exponential polynomial with at most `max_terms` terms —
/// the regression-family generator used by the tail-logic checks.
pub fn random_exp_poly(rng: &mut impl rand::Rng, max_terms: usize) -> ExpPoly {
    let n = rng.gen_range(1..=max_terms);
    let mut terms = Vec::new();
    for _ in 0..n {
        let num = rng.gen_range(-6i64..=6);
        let num = if num == 0 { 1 } else { num };
        let den = rng.gen_range(1i64..=4);
        terms.push(ExpTerm {
            c: crate::q_ratio(num, den),
            k: rng.gen_range(0..=3),
            l: rng.gen_range(-2i64..=2),
        });
    }
    ExpPoly::from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q_int, q_ratio};

    fn term(c: i64, k: u32, l: i64) -> ExpTerm {
        ExpTerm { c: q_int(c), k, l }
    }

    #[test]
    fn cancellation_to_zero() {
        let f = ExpPoly::from_terms(vec![term(2, 0, 1)]);
        let g = ExpPoly::from_terms(vec![term(-2, 0, 1)]);
        assert!(f.add(&g).is_zero());
        // q^t - q^t canonicalizes to the empty list.
        let h = ExpPoly::from_terms(vec![term(1, 0, 1), term(-1, 0, 1)]);
        assert!(h.is_zero());
    }

    #[test]
    fn products() {
        // t * q^t
        let f = ExpPoly::from_terms(vec![term(1, 1, 0)]);
        let g = ExpPoly::from_terms(vec![term(1, 0, 1)]);
        let fg = f.mul(&g);
        assert_eq!(fg.terms().len(), 1);
        assert_eq!((fg.terms()[0].k, fg.terms()[0].l), (1, 1));
        // (t-3)(t-5) = t^2 - 8t + 15
        let a = ExpPoly::from_terms(vec![term(1, 1, 0), term(-3, 0, 0)]);
        let b = ExpPoly::from_terms(vec![term(1, 1, 0), term(-5, 0, 0)]);
        let ab = a.mul(&b);
        let expect = ExpPoly::from_terms(vec![term(1, 2, 0), term(-8, 1, 0), term(15, 0, 0)]);
        assert_eq!(ab, expect);
    }

    #[test]
    fn specialize_examples() {
        let f = ExpPoly::from_terms(vec![term(1, 1, 1)]); // t q^t
        assert_eq!(f.specialize(3, 2).unwrap(), q_int(18));
        assert_eq!(ExpPoly::zero().specialize(7, 3).unwrap(), q_int(0));
        let g = ExpPoly::from_terms(vec![term(1, 0, 1), term(-1, 1, 0)]); // q^t - t
        assert_eq!(g.specialize(2, 4).unwrap(), q_int(12));
        // Negative t on finite pieces: exact rational values.
        assert_eq!(g.specialize(2, -2).unwrap(), q_ratio(1, 4) + q_int(2));
    }

    #[test]
    fn zero_sets() {
        let f = ExpPoly::from_terms(vec![term(1, 1, 0), term(-3, 0, 0)]);
        assert_eq!(f.zero_set_bounded(5, (0, 10)).unwrap(), vec![3]);
        let g = ExpPoly::from_terms(vec![term(1, 0, 1), term(-1, 0, 0)]); // q^t - 1
        assert_eq!(g.zero_set_bounded(2, (0, 10)).unwrap(), vec![0]);
    }

    #[test]
    fn eventually_zero() {
        let zero_ray = PiecewiseExpPoly::on_ray(0, ExpPoly::zero());
        assert!(zero_ray.is_eventually_zero().unwrap());
        let h = ExpPoly::from_terms(vec![term(1, 0, 1), term(-1, 0, 1)]);
        assert!(PiecewiseExpPoly::on_ray(0, h).is_eventually_zero().unwrap());
        // t^2 - 8t + 15 vanishes at 3 and 5 but not eventually.
        let f = ExpPoly::from_terms(vec![term(1, 2, 0), term(-8, 1, 0), term(15, 0, 0)]);
        let pw = PiecewiseExpPoly::on_ray(0, f.clone());
        assert!(!pw.is_eventually_zero().unwrap());
        assert_eq!(f.zero_set_bounded(5, (0, 500)).unwrap(), vec![3, 5]);
        // Bounded domains are rejected.
        let bounded =
            PiecewiseExpPoly::new(vec![(PresburgerPiece::interval(0, 9), ExpPoly::zero())]).unwrap();
        assert!(bounded.is_eventually_zero().is_err());
    }

    #[test]
    fn tail_bounds() {
        // q^t - t at q = 2: a0 = 1 works (2^t > t for t >= 1).
        let g = ExpPoly::from_terms(vec![term(1, 0, 1), term(-1, 1, 0)]);
        let a0 = g.uniform_tail_bound(2).unwrap();
        assert!(a0 <= 2, "expected a small certified bound, got {a0}");
        assert!(g.zero_set_bounded(2, (a0, a0 + 500)).unwrap().is_empty());
        // Constants never vanish.
        assert_eq!(ExpPoly::constant(q_int(1)).uniform_tail_bound(2).unwrap(), 0);
        // t^2 - 8t + 15: zeros at 3 and 5; the certified bound clears them.
        let f = ExpPoly::from_terms(vec![term(1, 2, 0), term(-8, 1, 0), term(15, 0, 0)]);
        let a0 = f.uniform_tail_bound(5).unwrap();
        assert!(a0 >= 6);
        assert!(f.zero_set_bounded(5, (a0, a0 + 500)).unwrap().is_empty());
    }

    #[test]
    fn piece_algebra() {
        let evens = PresburgerPiece::ray(0).with_congruence(2, 0);
        let odds = PresburgerPiece::ray(0).with_congruence(2, 1);
        assert!(evens.intersect(&odds).is_none());
        let all = PresburgerPiece::ray(0);
        let i = evens.intersect(&all).unwrap();
        assert_eq!((i.modulus, i.residue), (2, 0));
        // Disjointness enforcement.
        assert!(PiecewiseExpPoly::new(vec![
            (PresburgerPiece::ray(0), ExpPoly::zero()),
            (PresburgerPiece::interval(5, 9), ExpPoly::zero()),
        ])
        .is_err());
        // CRT intersection.
        let a = PresburgerPiece::ray(0).with_congruence(4, 1);
        let b = PresburgerPiece::ray(0).with_congruence(6, 3);
        let c = a.intersect(&b).unwrap();
        assert_eq!((c.modulus, c.residue), (12, 9));
    }

    #[test]
    fn piecewise_add_mul_pointwise() {
        let f = PiecewiseExpPoly::new(vec![
            (PresburgerPiece::ray(0).with_congruence(2, 0), ExpPoly::from_terms(vec![term(1, 1, 0)])),
            (PresburgerPiece::ray(0).with_congruence(2, 1), ExpPoly::from_terms(vec![term(1, 0, 1)])),
        ])
        .unwrap();
        let g = PiecewiseExpPoly::on_ray(0, ExpPoly::from_terms(vec![term(2, 0, 0)]));
        let sum = f.add(&g);
        let prod = f.mul(&g);
        for q in [2u64, 3, 5] {
            for t in 0..20 {
                let fv = f.value(q, t).unwrap().unwrap();
                let gv = g.value(q, t).unwrap().unwrap();
                assert_eq!(sum.value(q, t).unwrap().unwrap(), &fv + &gv);
                assert_eq!(prod.value(q, t).unwrap().unwrap(), &fv * &gv);
            }
        }
    }

    #[test]
    fn text_round_trip() {
        for text in ["3*t^2*q^(-1*t) + 1/2*q^(2*t)", "t", "q^(1*t)", "0", "5", "-2*t + 7"] {
            let f = parse_exp_poly(text).unwrap();
            let printed = format_exp_poly(&f);
            let g = parse_exp_poly(&printed).unwrap();
            assert_eq!(f, g, "`{text}` -> `{printed}`");
        }
        for text in ["[0..10] mod 3 = 1", "[2..)", "[-5..5]", "[0..) mod 2 = 0"] {
            let p = parse_piece(text).unwrap();
            let printed = format_piece(&p);
            assert_eq!(parse_piece(&printed).unwrap(), p);
        }
    }

    #[test]
    fn random_polys_match_scan_oracle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let f = random_exp_poly(&mut rng, 4);
            for q in [2u64, 3, 7] {
                // add/mul agree with specialize pointwise.
                let g = random_exp_poly(&mut rng, 3);
                for t in [-20i64, -3, 0, 1, 17, 40] {
                    let lhs = f.add(&g).specialize(q, t).unwrap();
                    let rhs = f.specialize(q, t).unwrap() + g.specialize(q, t).unwrap();
                    assert_eq!(lhs, rhs);
                    let lhs = f.mul(&g).specialize(q, t).unwrap();
                    let rhs = f.specialize(q, t).unwrap() * g.specialize(q, t).unwrap();
                    assert_eq!(lhs, rhs);
                }
                // Certified tail bounds really clear the zero set.
                if !f.is_zero() {
                    let a0 = f.uniform_tail_bound(q).unwrap();
                    assert!(
                        f.zero_set_bounded(q, (a0, a0 + 200)).unwrap().is_empty(),
                        "{} at q={q}, a0={a0}",
                        format_exp_poly(&f)
                    );
                }
            }
        }
    }
}
