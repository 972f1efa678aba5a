//! Textual element literals, e.g. `5^2*(3 + 1*5 + 0*5^2)` or `t^-1*(2 + 1*t)`.
//!
//! Printing and parsing round-trip exactly, including the precision marker:
//! an inexact element prints a trailing `+ O(pi^k)` term recording the first
//! untrusted position.

use super::{FieldKind, FieldSpec, LocalElement};
use crate::error::{Error, Result};

/// Formats an element in the literal grammar.
pub fn format_element(e: &LocalElement) -> String {
    let spec = e.spec();
    let sym = spec.uniformizer_symbol();
    match e.ord() {
        None => "0".to_string(),
        Some(val) => {
            let digits: Vec<u64> = e.digits();
            let mut body = String::new();
            for (i, d) in digits.iter().enumerate() {
                if i > 0 {
                    body.push_str(" + ");
                }
                match i {
                    0 => body.push_str(&d.to_string()),
                    1 => body.push_str(&format!("{d}*{sym}")),
                    _ => body.push_str(&format!("{d}*{sym}^{i}")),
                }
            }
            let finite = e.has_finite_expansion();
            let mut out = if val == 0 {
                body
            } else if val == 1 && digits.len() == 1 && digits[0] == 1 && finite {
                return sym;
            } else {
                format!("{sym}^{val}*({body})")
            };
            if !finite {
                let bound = val + digits.len() as i64;
                out.push_str(&format!(" + O({sym}^{bound})"));
            }
            out
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.bump() {
            Some(got) if got == c => Ok(()),
            got => Err(Error::Parse {
                pos: self.pos,
                msg: format!("expected `{}`, found {:?}", c as char, got.map(|b| b as char)),
            }),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(Error::Parse { pos: start, msg: "expected integer".into() });
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<i64>().map_err(|e| Error::Parse { pos: start, msg: e.to_string() })
    }

    /// Consumes the uniformizer symbol if present.
    fn uniformizer(&mut self, spec: &FieldSpec) -> bool {
        self.skip_ws();
        match spec.kind {
            FieldKind::EqualChar => {
                if self.src.get(self.pos) == Some(&b't') {
                    self.pos += 1;
                    true
                } else {
                    false
                }
            }
            FieldKind::MixedChar => {
                let sym = spec.p.to_string();
                let bytes = sym.as_bytes();
                if self.src[self.pos..].starts_with(bytes) {
                    // Must not be a longer number.
                    let after = self.pos + bytes.len();
                    if self.src.get(after).map(|b| b.is_ascii_digit()) != Some(true) {
                        self.pos = after;
                        return true;
                    }
                }
                false
            }
        }
    }
}

/// Parses an element literal. The leading digit sum denotes digit values; a
/// trailing `+ O(pi^k)` marks the element as trusted only below position `k`.
pub fn parse_element(spec: FieldSpec, text: &str) -> Result<LocalElement> {
    let mut lx = Lexer::new(text);
    lx.skip_ws();
    if lx.peek() == Some(b'0') {
        // Possibly plain zero.
        let save = lx.pos;
        let n = lx.integer()?;
        lx.skip_ws();
        if n == 0 && lx.pos >= lx.src.len() {
            return Ok(LocalElement::zero(spec));
        }
        lx.pos = save;
    }

    // Optional valuation prefix `pi^v*(` or a bare uniformizer.
    let mut val: i64 = 0;
    let save = lx.pos;
    let mut prefixed = false;
    if lx.uniformizer(&spec) {
        match lx.peek() {
            Some(b'^') => {
                lx.expect(b'^')?;
                let v = lx.integer()?;
                lx.skip_ws();
                if lx.peek() == Some(b'*') {
                    lx.expect(b'*')?;
                    lx.expect(b'(')?;
                    val = v;
                    prefixed = true;
                } else {
                    // `t^3` alone means pi^v with digit 1.
                    return LocalElement::from_digits(spec, v, vec![1], true);
                }
            }
            None => {
                return LocalElement::from_digits(spec, 1, vec![1], true);
            }
            _ => {
                lx.pos = save;
            }
        }
    }

    // Digit sum: d0 + d1*pi + d2*pi^2 + ... with optional O-term.
    let mut digits: Vec<(usize, u64)> = Vec::new();
    let mut o_bound: Option<i64> = None;
    loop {
        lx.skip_ws();
        if lx.pos >= lx.src.len() {
            break;
        }
        // O(pi^k) precision marker?
        if lx.src[lx.pos..].starts_with(b"O(") {
            lx.pos += 2;
            if !lx.uniformizer(&spec) {
                return Err(Error::Parse { pos: lx.pos, msg: "expected uniformizer in O(..)".into() });
            }
            lx.expect(b'^')?;
            let k = lx.integer()?;
            lx.expect(b')')?;
            o_bound = Some(k);
            break;
        }
        let coeff = lx.integer()?;
        if coeff < 0 {
            return Err(Error::Parse { pos: lx.pos, msg: "digit coefficients must be nonnegative".into() });
        }
        let mut power = 0usize;
        lx.skip_ws();
        if lx.peek() == Some(b'*') {
            lx.expect(b'*')?;
            if !lx.uniformizer(&spec) {
                return Err(Error::Parse { pos: lx.pos, msg: "expected uniformizer after `*`".into() });
            }
            lx.skip_ws();
            if lx.peek() == Some(b'^') {
                lx.expect(b'^')?;
                let k = lx.integer()?;
                if k < 0 {
                    return Err(Error::Parse { pos: lx.pos, msg: "digit powers must be nonnegative".into() });
                }
                power = k as usize;
            } else {
                power = 1;
            }
        }
        digits.push((power, coeff as u64));
        lx.skip_ws();
        match lx.peek() {
            Some(b'+') => {
                lx.expect(b'+')?;
            }
            Some(b')') if prefixed => {
                lx.expect(b')')?;
                prefixed = false;
                lx.skip_ws();
                if lx.pos < lx.src.len() && lx.src[lx.pos..].starts_with(b"+") {
                    lx.expect(b'+')?;
                }
            }
            None => break,
            Some(c) => {
                return Err(Error::Parse { pos: lx.pos, msg: format!("unexpected `{}`", c as char) });
            }
        }
    }
    if prefixed {
        return Err(Error::Parse { pos: lx.pos, msg: "unclosed `(`".into() });
    }
    let width = digits.iter().map(|&(i, _)| i + 1).max().unwrap_or(0);
    let mut vec = vec![0u64; width];
    for (i, d) in digits {
        if vec[i] != 0 {
            return Err(Error::Parse { pos: 0, msg: format!("duplicate digit at power {i}") });
        }
        vec[i] = d;
    }
    match o_bound {
        None => LocalElement::from_digits(spec, val, vec, true),
        Some(k) => {
            let rel = k - val;
            if rel <= 0 {
                return Err(Error::Parse { pos: 0, msg: "O-bound below the valuation".into() });
            }
            let rel = rel as usize;
            if rel < width {
                return Err(Error::Parse { pos: 0, msg: "O-bound inside the stated digits".into() });
            }
            vec.resize(rel, 0);
            LocalElement::from_digits(spec, val, vec, false)
        }
    }
}
