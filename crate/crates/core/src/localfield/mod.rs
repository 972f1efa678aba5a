//! Exact finite-precision arithmetic in nonarchimedean local fields.
//!
//! Elements of `Q_p` (mixed characteristic) and `F_p((t))` (equal
//! characteristic) carry a valuation plus base-p digits. Exactly known values
//! stay exact under ring operations: in mixed characteristic they are stored
//! as `pi^v * u` with `u` a signed integer prime to p, in equal characteristic
//! as a finite coefficient vector (negation is digitwise there). Everything
//! else is a digit window with a tracked precision bound, and an operation
//! whose result cannot be distinguished from zero at the joint precision
//! reports the loss instead of guessing.
//!
//! The uniformizer is `p` itself in mixed characteristic and `t` in equal
//! characteristic; no ramified extensions are represented.

mod literal;
pub mod residue;

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero as NumZero};

/// Which completion the field is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FieldKind {
    /// `Q_p`: base-p digit arithmetic with carries.
    #[serde(rename = "qp")]
    MixedChar,
    /// `F_p((t))`: coefficient arithmetic without carries.
    #[serde(rename = "fpt")]
    EqualChar,
}

impl FieldKind {
    pub fn label(self) -> &'static str {
        match self {
            FieldKind::MixedChar => "qp",
            FieldKind::EqualChar => "fpt",
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A concrete local field together with a working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    /// Odd prime residual characteristic.
    pub p: u64,
    /// Digit budget N: inexact elements keep at most N digits.
    pub precision: usize,
}

impl FieldSpec {
    pub fn new(kind: FieldKind, p: u64, precision: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidSpec(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidSpec("p = 2 is not supported".into()));
        }
        if precision < 2 {
            return Err(Error::InvalidSpec("precision must be at least 2".into()));
        }
        Ok(FieldSpec { kind, p, precision })
    }

    pub fn qp(p: u64, precision: usize) -> Result<Self> {
        Self::new(FieldKind::MixedChar, p, precision)
    }

    pub fn fpt(p: u64, precision: usize) -> Result<Self> {
        Self::new(FieldKind::EqualChar, p, precision)
    }

    /// Printed symbol of the uniformizer: the prime itself, or `t`.
    pub fn uniformizer_symbol(&self) -> String {
        match self.kind {
            FieldKind::MixedChar => self.p.to_string(),
            FieldKind::EqualChar => "t".to_string(),
        }
    }

    /// Smallest positive quadratic nonresidue mod p; the fixed nonsquare unit.
    pub fn nonresidue(&self) -> u64 {
        (2..self.p)
            .find(|&u| legendre(u, self.p) == -1)
            .expect("odd prime has a nonresidue")
    }

    /// Endoscopy-facing operations need square classes to behave tamely.
    pub fn check_endoscopy_ready(&self) -> Result<()> {
        if self.p < 5 {
            return Err(Error::InvalidSpec(format!(
                "p = {} is rejected for endoscopy-facing operations (need p >= 5)",
                self.p
            )));
        }
        Ok(())
    }
}

/// Legendre symbol of `a` mod the odd prime `p`, with `legendre(0) = 0`.
pub fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let mut base = a % p;
    let mut exp = (p - 1) / 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// One of the four square classes of `F^x / (F^x)^2` for p odd.
///
/// `U` is the class of the fixed nonsquare unit, `Pi` the uniformizer class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum SquareClass {
    One,
    U,
    Pi,
    UPi,
}

impl SquareClass {
    pub fn from_parts(val_parity_odd: bool, unit_is_residue: bool) -> Self {
        match (val_parity_odd, unit_is_residue) {
            (false, true) => SquareClass::One,
            (false, false) => SquareClass::U,
            (true, true) => SquareClass::Pi,
            (true, false) => SquareClass::UPi,
        }
    }

    pub fn val_parity_odd(self) -> bool {
        matches!(self, SquareClass::Pi | SquareClass::UPi)
    }

    pub fn unit_is_residue(self) -> bool {
        matches!(self, SquareClass::One | SquareClass::Pi)
    }

    /// Group law of `F^x/(F^x)^2` as a Klein four-group.
    pub fn mul(self, other: Self) -> Self {
        Self::from_parts(
            self.val_parity_odd() ^ other.val_parity_odd(),
            self.unit_is_residue() == other.unit_is_residue(),
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            SquareClass::One => "1",
            SquareClass::U => "u",
            SquareClass::Pi => "pi",
            SquareClass::UPi => "u*pi",
        }
    }

    pub const ALL: [SquareClass; 4] = [
        SquareClass::One,
        SquareClass::U,
        SquareClass::Pi,
        SquareClass::UPi,
    ];
}

/// Truncated element of the field: valuation plus digit data.
#[derive(Debug, Clone)]
pub struct LocalElement {
    spec: FieldSpec,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Zero,
    /// Mixed characteristic, exactly known: `pi^val * unit` with p not
    /// dividing the (possibly negative) integer `unit`.
    ExactInt { val: i64, unit: BigInt },
    /// Digit window (always in equal characteristic, where `exact` means the
    /// coefficient tail is zero; in mixed characteristic windows are always
    /// inexact). `digits[0] != 0`.
    Window { val: i64, digits: Vec<u64>, exact: bool },
}

impl LocalElement {
    pub fn zero(spec: FieldSpec) -> Self {
        LocalElement { spec, repr: Repr::Zero }
    }

    pub fn one(spec: FieldSpec) -> Self {
        LocalElement::from_integer(spec, 1)
    }

    /// The uniformizer `pi` (that is, `p` or `t`).
    pub fn uniformizer(spec: FieldSpec) -> Self {
        LocalElement::one(spec).shift(1)
    }

    fn normalize_window(spec: FieldSpec, val: i64, mut digits: Vec<u64>, exact: bool) -> Result<Self> {
        let mut val = val;
        while digits.first() == Some(&0) {
            digits.remove(0);
            val += 1;
        }
        if digits.is_empty() {
            return if exact {
                Ok(LocalElement::zero(spec))
            } else {
                Err(Error::PrecisionLoss { digits: 0 })
            };
        }
        let mut exact = exact;
        if digits.len() > spec.precision && !(exact && spec.kind == FieldKind::EqualChar) {
            // Inexact windows are capped at the digit budget. Equal-char
            // exact vectors may be longer; they are still exact data.
            digits.truncate(spec.precision);
            exact = false;
        }
        if exact {
            while digits.len() > 1 && digits.last() == Some(&0) {
                digits.pop();
            }
        }
        if exact && spec.kind == FieldKind::MixedChar {
            // Mixed-char exact data lives in the integer representation.
            let mut unit = BigInt::from(0);
            for &d in digits.iter().rev() {
                unit = unit * spec.p + d;
            }
            return Ok(LocalElement { spec, repr: Repr::ExactInt { val, unit } });
        }
        Ok(LocalElement { spec, repr: Repr::Window { val, digits, exact } })
    }

    /// Builds an element from explicit digits starting at valuation `val`.
    pub fn from_digits(spec: FieldSpec, val: i64, digits: Vec<u64>, exact: bool) -> Result<Self> {
        if digits.iter().any(|&d| d >= spec.p) {
            return Err(Error::InvalidSpec(format!("digit out of range for p = {}", spec.p)));
        }
        Self::normalize_window(spec, val, digits, exact)
    }

    /// Embeds an integer exactly. In equal characteristic an integer reduces
    /// to its residue.
    pub fn from_integer(spec: FieldSpec, n: i64) -> Self {
        LocalElement::from_bigint(spec, BigInt::from(n))
    }

    pub fn from_bigint(spec: FieldSpec, n: BigInt) -> Self {
        match spec.kind {
            FieldKind::EqualChar => {
                let r = n.mod_floor(&BigInt::from(spec.p)).to_u64().unwrap();
                if r == 0 {
                    LocalElement::zero(spec)
                } else {
                    LocalElement { spec, repr: Repr::Window { val: 0, digits: vec![r], exact: true } }
                }
            }
            FieldKind::MixedChar => {
                if n.is_zero() {
                    return LocalElement::zero(spec);
                }
                let p = BigInt::from(spec.p);
                let mut unit = n;
                let mut val = 0i64;
                while (&unit % &p).is_zero() {
                    unit /= &p;
                    val += 1;
                }
                LocalElement { spec, repr: Repr::ExactInt { val, unit } }
            }
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn is_exact(&self) -> bool {
        match &self.repr {
            Repr::Zero | Repr::ExactInt { .. } => true,
            Repr::Window { exact, .. } => *exact,
        }
    }

    /// Valuation; `None` encodes `+infinity` (the exact zero).
    pub fn ord(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::ExactInt { val, .. } => Some(*val),
            Repr::Window { val, .. } => Some(*val),
        }
    }

    /// Angular component: the leading digit, with `ac(0) = 0` by convention.
    pub fn ac(&self) -> u64 {
        match &self.repr {
            Repr::Zero => 0,
            Repr::ExactInt { unit, .. } => {
                unit.mod_floor(&BigInt::from(self.spec.p)).to_u64().unwrap()
            }
            Repr::Window { digits, .. } => digits[0],
        }
    }

    /// Number of trusted digits. Exact elements are fully known and report
    /// the field's digit budget.
    pub fn effective_precision(&self) -> usize {
        match &self.repr {
            Repr::Zero | Repr::ExactInt { .. } => self.spec.precision,
            Repr::Window { digits, exact, .. } => {
                if *exact {
                    self.spec.precision.max(digits.len())
                } else {
                    digits.len()
                }
            }
        }
    }

    /// Unit-part digits starting at the valuation, `len` of them.
    pub fn unit_digits(&self, len: usize) -> Vec<u64> {
        match &self.repr {
            Repr::Zero => vec![0; len],
            Repr::ExactInt { unit, .. } => bigint_digits(unit, self.spec.p, len),
            Repr::Window { digits, .. } => {
                digits.iter().copied().chain(std::iter::repeat(0)).take(len).collect()
            }
        }
    }

    /// Stored digits: the finite expansion when one exists, otherwise the
    /// window capped at the digit budget.
    pub fn digits(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Zero => Vec::new(),
            Repr::ExactInt { unit, .. } => {
                if unit.is_negative() {
                    bigint_digits(unit, self.spec.p, self.spec.precision)
                } else {
                    let mut out = Vec::new();
                    let mut v = unit.clone();
                    let p = BigInt::from(self.spec.p);
                    while !v.is_zero() {
                        out.push(v.mod_floor(&p).to_u64().unwrap());
                        v = v.div_floor(&p);
                    }
                    out
                }
            }
            Repr::Window { digits, .. } => digits.clone(),
        }
    }

    /// Whether printing the stored digits reproduces the element exactly
    /// (exact zero, positive mixed-char integers, equal-char exact vectors).
    pub fn has_finite_expansion(&self) -> bool {
        match &self.repr {
            Repr::Zero => true,
            Repr::ExactInt { unit, .. } => !unit.is_negative(),
            Repr::Window { exact, .. } => *exact,
        }
    }

    /// Absolute position below which every digit is known: the value is
    /// determined modulo `pi^known_below()`. `None` means known exactly.
    pub fn known_below(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero | Repr::ExactInt { .. } => None,
            Repr::Window { val, digits, exact } => {
                if *exact {
                    None
                } else {
                    Some(val + digits.len() as i64)
                }
            }
        }
    }

    fn check_same_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(format!(
                "{:?} p={} vs {:?} p={}",
                self.spec.kind, self.spec.p, other.spec.kind, other.spec.p
            )));
        }
        Ok(())
    }

    /// Digit at absolute position `pos` (offset from valuation 0).
    fn abs_digit(&self, pos: i64) -> u64 {
        match &self.repr {
            Repr::Zero => 0,
            Repr::ExactInt { val, unit } => {
                if pos < *val {
                    0
                } else {
                    let k = (pos - val) as u32;
                    let p = BigInt::from(self.spec.p);
                    unit.div_floor(&p.pow(k)).mod_floor(&p).to_u64().unwrap()
                }
            }
            Repr::Window { val, digits, .. } => {
                if pos < *val {
                    0
                } else {
                    digits.get((pos - val) as usize).copied().unwrap_or(0)
                }
            }
        }
    }

    fn as_bigint_scaled(&self, base: i64) -> BigInt {
        // The integer x / pi^base for elements with ord >= base (mixed char).
        match &self.repr {
            Repr::Zero => BigInt::from(0),
            Repr::ExactInt { val, unit } => {
                debug_assert!(*val >= base);
                unit * BigInt::from(self.spec.p).pow((val - base) as u32)
            }
            Repr::Window { .. } => unreachable!("bigint path is for exact mixed-char values"),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_spec(other)?;
        self.add_signed(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_spec(other)?;
        self.add_signed(other, true)
    }

    pub fn neg(&self) -> Result<Self> {
        LocalElement::zero(self.spec).sub(self)
    }

    fn add_signed(&self, other: &Self, negate: bool) -> Result<Self> {
        match (&self.repr, &other.repr) {
            (Repr::Zero, Repr::Zero) => Ok(LocalElement::zero(self.spec)),
            (_, Repr::Zero) => Ok(self.clone()),
            (Repr::Zero, _) if !negate => Ok(other.clone()),
            _ => {
                let mixed_exact = self.spec.kind == FieldKind::MixedChar
                    && matches!(self.repr, Repr::Zero | Repr::ExactInt { .. })
                    && matches!(other.repr, Repr::Zero | Repr::ExactInt { .. });
                if mixed_exact {
                    let base = self.ord().unwrap_or(i64::MAX).min(other.ord().unwrap_or(i64::MAX));
                    let a = self.as_bigint_scaled_or_zero(base);
                    let b = other.as_bigint_scaled_or_zero(base);
                    let s = if negate { a - b } else { a + b };
                    return Ok(LocalElement::from_bigint(self.spec, s).shift(base));
                }
                self.window_addsub(other, negate)
            }
        }
    }

    fn as_bigint_scaled_or_zero(&self, base: i64) -> BigInt {
        if self.is_zero() {
            BigInt::from(0)
        } else {
            self.as_bigint_scaled(base)
        }
    }

    fn window_addsub(&self, other: &Self, negate: bool) -> Result<Self> {
        let p = self.spec.p;
        let lo = [self.ord(), other.ord()].into_iter().flatten().min().unwrap();
        let data_end = |e: &LocalElement| -> i64 {
            match &e.repr {
                Repr::Zero => lo,
                Repr::ExactInt { .. } => lo + self.spec.precision as i64 + 2,
                Repr::Window { val, digits, .. } => val + digits.len() as i64,
            }
        };
        let known = match (self.known_below(), other.known_below()) {
            (None, None) => None,
            (Some(k), None) | (None, Some(k)) => Some(k),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let slack = self.spec.precision as i64 + 2;
        let data_hi = data_end(self).max(data_end(other)) + if negate { slack } else { 1 };
        let hi = match known {
            None => data_hi,
            Some(k) => k.min(data_hi),
        };
        let len = (hi - lo).max(0) as usize;
        let mut buf = vec![0u64; len];
        let mut carry = 0i64;
        for (i, slot) in buf.iter_mut().enumerate() {
            let pos = lo + i as i64;
            let da = self.abs_digit(pos) as i64;
            let db = other.abs_digit(pos) as i64;
            let s = if negate { da - db + carry } else { da + db + carry };
            match self.spec.kind {
                FieldKind::MixedChar => {
                    let d = s.rem_euclid(p as i64);
                    carry = (s - d) / p as i64;
                    *slot = d as u64;
                }
                FieldKind::EqualChar => {
                    *slot = s.rem_euclid(p as i64) as u64;
                    carry = 0;
                }
            }
        }
        let both_exact = self.is_exact() && other.is_exact() && carry == 0;
        let first = buf.iter().position(|&d| d != 0);
        match first {
            None => {
                if both_exact && known.is_none() {
                    Ok(LocalElement::zero(self.spec))
                } else {
                    Err(Error::PrecisionLoss { digits: len })
                }
            }
            Some(idx) => {
                let val = lo + idx as i64;
                if let Some(k) = known {
                    if val >= k {
                        return Err(Error::PrecisionLoss { digits: 0 });
                    }
                }
                let digits = buf[idx..].to_vec();
                LocalElement::normalize_window(self.spec, val, digits, both_exact && known.is_none())
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_spec(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(LocalElement::zero(self.spec));
        }
        if let (Repr::ExactInt { val: va, unit: ua }, Repr::ExactInt { val: vb, unit: ub }) =
            (&self.repr, &other.repr)
        {
            return Ok(LocalElement { spec: self.spec, repr: Repr::ExactInt { val: va + vb, unit: ua * ub } });
        }
        let (va, vb) = (self.ord().unwrap(), other.ord().unwrap());
        // Output precision: both exact means the full finite product survives
        // (equal char only here), otherwise the weaker window wins.
        let ea = self.is_exact();
        let eb = other.is_exact();
        let la = self.stored_len();
        let lb = other.stored_len();
        let out_prec = if ea && eb {
            la + lb
        } else if ea {
            lb
        } else if eb {
            la
        } else {
            la.min(lb)
        };
        let need = out_prec + 1;
        let da = self.unit_digits(la.min(need).max(1));
        let db = other.unit_digits(lb.min(need).max(1));
        let p = self.spec.p;
        let conv_len = (da.len() + db.len()).min(need);
        let mut buf = vec![0u128; conv_len];
        for (i, &x) in da.iter().enumerate() {
            if i >= conv_len {
                break;
            }
            for (j, &y) in db.iter().enumerate() {
                if i + j >= conv_len {
                    break;
                }
                buf[i + j] += (x as u128) * (y as u128);
            }
        }
        let mut digits = vec![0u64; conv_len];
        let mut carry: u128 = 0;
        for i in 0..conv_len {
            let s = buf[i] + carry;
            digits[i] = (s % p as u128) as u64;
            carry = match self.spec.kind {
                FieldKind::MixedChar => s / p as u128,
                FieldKind::EqualChar => 0,
            };
        }
        while carry > 0 {
            digits.push((carry % p as u128) as u64);
            carry /= p as u128;
        }
        let exact = ea && eb;
        digits.truncate(out_prec.max(1));
        LocalElement::normalize_window(self.spec, va + vb, digits, exact)
    }

    fn stored_len(&self) -> usize {
        match &self.repr {
            Repr::Zero => 0,
            Repr::ExactInt { unit, .. } => {
                if unit.is_negative() {
                    self.spec.precision
                } else {
                    // number of base-p digits of |unit|
                    let mut n = 0usize;
                    let mut v = unit.abs();
                    let p = BigInt::from(self.spec.p);
                    while !v.is_zero() {
                        v = v.div_floor(&p);
                        n += 1;
                    }
                    n.max(1)
                }
            }
            Repr::Window { digits, .. } => digits.len(),
        }
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let val = self.ord().unwrap();
        // pi^v * (+-1) inverts exactly.
        if let Repr::ExactInt { unit, .. } = &self.repr {
            if unit.abs() == BigInt::from(1) {
                return Ok(LocalElement { spec: self.spec, repr: Repr::ExactInt { val: -val, unit: unit.clone() } });
            }
        }
        if let Repr::Window { digits, exact, .. } = &self.repr {
            if *exact && digits == &vec![1] {
                return Ok(LocalElement::one(self.spec).shift(-val));
            }
        }
        let p = self.spec.p;
        let prec = if self.is_exact() { self.spec.precision } else { self.stored_len() };
        let digits = self.unit_digits(prec);
        let mut inv_digits = vec![0u64; prec];
        let mut r = vec![0i64; prec + 1];
        r[0] = 1;
        let d0_inv = mod_inverse(digits[0], p);
        for k in 0..prec {
            let q = (r[k].rem_euclid(p as i64) as u64) * d0_inv % p;
            inv_digits[k] = q;
            if q == 0 {
                // Normalize the digit at k to zero and carry the remainder up.
                match self.spec.kind {
                    FieldKind::MixedChar => {
                        let carry = r[k] / p as i64;
                        debug_assert_eq!(r[k] % p as i64, 0);
                        if k + 1 <= prec {
                            r[k + 1] += carry;
                        }
                    }
                    FieldKind::EqualChar => {}
                }
                continue;
            }
            for (j, &ud) in digits.iter().enumerate() {
                let pos = k + j;
                if pos >= r.len() {
                    break;
                }
                r[pos] -= (q * ud) as i64;
            }
            match self.spec.kind {
                FieldKind::MixedChar => {
                    // Renormalize r[k] (must become divisible by p) and carry.
                    debug_assert_eq!(r[k].rem_euclid(p as i64), 0);
                    let carry = r[k] / p as i64;
                    r[k] = 0;
                    if k + 1 <= prec {
                        r[k + 1] += carry;
                    }
                }
                FieldKind::EqualChar => {
                    r[k] = 0;
                }
            }
        }
        LocalElement::normalize_window(self.spec, -val, inv_digits, false)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    /// Multiplies by `pi^k` (exact shift of the valuation).
    pub fn shift(&self, k: i64) -> Self {
        let repr = match &self.repr {
            Repr::Zero => Repr::Zero,
            Repr::ExactInt { val, unit } => Repr::ExactInt { val: val + k, unit: unit.clone() },
            Repr::Window { val, digits, exact } => {
                Repr::Window { val: val + k, digits: digits.clone(), exact: *exact }
            }
        };
        LocalElement { spec: self.spec, repr }
    }

    /// The exact element given by the first `digits` stored digits.
    pub fn truncate_exact(&self, digits: usize) -> LocalElement {
        match self.ord() {
            None => self.clone(),
            Some(val) => {
                let ds = self.unit_digits(digits);
                LocalElement::from_digits(self.spec, val, ds, true)
                    .unwrap_or_else(|_| LocalElement::zero(self.spec))
            }
        }
    }

    /// Proves equality or inequality where the data allows; errors when the
    /// joint precision is insufficient to decide.
    pub fn eq_checked(&self, other: &Self) -> Result<bool> {
        self.check_same_spec(other)?;
        match self.sub(other) {
            Ok(d) => Ok(d.is_zero()),
            Err(Error::PrecisionLoss { .. }) => Err(Error::InsufficientPrecision(
                "elements agree on the joint digit window but exact equality is undecidable".into(),
            )),
            Err(e) => Err(e),
        }
    }

    /// True when the elements agree on their joint trusted window.
    pub fn agrees_on_window(&self, other: &Self) -> Result<bool> {
        self.check_same_spec(other)?;
        match self.sub(other) {
            Ok(d) => Ok(d.is_zero()),
            Err(Error::PrecisionLoss { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    }

    /// Reduction modulo `pi^m` as digits on `[0, m)`. Errors on negative
    /// valuation or insufficient precision.
    pub fn digits_mod(&self, m: usize) -> Result<Vec<u64>> {
        match &self.repr {
            Repr::Zero => Ok(vec![0; m]),
            _ => {
                let val = self.ord().unwrap();
                if val < 0 {
                    return Err(Error::Domain("element has negative valuation".into()));
                }
                if let Some(k) = self.known_below() {
                    if k < m as i64 {
                        return Err(Error::InsufficientPrecision(format!(
                            "element known only modulo pi^{k}, need pi^{m}"
                        )));
                    }
                }
                Ok((0..m as i64).map(|pos| self.abs_digit(pos)).collect())
            }
        }
    }

    /// Square class of a nonzero element, certified by an explicit square
    /// root of the quotient by the class representative.
    pub fn square_class(&self) -> Result<SquareClass> {
        if self.is_zero() {
            return Err(Error::Domain("square class of zero".into()));
        }
        let val = self.ord().unwrap();
        if self.effective_precision() < 2 {
            return Err(Error::InsufficientPrecision(
                "need at least 2 trusted digits to certify a square class".into(),
            ));
        }
        let class = SquareClass::from_parts(val.rem_euclid(2) == 1, legendre(self.ac(), self.spec.p) == 1);
        let rep = class_representative(self.spec, class);
        let quotient = self.div(&rep)?;
        let root = quotient.sqrt()?;
        debug_assert!(root.mul(&root).unwrap().agrees_on_window(&quotient).unwrap());
        Ok(class)
    }

    /// Hensel square root. Requires even valuation and a residue leading
    /// digit; picks the root whose angular component lies in `1..=(p-1)/2`.
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let val = self.ord().unwrap();
        if val.rem_euclid(2) == 1 {
            return Err(Error::OddValuationSqrt);
        }
        let p = self.spec.p;
        if legendre(self.ac(), p) != 1 {
            return Err(Error::NonResidueSqrt);
        }
        let prec = if self.is_exact() { self.spec.precision } else { self.stored_len() };
        let digits = self.unit_digits(prec);
        let r0 = (1..=(p - 1) / 2)
            .find(|&r| r * r % p == digits[0])
            .expect("leading digit is a residue");
        let unit = LocalElement::normalize_window(self.spec, 0, digits, false)?;
        let two_inv = LocalElement::from_integer(self.spec, 2).inv()?;
        let mut root = LocalElement::from_digits(self.spec, 0, vec![r0], false)?;
        let mut known = 1usize;
        while known < prec {
            let padded: Vec<u64> =
                root.unit_digits(prec);
            root = LocalElement::normalize_window(self.spec, 0, padded, false)?;
            root = root.add(&unit.div(&root)?)?.mul(&two_inv)?;
            known = (known * 2).min(prec);
        }
        let mut out = root.unit_digits(prec);
        out.truncate(prec);
        LocalElement::normalize_window(self.spec, val / 2, out, false)
    }

    /// Hilbert symbol `(a, b)` by the tame formula, valid for all odd p.
    pub fn hilbert_symbol(&self, other: &Self) -> Result<i8> {
        self.check_same_spec(other)?;
        if self.is_zero() || other.is_zero() {
            return Err(Error::Domain("hilbert symbol of zero".into()));
        }
        Ok(hilbert_tame(
            self.spec.p,
            self.ord().unwrap(),
            self.ac(),
            other.ord().unwrap(),
            other.ac(),
        ))
    }
}

fn bigint_digits(n: &BigInt, p: u64, len: usize) -> Vec<u64> {
    let p_big = BigInt::from(p);
    let mut out = Vec::with_capacity(len);
    let mut v = n.clone();
    for _ in 0..len {
        out.push(v.mod_floor(&p_big).to_u64().unwrap());
        v = v.div_floor(&p_big);
    }
    out
}

/// Tame Hilbert symbol from valuations and leading digits:
/// `(-1)^(ord a * ord b * (p-1)/2) * leg(ac a)^(ord b) * leg(ac b)^(ord a)`.
pub fn hilbert_tame(p: u64, va: i64, ua: u64, vb: i64, ub: u64) -> i8 {
    let eps = ((p - 1) / 2) % 2;
    let mut sign = 1i8;
    if va.rem_euclid(2) == 1 && vb.rem_euclid(2) == 1 && eps == 1 {
        sign = -sign;
    }
    if vb.rem_euclid(2) == 1 && legendre(ua, p) == -1 {
        sign = -sign;
    }
    if va.rem_euclid(2) == 1 && legendre(ub, p) == -1 {
        sign = -sign;
    }
    sign
}

/// Canonical representative of a square class: 1, u, pi, or u*pi.
pub fn class_representative(spec: FieldSpec, class: SquareClass) -> LocalElement {
    let u = spec.nonresidue();
    let (val, digit) = match class {
        SquareClass::One => (0, 1),
        SquareClass::U => (0, u),
        SquareClass::Pi => (1, 1),
        SquareClass::UPi => (1, u),
    };
    LocalElement::from_digits(spec, val, vec![digit], true).unwrap()
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

pub use literal::{format_element, parse_element};

impl std::fmt::Display for LocalElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", format_element(self))
    }
}

#[cfg(test)]
mod tests;
