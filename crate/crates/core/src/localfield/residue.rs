//! Arithmetic in the residue rings `O/pi^m` with elements packed into `u64`.
//!
//! Both completions use the same encoding `x = sum d_i p^i` with digits
//! `d_i < p`; mixed characteristic reduces the integer value mod `p^m`, equal
//! characteristic multiplies truncated polynomials in `F_p[t]/(t^m)`.  Sharing
//! the encoding lets every counting routine run unchanged over either field.

use super::{FieldKind, FieldSpec, LocalElement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueRing {
    pub p: u64,
    pub m: usize,
    pub kind: FieldKind,
    /// p^m; also the number of elements.
    pub size: u64,
}

impl ResidueRing {
    pub fn new(spec: &FieldSpec, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("residue ring needs m >= 1".into()));
        }
        let mut size: u64 = 1;
        for _ in 0..m {
            size = size
                .checked_mul(spec.p)
                .ok_or_else(|| Error::Domain(format!("p^{m} overflows the packed ring")))?;
        }
        if size > 1 << 56 {
            return Err(Error::Domain(format!("p^{m} too large for the packed ring")));
        }
        Ok(ResidueRing { p: spec.p, m, kind: spec.kind, size })
    }

    #[inline]
    pub fn pow_p(&self, k: usize) -> u64 {
        let mut v = 1u64;
        for _ in 0..k {
            v *= self.p;
        }
        v
    }

    #[inline]
    pub fn digit(&self, x: u64, i: usize) -> u64 {
        (x / self.pow_p(i)) % self.p
    }

    pub fn from_digits(&self, digits: &[u64]) -> u64 {
        let mut v = 0u64;
        for &d in digits.iter().rev() {
            v = v * self.p + d % self.p;
        }
        v % self.size
    }

    pub fn to_digits(&self, x: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.m);
        let mut v = x;
        for _ in 0..self.m {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    /// Reduction of a local element with valuation >= 0 into the ring.
    pub fn reduce(&self, e: &LocalElement) -> Result<u64> {
        let digits = e.digits_mod(self.m)?;
        Ok(self.from_digits(&digits))
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            FieldKind::MixedChar => (a + b) % self.size,
            FieldKind::EqualChar => {
                let mut out = 0u64;
                let mut pk = 1u64;
                let (mut x, mut y) = (a, b);
                for _ in 0..self.m {
                    out += (x % self.p + y % self.p) % self.p * pk;
                    x /= self.p;
                    y /= self.p;
                    pk *= self.p;
                }
                out
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        match self.kind {
            FieldKind::MixedChar => (self.size - a % self.size) % self.size,
            FieldKind::EqualChar => {
                let mut out = 0u64;
                let mut pk = 1u64;
                let mut x = a;
                for _ in 0..self.m {
                    out += (self.p - x % self.p) % self.p * pk;
                    x /= self.p;
                    pk *= self.p;
                }
                out
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            FieldKind::MixedChar => ((a as u128 * b as u128) % self.size as u128) as u64,
            FieldKind::EqualChar => {
                // Truncated convolution of coefficient vectors.
                let mut da = [0u64; 32];
                let mut db = [0u64; 32];
                let (mut x, mut y) = (a, b);
                for i in 0..self.m {
                    da[i] = x % self.p;
                    db[i] = y % self.p;
                    x /= self.p;
                    y /= self.p;
                }
                let mut out = 0u64;
                let mut pk = 1u64;
                for k in 0..self.m {
                    let mut c = 0u64;
                    for i in 0..=k {
                        c += da[i] * db[k - i] % self.p;
                    }
                    out += c % self.p * pk;
                    pk *= self.p;
                }
                out
            }
        }
    }

    /// Digit valuation: number of trailing zero digits; `None` when x = 0, i.e.
    /// the valuation is at least m.
    #[inline]
    pub fn ord(&self, x: u64) -> Option<usize> {
        if x == 0 {
            return None;
        }
        let mut v = x;
        let mut k = 0usize;
        while v % self.p == 0 {
            v /= self.p;
            k += 1;
        }
        Some(k)
    }

    /// Leading digit of a nonzero x.
    #[inline]
    pub fn ac(&self, x: u64) -> u64 {
        debug_assert!(x != 0);
        let mut v = x;
        while v % self.p == 0 {
            v /= self.p;
        }
        v % self.p
    }

    /// Exact division by p^k (requires ord >= k).
    #[inline]
    pub fn shift_down(&self, x: u64, k: usize) -> u64 {
        debug_assert_eq!(x % self.pow_p(k), 0);
        x / self.pow_p(k)
    }

    /// Multiplicative inverse of a unit.
    pub fn inv_unit(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0);
        match self.kind {
            FieldKind::MixedChar => {
                // Extended Euclid on (a, p^m).
                let (mut r0, mut r1) = (self.size as i128, a as i128);
                let (mut t0, mut t1) = (0i128, 1i128);
                while r1 != 0 {
                    let q = r0 / r1;
                    (r0, r1) = (r1, r0 - q * r1);
                    (t0, t1) = (t1, t0 - q * t1);
                }
                debug_assert_eq!(r0, 1);
                t0.rem_euclid(self.size as i128) as u64
            }
            FieldKind::EqualChar => {
                // Power series inversion digit by digit.
                let d0 = a % self.p;
                let d0_inv = super::mod_inverse(d0, self.p);
                let mut inv = [0u64; 32];
                let mut da = [0u64; 32];
                let mut v = a;
                for i in 0..self.m {
                    da[i] = v % self.p;
                    v /= self.p;
                }
                inv[0] = d0_inv;
                for k in 1..self.m {
                    // coefficient of t^k in a*inv must vanish
                    let mut c = 0u64;
                    for i in 1..=k {
                        c += da[i] * inv[k - i] % self.p;
                    }
                    inv[k] = (self.p - c % self.p) % self.p * d0_inv % self.p;
                }
                let mut out = 0u64;
                let mut pk = 1u64;
                for x in inv.iter().take(self.m) {
                    out += x * pk;
                    pk *= self.p;
                }
                out
            }
        }
    }

    /// Restriction of this ring to a shallower modulus m' <= m.
    pub fn truncate_to(&self, x: u64, m_new: usize) -> u64 {
        debug_assert!(m_new <= self.m);
        x % self.pow_p(m_new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::FieldSpec;

    fn rings() -> (ResidueRing, ResidueRing) {
        let qp = FieldSpec::qp(5, 8).unwrap();
        let ft = FieldSpec::fpt(5, 8).unwrap();
        (ResidueRing::new(&qp, 4).unwrap(), ResidueRing::new(&ft, 4).unwrap())
    }

    #[test]
    fn mixed_char_matches_integer_arithmetic() {
        let (r, _) = rings();
        assert_eq!(r.add(624, 1), 0);
        assert_eq!(r.mul(5, 125), 0);
        assert_eq!(r.mul(7, r.inv_unit(7)), 1);
        assert_eq!(r.ord(50), Some(2));
        assert_eq!(r.ac(50), 2);
    }

    #[test]
    fn equal_char_has_no_carries() {
        let (_, r) = rings();
        // (3) + (4) = 2 without a carry into the next digit.
        assert_eq!(r.add(3, 4), 2);
        // (1 + t) * (1 + 4t) = 1 + 0t + 4t^2
        let a = r.from_digits(&[1, 1]);
        let b = r.from_digits(&[1, 4]);
        assert_eq!(r.to_digits(r.mul(a, b)), vec![1, 0, 4, 0]);
        let u = r.from_digits(&[2, 3, 0, 1]);
        assert_eq!(r.mul(u, r.inv_unit(u)), 1);
    }

    #[test]
    fn agreement_without_carries() {
        let (rq, rt) = rings();
        // Digit sums below p never carry, so the two rings agree digitwise.
        let a = rq.from_digits(&[1, 2, 0, 1]);
        let b = rq.from_digits(&[1, 2, 1, 0]);
        assert_eq!(rq.add(a, b), rt.add(a, b));
    }
}
