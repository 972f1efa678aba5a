//! Fiber point counting for the sl2 quadric `a^2 + bc = Delta` over residue
//! rings, with per-coordinate coset balls and conjugacy-class filters.
//!
//! The counting strategy: enumerate `a` by recursive digit refinement (a node
//! terminates as soon as `ord(Delta - a^2)` is constant on it), and resolve
//! `(b, c)` in closed form per `ord b` stratum, since the number of solutions
//! `c` of `bc = R` inside a 0-centered ball depends on `b` only through its
//! valuation. Cost is O(p * m^2) instead of O(p^(3m)) brute force.

use crate::denefpas::Ball;
use crate::error::{Error, Result};
use crate::localfield::residue::ResidueRing;
use crate::localfield::{hilbert_tame, legendre, FieldSpec, LocalElement, SquareClass};
use crate::Q;

/// Conjugacy-class filter applied to counted points, in terms of the
/// (possibly shift-normalized) `b` coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassFilter {
    /// Count every fiber point.
    All,
    /// Nilpotent-cone label: the square class of `b` (of `-c` when b = 0).
    /// Points with both b and c indistinguishable from 0 at the working
    /// modulus carry no label and are never counted; they cancel in the
    /// shell differences where this filter is used.
    ConeLabel(SquareClass),
    /// Regular semisimple class: the Hilbert symbol `(Delta, b)` equals
    /// `sign`. `delta` is the square class of Delta.
    Sign { delta: SquareClass, sign: i8 },
    /// Exactly the stratum `ord b = beta` with `leg(ac b) = leg`. Used by the
    /// shell decomposition of nilpotent orbits, where the class label must be
    /// read off a coordinate of pinned valuation to be Hensel-stable.
    BExact { beta: usize, leg: i8 },
}

/// A coset ball digitized at modulus p^m: `center + pi^depth O` with the
/// center reduced mod p^depth (so digits at positions >= depth vanish).
#[derive(Debug, Clone, Copy)]
struct DigitBall {
    center: u64,
    depth: usize,
}

impl DigitBall {
    fn from_ball(ring: &ResidueRing, ball: &Ball, m: usize) -> Result<Self> {
        if ball.radius < 0 {
            return Err(Error::Domain(
                "quadric balls must sit inside O; normalize coordinate shifts first".into(),
            ));
        }
        let depth = ball.radius as usize;
        if depth > m {
            return Err(Error::Domain(format!(
                "ball depth {depth} exceeds the working modulus m = {m}"
            )));
        }
        let center_full = ring.reduce(&ball.center)?;
        let center = center_full % ring.pow_p(depth);
        Ok(DigitBall { center, depth })
    }

    /// Does the ball contain 0, i.e. is it a lattice ball `pi^depth O`?
    fn is_lattice(&self) -> bool {
        self.center == 0
    }
}

/// The quadric fiber `{(a,b,c) : a^2 + bc = Delta}` restricted to a product
/// of coset balls, with an optional class filter.
#[derive(Debug, Clone)]
pub struct QuadricFiber {
    pub spec: FieldSpec,
    /// Target of `a^2 + bc`. For sl2 with `D = det X = -a^2 - bc` pass
    /// `Delta = -D`.
    pub delta: LocalElement,
    pub ball_a: Ball,
    pub ball_b: Ball,
    pub ball_c: Ball,
    pub filter: ClassFilter,
}

impl QuadricFiber {
    /// Exact number of solutions mod p^m.
    pub fn count(&self, m: usize) -> Result<u128> {
        let ring = ResidueRing::new(&self.spec, m)?;
        let a = DigitBall::from_ball(&ring, &self.ball_a, m)?;
        let b = DigitBall::from_ball(&ring, &self.ball_b, m)?;
        let c = DigitBall::from_ball(&ring, &self.ball_c, m)?;
        if !c.is_lattice() {
            return Err(Error::Domain(
                "the c-coordinate ball must be centered at 0 (supports are normalized that way)"
                    .into(),
            ));
        }
        let delta = ring.reduce(&self.delta)?;
        // An elliptic sign filter needs the modulus to see past ord(Delta).
        if let ClassFilter::Sign { delta: dc, .. } = self.filter {
            if dc != SquareClass::One {
                let v = self.delta.ord().ok_or_else(|| {
                    Error::Domain("sign filter with Delta = 0 is not a class".into())
                })?;
                if (m as i64) < v + 1 {
                    return Err(Error::InsufficientPrecision(format!(
                        "modulus p^{m} cannot resolve classes of a fiber with ord(Delta) = {v}"
                    )));
                }
            }
        }
        let counter = Counter { ring, delta, ball_b: b, ball_c: c, filter: self.filter };
        let mut memo: Vec<Option<u128>> = vec![None; m + 2];
        let total = counter.recurse_a(a.center, a.depth, &mut memo)?;
        Ok(total)
    }

    /// Normalized fiber measure `count * p^(-2m)` at modulus m, with the
    /// stability flag comparing against m+1.
    pub fn measure(&self, m: usize) -> Result<(Q, bool)> {
        let v_m = self.value_at(m)?;
        let v_next = self.value_at(m + 1)?;
        Ok((v_m.clone(), v_m == v_next))
    }

    pub fn value_at(&self, m: usize) -> Result<Q> {
        let count = self.count(m)?;
        Ok(Q::from_integer(crate::Z::from(count)) * crate::q_pow(self.spec.p, -2 * m as i64))
    }
}

struct Counter {
    ring: ResidueRing,
    delta: u64,
    ball_b: DigitBall,
    ball_c: DigitBall,
    filter: ClassFilter,
}

impl Counter {
    /// Recursive digit refinement over the a-coordinate. `a0` is the node's
    /// representative (digits below `d` fixed), and every node lies inside
    /// the a-ball because the recursion starts at its center/depth.
    fn recurse_a(&self, a0: u64, d: usize, memo: &mut Vec<Option<u128>>) -> Result<u128> {
        let m = self.ring.m;
        let r0 = self.ring.sub(self.delta, self.ring.mul(a0, a0));
        let w0 = self.ring.ord(r0);
        let oa = self.ring.ord(a0).unwrap_or(m).min(d);
        let var_exp = (d + oa).min(2 * d).min(m);
        let node_reps = (self.ring.pow_p(m - d)) as u128;

        let uniform = match w0 {
            Some(w) if w < var_exp => true,
            _ => var_exp >= m,
        };
        if uniform || d == m {
            let per_a = self.bc_count_memo(w0, memo)?;
            let reps = if d == m { 1u128 } else { node_reps };
            return Ok(per_a * reps);
        }
        let mut total = 0u128;
        let step = self.ring.pow_p(d);
        for i in 0..self.ring.p {
            total += self.recurse_a(a0 + i * step, d + 1, memo)?;
        }
        Ok(total)
    }

    fn bc_count_memo(&self, w: Option<usize>, memo: &mut Vec<Option<u128>>) -> Result<u128> {
        let idx = w.map(|x| x.min(self.ring.m)).unwrap_or(self.ring.m + 1);
        if let Some(v) = memo[idx] {
            return Ok(v);
        }
        let v = self.bc_count(w)?;
        memo[idx] = Some(v);
        Ok(v)
    }

    /// Number of `(b, c)` in the two balls with `bc = R mod p^m`, where only
    /// `w = ord R` matters (`None` encodes `R = 0 mod p^m`).
    fn bc_count(&self, w: Option<usize>) -> Result<u128> {
        let m = self.ring.m;
        let gamma = self.ball_c.depth;
        let mut total = 0u128;
        // Strata of ord b = beta with b not 0 mod p^m.
        for beta in 0..m {
            let nb = self.count_b_stratum(beta);
            if nb == 0 {
                continue;
            }
            let c_count = match w {
                Some(w) => {
                    if beta > w {
                        0
                    } else if w - beta >= gamma && (w - beta) < m {
                        // c = R/b determined mod p^(m-beta): p^beta lifts.
                        self.ring.pow_p(beta) as u128
                    } else {
                        0
                    }
                }
                None => {
                    // bc = 0 mod p^m: ord c >= m - beta, and ord c >= gamma.
                    let need = gamma.max(m - beta);
                    self.ring.pow_p(m - need) as u128
                }
            };
            total += nb as u128 * c_count;
        }
        // The b = 0 (mod p^m) stratum: bc = 0 regardless of c.
        if self.ball_b.is_lattice() && w.is_none() {
            total += self.zero_b_stratum()?;
        }
        Ok(total)
    }

    /// Number of b in the b-ball with ord b = beta, matching the filter.
    fn count_b_stratum(&self, beta: usize) -> u64 {
        let m = self.ring.m;
        let p = self.ring.p;
        let ball = self.ball_b;
        // Which Legendre classes of ac(b) the filter admits at this parity.
        let admits = |leg: i8| -> bool {
            match self.filter {
                ClassFilter::All => true,
                ClassFilter::ConeLabel(sc) => {
                    sc.val_parity_odd() == (beta % 2 == 1)
                        && (if sc.unit_is_residue() { 1 } else { -1 }) == leg
                }
                ClassFilter::Sign { delta, sign } => {
                    self.sign_of_b_class(delta, beta, leg) == sign
                }
                ClassFilter::BExact { beta: want, leg: want_leg } => {
                    beta == want && leg == want_leg
                }
            }
        };
        if !ball.is_lattice() {
            // Proper coset: every element shares ord and ac with the center.
            let beta0 = self.ring.ord(ball.center).expect("proper coset has nonzero center");
            if beta != beta0 {
                return 0;
            }
            let leg = legendre(self.ring.ac(ball.center), p);
            if !admits(leg) {
                return 0;
            }
            return self.ring.pow_p(m - ball.depth);
        }
        // Lattice ball pi^s O: strata exist for beta >= s.
        if beta < ball.depth {
            return 0;
        }
        let units_per_leg = (p - 1) / 2;
        let scale = self.ring.pow_p(m - beta - 1);
        let mut count = 0u64;
        for leg in [1i8, -1] {
            if admits(leg) {
                count += scale * units_per_leg;
            }
        }
        count
    }

    fn sign_of_b_class(&self, delta: SquareClass, beta: usize, leg: i8) -> i8 {
        let p = self.ring.p;
        let u = (2..p).find(|&x| legendre(x, p) == -1).unwrap_or(1);
        let da = if delta.unit_is_residue() { 1 } else { u };
        let db = if leg == 1 { 1 } else { u };
        hilbert_tame(
            p,
            if delta.val_parity_odd() { 1 } else { 0 },
            da,
            beta as i64,
            db,
        )
    }

    /// Count of c over the c-ball for the `b = 0 mod p^m` stratum, labeled by
    /// `-c` under a cone filter. Unlabeled reps (c = 0 too) are skipped under
    /// a class filter and counted under `All`.
    fn zero_b_stratum(&self) -> Result<u128> {
        let m = self.ring.m;
        let p = self.ring.p;
        let gamma = self.ball_c.depth;
        match self.filter {
            ClassFilter::All => Ok(self.ring.pow_p(m - gamma) as u128),
            ClassFilter::ConeLabel(sc) => {
                // Label of a (b=0, c) point is the square class of -c. At each
                // valuation xi exactly half the units realize each Legendre
                // value of ac(-c), so the matching count per xi is
                // p^(m-xi-1) * (p-1)/2 whenever the parity agrees.
                let mut total = 0u128;
                for xi in gamma..m {
                    if sc.val_parity_odd() != (xi % 2 == 1) {
                        continue;
                    }
                    total += (self.ring.pow_p(m - xi - 1) * ((p - 1) / 2)) as u128;
                }
                Ok(total)
            }
            ClassFilter::Sign { delta, sign } => {
                if delta == SquareClass::One {
                    // Split fiber: one class, sign +1, everything counts.
                    Ok(if sign == 1 { self.ring.pow_p(m - gamma) as u128 } else { 0 })
                } else {
                    // Unreachable for elliptic Delta once m > ord(Delta):
                    // a^2 = Delta mod p^m has no solution, so R never
                    // vanishes at full modulus with b = 0.
                    Err(Error::InsufficientPrecision(
                        "elliptic fiber met a b=0 stratum; increase the modulus".into(),
                    ))
                }
            }
            // The stratum filter pins ord b, excluding b = 0 mod p^m.
            ClassFilter::BExact { .. } => Ok(0),
        }
    }
}

/// Brute-force oracle: enumerates the full grid. Only usable for small p^m;
/// the tests pit the fast path against this on every shape it exercises.
pub fn quadric_count_bruteforce(fiber: &QuadricFiber, m: usize) -> Result<u128> {
    let ring = ResidueRing::new(&fiber.spec, m)?;
    let a = DigitBall::from_ball(&ring, &fiber.ball_a, m)?;
    let b = DigitBall::from_ball(&ring, &fiber.ball_b, m)?;
    let c = DigitBall::from_ball(&ring, &fiber.ball_c, m)?;
    let delta = ring.reduce(&fiber.delta)?;
    let grid = |ball: DigitBall| -> Vec<u64> {
        let step = ring.pow_p(ball.depth);
        let n = ring.pow_p(m - ball.depth);
        (0..n).map(|i| ring.add(ball.center, ring.mul(step, i))).collect()
    };
    // In equal characteristic `step * i` enumerates offsets correctly because
    // multiplication by t^depth shifts digits; in mixed characteristic it is
    // plain integer arithmetic. Either way each coset rep appears once.
    let mut total = 0u128;
    for &av in &grid(a) {
        let r = ring.sub(delta, ring.mul(av, av));
        for &bv in &grid(b) {
            for &cv in &grid(c) {
                if ring.mul(bv, cv) != r {
                    continue;
                }
                if class_filter_matches(&ring, &fiber.filter, bv, cv)? {
                    total += 1;
                }
            }
        }
    }
    Ok(total)
}

fn class_filter_matches(ring: &ResidueRing, filter: &ClassFilter, b: u64, c: u64) -> Result<bool> {
    let p = ring.p;
    Ok(match filter {
        ClassFilter::All => true,
        ClassFilter::ConeLabel(sc) => {
            if b != 0 {
                let beta = ring.ord(b).unwrap();
                let leg = legendre(ring.ac(b), p);
                sc.val_parity_odd() == (beta % 2 == 1)
                    && (if sc.unit_is_residue() { 1 } else { -1 }) == leg
            } else if c != 0 {
                let xi = ring.ord(c).unwrap();
                let leg = legendre(ring.ac(ring.neg(c)), p);
                sc.val_parity_odd() == (xi % 2 == 1)
                    && (if sc.unit_is_residue() { 1 } else { -1 }) == leg
            } else {
                false
            }
        }
        ClassFilter::Sign { delta, sign } => {
            if b == 0 {
                *delta == SquareClass::One && *sign == 1
            } else {
                let beta = ring.ord(b).unwrap();
                let leg = legendre(ring.ac(b), p);
                let u = (2..p).find(|&x| legendre(x, p) == -1).unwrap_or(1);
                let da = if delta.unit_is_residue() { 1 } else { u };
                let db = if leg == 1 { 1 } else { u };
                let s = hilbert_tame(
                    p,
                    if delta.val_parity_odd() { 1 } else { 0 },
                    da,
                    beta as i64,
                    db,
                );
                s == *sign
            }
        }
        ClassFilter::BExact { beta, leg } => {
            b != 0 && ring.ord(b) == Some(*beta) && legendre(ring.ac(b), p) == *leg
        }
    })
}
