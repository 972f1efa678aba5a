//! Shalika-germ machinery for sl2: trace-zero matrices, nilpotent orbits,
//! Moy-Prasad lattices, Barbasch-Moy pairs, the Theta matrix of nilpotent
//! orbital integrals, and germ tables with exact rational entries.
//!
//! Conventions. An element is `X = [[a, b], [c, -a]]`. The characteristic
//! point is `D = det X = -a^2 - bc`; we write `Delta = -D = a^2 + bc` where
//! the quadric counting wants it. Nilpotence is `D = 0`. The five nilpotent
//! orbits for p odd are the zero orbit and `E(u) = [[0, u], [0, 0]]` for `u`
//! over the four square classes. Closure order sorts the four regular orbits
//! by square-class label (1, u, pi, u*pi) with the zero orbit last.

mod integrals;
pub mod oracle;

pub use integrals::*;

use crate::denefpas::Ball;
use crate::error::{Error, Result};
use crate::localfield::{class_representative, FieldSpec, LocalElement, SquareClass};
use crate::sampling::Sampler;
use rand::Rng;

/// A trace-zero 2x2 matrix over the field, `[[a, b], [c, -a]]`.
#[derive(Debug, Clone)]
pub struct Sl2Element {
    pub a: LocalElement,
    pub b: LocalElement,
    pub c: LocalElement,
}

impl Sl2Element {
    pub fn new(a: LocalElement, b: LocalElement, c: LocalElement) -> Self {
        Sl2Element { a, b, c }
    }

    pub fn zero(spec: FieldSpec) -> Self {
        let z = LocalElement::zero(spec);
        Sl2Element { a: z.clone(), b: z.clone(), c: z }
    }

    /// The regular nilpotent representative `E(u) = [[0, u], [0, 0]]`.
    pub fn upper_nilpotent(u: LocalElement) -> Self {
        let spec = *u.spec();
        Sl2Element { a: LocalElement::zero(spec), b: u, c: LocalElement::zero(spec) }
    }

    pub fn diagonal(a: LocalElement) -> Self {
        let spec = *a.spec();
        Sl2Element { a, b: LocalElement::zero(spec), c: LocalElement::zero(spec) }
    }

    pub fn spec(&self) -> &FieldSpec {
        self.a.spec()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    /// The image in the adjoint quotient: `D = det X = -a^2 - bc`.
    pub fn char_point(&self) -> Result<LocalElement> {
        // D = -(a^2 + bc), computed as 0 - a*a - b*c to stay exact on exact
        // input.
        let aa = self.a.mul(&self.a)?;
        let bc = self.b.mul(&self.c)?;
        LocalElement::zero(*self.spec()).sub(&aa)?.sub(&bc)
    }

    /// `Delta = a^2 + bc = -D`, the quadric target.
    pub fn delta(&self) -> Result<LocalElement> {
        self.a.mul(&self.a)?.add(&self.b.mul(&self.c)?)
    }

    /// Nilpotence test at working precision. A near-zero ambiguity (total
    /// cancellation of inexact digits) is an error, never a guess.
    pub fn is_nilpotent(&self) -> Result<bool> {
        match self.char_point() {
            Ok(d) => Ok(d.is_zero()),
            Err(Error::PrecisionLoss { .. }) => Err(Error::InsufficientPrecision(
                "char point indistinguishable from zero at this precision".into(),
            )),
            Err(e) => Err(e),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Sl2Element {
            a: self.a.add(&other.a)?,
            b: self.b.add(&other.b)?,
            c: self.c.add(&other.c)?,
        })
    }

    /// Lie bracket [X, Y] = XY - YX (trace zero again).
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let (d, e, f) = (&other.a, &other.b, &other.c);
        let two = LocalElement::from_integer(*self.spec(), 2);
        Ok(Sl2Element {
            a: b.mul(f)?.sub(&c.mul(e)?)?,
            b: two.mul(&a.mul(e)?.sub(&b.mul(d)?)?)?,
            c: two.mul(&c.mul(d)?.sub(&a.mul(f)?)?)?,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, lambda: &LocalElement) -> Result<Self> {
        Ok(Sl2Element {
            a: self.a.mul(lambda)?,
            b: self.b.mul(lambda)?,
            c: self.c.mul(lambda)?,
        })
    }

    /// Conjugation `g X g^{-1}` by `g = [[g11, g12], [g21, g22]]` of
    /// determinant 1.
    pub fn conjugate(&self, g: &Mat2) -> Result<Self> {
        let gx = g.mul_sl2(self)?;
        let ginv = g.inverse_det_one();
        let m = gx.mul_mat(&ginv)?;
        // Trace-zero by construction; read off the sl2 coordinates.
        Ok(Sl2Element { a: m.e11, b: m.e12, c: m.e21 })
    }
}

/// A 2x2 matrix of field elements; used for conjugators.
#[derive(Debug, Clone)]
pub struct Mat2 {
    pub e11: LocalElement,
    pub e12: LocalElement,
    pub e21: LocalElement,
    pub e22: LocalElement,
}

impl Mat2 {
    pub fn from_ints(spec: FieldSpec, m: [i64; 4]) -> Self {
        Mat2 {
            e11: LocalElement::from_integer(spec, m[0]),
            e12: LocalElement::from_integer(spec, m[1]),
            e21: LocalElement::from_integer(spec, m[2]),
            e22: LocalElement::from_integer(spec, m[3]),
        }
    }

    pub fn identity(spec: FieldSpec) -> Self {
        Mat2::from_ints(spec, [1, 0, 0, 1])
    }

    /// Upper elementary [[1, t], [0, 1]].
    pub fn e12(t: LocalElement) -> Self {
        let spec = *t.spec();
        Mat2 {
            e11: LocalElement::one(spec),
            e12: t,
            e21: LocalElement::zero(spec),
            e22: LocalElement::one(spec),
        }
    }

    /// Lower elementary [[1, 0], [t, 1]].
    pub fn e21(t: LocalElement) -> Self {
        let spec = *t.spec();
        Mat2 {
            e11: LocalElement::one(spec),
            e12: LocalElement::zero(spec),
            e21: t,
            e22: LocalElement::one(spec),
        }
    }

    /// diag(lambda, lambda^{-1}).
    pub fn torus(lambda: &LocalElement) -> Result<Self> {
        let spec = *lambda.spec();
        Ok(Mat2 {
            e11: lambda.clone(),
            e12: LocalElement::zero(spec),
            e21: LocalElement::zero(spec),
            e22: lambda.inv()?,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Mat2 {
            e11: self.e11.mul(&other.e11)?.add(&self.e12.mul(&other.e21)?)?,
            e12: self.e11.mul(&other.e12)?.add(&self.e12.mul(&other.e22)?)?,
            e21: self.e21.mul(&other.e11)?.add(&self.e22.mul(&other.e21)?)?,
            e22: self.e21.mul(&other.e12)?.add(&self.e22.mul(&other.e22)?)?,
        })
    }

    fn mul_sl2(&self, x: &Sl2Element) -> Result<Mat2> {
        let neg_a = LocalElement::zero(*x.spec()).sub(&x.a)?;
        let xm = Mat2 { e11: x.a.clone(), e12: x.b.clone(), e21: x.c.clone(), e22: neg_a };
        self.mul(&xm)
    }

    fn mul_mat(&self, other: &Mat2) -> Result<Mat2> {
        self.mul(other)
    }

    /// Inverse of a determinant-one matrix: the adjugate.
    pub fn inverse_det_one(&self) -> Mat2 {
        let spec = *self.e11.spec();
        let neg = |x: &LocalElement| LocalElement::zero(spec).sub(x).unwrap_or_else(|_| LocalElement::zero(spec));
        Mat2 { e11: self.e22.clone(), e12: neg(&self.e12), e21: neg(&self.e21), e22: self.e11.clone() }
    }

    /// A seeded random element of SL2(O) as a product of elementary and torus
    /// matrices, with `digits` digits per parameter.
    pub fn random_integral(spec: FieldSpec, sampler: &mut Sampler, digits: usize) -> Result<Self> {
        let x = sampler.integral(spec, digits);
        let y = sampler.integral(spec, digits);
        let z = sampler.integral(spec, digits);
        let u = sampler.unit(spec, digits);
        let g = Mat2::e12(x).mul(&Mat2::e21(y))?.mul(&Mat2::e12(z))?.mul(&Mat2::torus(&u)?)?;
        Ok(g)
    }
}

/// Conjugacy-class data of a regular element (regular nilpotent or regular
/// semisimple), the invariant that separates rational classes inside a
/// stable class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    /// Regular nilpotent orbit labeled by the square class of `b` (of `-c`
    /// when `b = 0`; on the cone the two agree where both are defined).
    Nilpotent(SquareClass),
    /// Regular semisimple with `Delta = -D` a square: the stable class is a
    /// single rational class.
    Split,
    /// Regular semisimple with `Delta` a nonsquare: two rational classes,
    /// separated by the Hilbert symbol `(Delta, b)`.
    Elliptic { disc: SquareClass, sign: i8 },
}

/// The conjugation invariant of a regular element.
pub fn class_invariant(x: &Sl2Element) -> Result<OrbitClass> {
    if x.is_zero() {
        return Err(Error::Domain("the zero element is not regular".into()));
    }
    let delta = x.delta()?;
    if delta.is_zero() {
        let label = if !x.b.is_zero() {
            x.b.square_class()?
        } else {
            // a^2 = -bc = 0 forces a = 0 here, so c != 0.
            x.c.neg()?.square_class()?
        };
        return Ok(OrbitClass::Nilpotent(label));
    }
    let disc = delta.square_class()?;
    if disc == SquareClass::One {
        return Ok(OrbitClass::Split);
    }
    if x.b.is_zero() {
        // b = 0 forces Delta = a^2, a square: unreachable in the elliptic case.
        return Err(Error::Domain("elliptic element with b = 0 cannot occur".into()));
    }
    let sign = delta.hilbert_symbol(&x.b)?;
    Ok(OrbitClass::Elliptic { disc, sign })
}

/// The three standard parahoric points of SL2: the two vertices and the
/// Iwahori (alcove) point. They correspond to the three elements of the
/// parahoric indexing set of the split A1 diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ParahoricPoint {
    V0,
    V1,
    Iwahori,
}

impl ParahoricPoint {
    pub const ALL: [ParahoricPoint; 3] = [ParahoricPoint::V0, ParahoricPoint::V1, ParahoricPoint::Iwahori];

    pub fn label(&self) -> &'static str {
        match self {
            ParahoricPoint::V0 => "v0",
            ParahoricPoint::V1 => "v1",
            ParahoricPoint::Iwahori => "iwahori",
        }
    }
}

/// A Moy-Prasad lattice `g_{f,r}`, stored as per-coordinate valuation floors
/// for (a, b, c). Depths are half-integers at the Iwahori point and integers
/// at the vertices; `r2` stores 2r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoyPrasadLattice {
    pub point: ParahoricPoint,
    pub r2: i64,
    /// Valuation floors (a, b, c).
    pub offsets: (i64, i64, i64),
}

impl MoyPrasadLattice {
    pub fn new(point: ParahoricPoint, r2: i64) -> Result<Self> {
        let offsets = match point {
            ParahoricPoint::V0 => {
                if r2 % 2 != 0 {
                    return Err(Error::Domain("vertex filtrations jump at integers".into()));
                }
                let r = r2 / 2;
                (r, r, r)
            }
            ParahoricPoint::V1 => {
                if r2 % 2 != 0 {
                    return Err(Error::Domain("vertex filtrations jump at integers".into()));
                }
                let r = r2 / 2;
                (r, r - 1, r + 1)
            }
            ParahoricPoint::Iwahori => {
                let k = r2.div_euclid(2);
                if r2.rem_euclid(2) == 0 {
                    (k, k, k + 1)
                } else {
                    (k + 1, k, k + 1)
                }
            }
        };
        Ok(MoyPrasadLattice { point, r2, offsets })
    }

    pub fn depth_zero(point: ParahoricPoint) -> Self {
        MoyPrasadLattice::new(point, 0).unwrap()
    }

    /// The next filtration step `g_{f,r+}`.
    pub fn plus(&self) -> Self {
        let step = match self.point {
            ParahoricPoint::Iwahori => 1,
            _ => 2,
        };
        MoyPrasadLattice::new(self.point, self.r2 + step).unwrap()
    }

    pub fn contains(&self, x: &Sl2Element) -> bool {
        let ok = |e: &LocalElement, floor: i64| e.ord().map_or(true, |v| v >= floor);
        ok(&x.a, self.offsets.0) && ok(&x.b, self.offsets.1) && ok(&x.c, self.offsets.2)
    }

    /// Explicit O-module generators: pi^i H, pi^j E, pi^k F.
    pub fn generators(&self, spec: FieldSpec) -> [Sl2Element; 3] {
        let one = LocalElement::one(spec);
        [
            Sl2Element::diagonal(one.clone().shift(self.offsets.0)),
            Sl2Element::upper_nilpotent(one.clone().shift(self.offsets.1)),
            Sl2Element {
                a: LocalElement::zero(spec),
                b: LocalElement::zero(spec),
                c: one.shift(self.offsets.2),
            },
        ]
    }

    /// log_p of the index [g_{f,r} : g_{f,r'}] for r' >= r.
    pub fn index_exponent(&self, finer: &MoyPrasadLattice) -> i64 {
        (finer.offsets.0 - self.offsets.0)
            + (finer.offsets.1 - self.offsets.1)
            + (finer.offsets.2 - self.offsets.2)
    }
}

/// A Barbasch-Moy pair: a nilpotent representative and a parahoric point,
/// whose coset `N + g_{f,0+}` meets only the orbit closure of `N` from above.
#[derive(Debug, Clone)]
pub struct BarbaschMoyPair {
    pub nilpotent: Sl2Element,
    pub point: ParahoricPoint,
    /// Square-class label of the regular orbit; `None` for the zero orbit.
    pub label: Option<SquareClass>,
}

/// Support of the pair's test function `1_{N + g_{f,0+}}` in normalized
/// coordinates: after the substitution `b = pi^(-shift) b'`, `c = pi^(shift) c'`
/// (unimodular, determinant-preserving), all three balls sit inside O.
#[derive(Debug, Clone)]
pub struct NormalizedSupport {
    pub balls: [Ball; 3],
    /// `b = pi^(-b_shift) * b_normalized`.
    pub b_shift: i64,
}

impl BarbaschMoyPair {
    pub fn zero_orbit(spec: FieldSpec, point: ParahoricPoint) -> Self {
        BarbaschMoyPair { nilpotent: Sl2Element::zero(spec), point, label: None }
    }

    /// The canonical pair for a regular orbit: `E(u)` at the vertex v0 for
    /// unit classes, `pi^{-1} E(u)` at v1 for uniformizer classes.
    pub fn regular(spec: FieldSpec, label: SquareClass) -> Self {
        let u = spec.nonresidue();
        let (digit, shift, point) = match label {
            SquareClass::One => (1, 0, ParahoricPoint::V0),
            SquareClass::U => (u, 0, ParahoricPoint::V0),
            SquareClass::Pi => (1, -1, ParahoricPoint::V1),
            SquareClass::UPi => (u, -1, ParahoricPoint::V1),
        };
        let b = LocalElement::from_digits(spec, shift, vec![digit], true).unwrap();
        BarbaschMoyPair { nilpotent: Sl2Element::upper_nilpotent(b), point, label: Some(label) }
    }

    pub fn lattice_plus(&self) -> MoyPrasadLattice {
        MoyPrasadLattice::depth_zero(self.point).plus()
    }

    /// Whether the support coset contains 0 (true exactly for zero-orbit
    /// pairs, whose series then needs the shell protocol).
    pub fn support_contains_zero(&self) -> bool {
        let lat = self.lattice_plus();
        let x = &self.nilpotent;
        let inside = |e: &LocalElement, floor: i64| e.ord().map_or(true, |v| v >= floor);
        inside(&x.a, lat.offsets.0) && inside(&x.b, lat.offsets.1) && inside(&x.c, lat.offsets.2)
    }

    /// Support balls in normalized coordinates.
    pub fn normalized_support(&self) -> NormalizedSupport {
        let lat = self.lattice_plus();
        let (oa, ob, oc) = lat.offsets;
        // Choose the smallest shift making both the b and c data integral.
        let need_b = (-ob).max(self.nilpotent.b.ord().map_or(0, |v| -v)).max(0);
        let shift = need_b;
        let b_center = self.nilpotent.b.clone().shift(shift);
        let c_center = self.nilpotent.c.clone().shift(-shift);
        debug_assert!(oa >= 0 && ob + shift >= 0 && oc - shift >= 0);
        NormalizedSupport {
            balls: [
                Ball::new(self.nilpotent.a.clone(), oa),
                Ball::new(b_center, ob + shift),
                Ball::new(c_center, oc - shift),
            ],
            b_shift: shift,
        }
    }

    /// Membership of an element in the support coset `N + g_{f,0+}`.
    pub fn support_contains(&self, x: &Sl2Element) -> Result<bool> {
        let lat = self.lattice_plus();
        let diff = Sl2Element {
            a: x.a.sub(&self.nilpotent.a)?,
            b: x.b.sub(&self.nilpotent.b)?,
            c: x.c.sub(&self.nilpotent.c)?,
        };
        Ok(lat.contains(&diff))
    }
}

/// The five nilpotent orbit representatives: zero, then `E(u)` over the four
/// square classes (with the uniformizer classes realized at the other vertex
/// as `pi^{-1} E(u)` when used as Barbasch-Moy pairs).
pub fn nilpotent_orbit_reps(spec: FieldSpec) -> Vec<(Option<SquareClass>, Sl2Element)> {
    let mut out = Vec::new();
    for sc in SquareClass::ALL {
        out.push((Some(sc), Sl2Element::upper_nilpotent(class_representative(spec, sc))));
    }
    out.push((None, Sl2Element::zero(spec)));
    out
}

/// The canonical Barbasch-Moy k-tuple in closure order (labels 1, u, pi,
/// u*pi, then the zero orbit). Returns an empty tuple when k exceeds the
/// number of nilpotent classes.
pub fn barbasch_moy_tuple(spec: FieldSpec, k: usize) -> Vec<BarbaschMoyPair> {
    barbasch_moy_tuple_impl(spec, k)
}

/// The canonical tuple with the bounded dominance check run on every pair.
pub fn barbasch_moy_tuple_verified(
    spec: FieldSpec,
    k: usize,
    search_depth: usize,
    seed: u64,
) -> Result<Vec<BarbaschMoyPair>> {
    let tuple = barbasch_moy_tuple_impl(spec, k);
    for pair in &tuple {
        verify_dominance(pair, spec, search_depth, 40, seed)?;
    }
    Ok(tuple)
}

fn barbasch_moy_tuple_impl(spec: FieldSpec, k: usize) -> Vec<BarbaschMoyPair> {
    if k > 5 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for sc in SquareClass::ALL {
        out.push(BarbaschMoyPair::regular(spec, sc));
    }
    out.push(BarbaschMoyPair::zero_orbit(spec, ParahoricPoint::V0));
    out.truncate(k);
    out
}

/// Outcome of the bounded dominance verification for one pair.
#[derive(Debug, Clone)]
pub struct DominanceReport {
    pub verified_to_depth: usize,
    pub samples: usize,
    /// Vacuous for the zero orbit (0 lies in every orbit closure).
    pub vacuous: bool,
}

/// Bounded search verifying the Barbasch-Moy dominance property of a pair:
/// every sampled nilpotent `N'` in `N + g_{f,0+}` has `N` in the closure of
/// its orbit. For regular `N` this means `N' ~ N`, exhibited by an explicit
/// conjugator (unipotent row reduction followed by a torus scaling).
pub fn verify_dominance(
    pair: &BarbaschMoyPair,
    spec: FieldSpec,
    search_depth: usize,
    samples: usize,
    seed: u64,
) -> Result<DominanceReport> {
    let Some(label) = pair.label else {
        return Ok(DominanceReport { verified_to_depth: search_depth, samples: 0, vacuous: true });
    };
    let mut sampler = Sampler::new(seed);
    let lat = pair.lattice_plus();
    let (oa, ob, oc) = lat.offsets;
    let mut checked = 0usize;
    while checked < samples {
        // Exact nilpotents in the coset via N' = (bt, b, -bt^2): every
        // nilpotent with b != 0 has this form with t = a/b.
        let db = sampler.integral(spec, search_depth).shift(ob);
        let b = pair.nilpotent.b.add(&db)?;
        if b.is_zero() {
            continue;
        }
        let vb = b.ord().unwrap();
        let t0 = (oa - vb).max((oc - vb + 1).div_euclid(2)).max(1);
        let t = sampler.integral(spec, search_depth).shift(t0);
        let a = b.mul(&t)?;
        let c = b.mul(&t)?.mul(&t)?.neg()?;
        let n_prime = Sl2Element::new(a, b, c);
        if !pair.support_contains(&n_prime)? {
            return Err(Error::Domain(format!(
                "sampled nilpotent escaped the support coset of ({}, {})",
                pair.nilpotent.b,
                pair.point.label()
            )));
        }
        debug_assert!(n_prime.is_nilpotent()?);
        // Class check plus constructive conjugation to the standard form.
        let got = class_invariant(&n_prime)?;
        if got != OrbitClass::Nilpotent(label) {
            return Err(Error::Domain(format!(
                "dominance fails: {:?} found in the coset of the {:?} pair",
                got, label
            )));
        }
        conjugate_to_standard(&n_prime, label)?;
        checked += 1;
    }
    Ok(DominanceReport { verified_to_depth: search_depth, samples: checked, vacuous: false })
}

/// Conjugates a regular nilpotent with `b != 0` to the standard `E(rep)` of
/// its square class and returns the conjugator: the unipotent
/// `[[1, 0], [t, 1]]` with `t = a/b` kills the diagonal and lower entries,
/// then `diag(lambda^{-1}, lambda)` with `lambda = sqrt(b / rep)` rescales the
/// corner. Conjugator entries are truncated to exact elements, so the result
/// verifiably agrees with `E(rep)` to half the working precision.
pub fn conjugate_to_standard(x: &Sl2Element, label: SquareClass) -> Result<Mat2> {
    let spec = *x.spec();
    if x.b.is_zero() {
        return Err(Error::Domain("standard-form conjugation needs b != 0".into()));
    }
    let digits = (spec.precision / 2).max(3);
    let t = if x.a.is_zero() {
        LocalElement::zero(spec)
    } else {
        x.a.div(&x.b)?.truncate_exact(digits)
    };
    // Step 1 is all-exact arithmetic (exact conjugator on exact entries), so
    // the a and c entries cancel exactly when t hits a/b on the nose.
    let g1 = Mat2::e21(t);
    let step1 = x.conjugate(&g1)?;
    let rep = class_representative(spec, label);
    let ratio = x.b.div(&rep)?;
    let lambda = ratio.sqrt()?.truncate_exact(digits);
    let g2 = Mat2::torus(&lambda.inv()?)?;
    let standard = step1.conjugate(&g2)?;
    // Certification threshold: the truncated conjugator entries leave
    // perturbations of order ~digits, so agreement is checked to digits/2.
    let threshold = digits as i64 / 2;
    let small = |e: &LocalElement| match e.ord() {
        None => true,
        Some(v) => v >= threshold,
    };
    let close = |x: &LocalElement, y: &LocalElement| -> Result<bool> {
        match x.sub(y) {
            Ok(d) => Ok(small(&d)),
            Err(Error::PrecisionLoss { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };
    if !close(&standard.b, &rep)? || !small(&standard.a) || !small(&standard.c) {
        return Err(Error::Domain("conjugation to standard form failed to verify".into()));
    }
    g2.mul(&g1)
}

/// Ad-invariance spot check: `[g_{f,0}, g_{f,0+}] <= g_{f,0+}` on sampled
/// pairs of lattice elements.
pub fn bracket_invariance_check(
    point: ParahoricPoint,
    spec: FieldSpec,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let lat0 = MoyPrasadLattice::depth_zero(point);
    let latp = lat0.plus();
    let mut sampler = Sampler::new(seed);
    let digits = 4;
    for _ in 0..samples {
        let draw = |s: &mut Sampler, lat: &MoyPrasadLattice| -> Result<Sl2Element> {
            Ok(Sl2Element {
                a: s.integral(spec, digits).shift(lat.offsets.0),
                b: s.integral(spec, digits).shift(lat.offsets.1),
                c: s.integral(spec, digits).shift(lat.offsets.2),
            })
        };
        let x = draw(&mut sampler, &lat0)?;
        let y = draw(&mut sampler, &latp)?;
        if !latp.contains(&x.bracket(&y)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A sampled regular semisimple element with its class data.
#[derive(Debug, Clone)]
pub struct RegularSample {
    pub x: Sl2Element,
    /// D = det X.
    pub char_point: LocalElement,
    pub class: OrbitClass,
}

/// Seeded sampling of regular semisimple elements with `ord D = v` and
/// `D` in the square class `d_class`; for elliptic stable classes the
/// rational class is pinned by `sign`. Representatives are conjugated by
/// random elements of SL2(O) so the samples vary inside the class.
pub fn sample_regular(
    spec: FieldSpec,
    seed: u64,
    d_class: SquareClass,
    v: i64,
    sign: i8,
    count: usize,
) -> Result<Vec<RegularSample>> {
    if d_class.val_parity_odd() != (v.rem_euclid(2) == 1) {
        return Err(Error::Domain(format!(
            "valuation {v} has the wrong parity for the square class {}",
            d_class.label()
        )));
    }
    let mut sampler = Sampler::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        // D = pi^v * unit with the class-prescribed Legendre value.
        let want_leg = if d_class.unit_is_residue() { 1 } else { -1 };
        let ac = (1..spec.p)
            .filter(|&x| crate::localfield::legendre(x, spec.p) == want_leg)
            .nth(sampler.rng().gen_range(0..((spec.p as usize - 1) / 2)))
            .expect("half the units in each class");
        let unit = sampler.unit_with_ac(spec, ac, spec.precision - 2);
        let d = unit.shift(v);
        let delta = d.neg()?;
        if delta.is_zero() {
            continue;
        }
        let disc = delta.square_class()?;
        // Choose b realizing the wanted rational class.
        let b = if disc == SquareClass::One {
            LocalElement::one(spec)
        } else {
            SquareClass::ALL
                .iter()
                .map(|&sc| class_representative(spec, sc))
                .find(|cand| delta.hilbert_symbol(cand).unwrap() == sign)
                .ok_or_else(|| Error::Domain("no class representative realizes the sign".into()))?
        };
        let c = delta.div(&b)?;
        let x0 = Sl2Element {
            a: LocalElement::zero(spec),
            b: b.clone(),
            c,
        };
        let g = Mat2::random_integral(spec, &mut sampler, 3)?;
        let x = x0.conjugate(&g)?;
        let class = class_invariant(&x)?;
        out.push(RegularSample { x, char_point: d, class });
    }
    Ok(out)
}


#[cfg(test)]
mod tests;
