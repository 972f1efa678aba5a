//! Orbital integrals against Barbasch-Moy test functions, the Theta matrix,
//! and Shalika germ tables, all as exact rationals.
//!
//! Measure pin: every integral is a Leray fiber count `N_m p^{-2m}` over the
//! quadric `a^2 + bc = Delta` restricted to the support coset, with the
//! nilpotent-orbit measure taken as the `Delta -> 0` limit of the same
//! counting device (exact shell series with certified geometric tails).

use super::{class_invariant, BarbaschMoyPair, OrbitClass, Sl2Element};
use crate::denefpas::{ast::VgCmp, Ball, DefinableSet, Formula, VfTerm, VgTerm};
use crate::error::{Error, Result};
use crate::integrate::{ClassFilter, IntegralResult, QuadricFiber};
use crate::linalg::{self, Matrix};
use crate::localfield::{hilbert_tame, FieldSpec, LocalElement, SquareClass};
use crate::{q_int, Q};
use num_traits::Zero;

/// Hilbert symbol `(Delta, pi)` from the square class of Delta.
fn disc_pi_symbol(spec: FieldSpec, disc: SquareClass) -> i8 {
    let u = spec.nonresidue();
    let ua = if disc.unit_is_residue() { 1 } else { u };
    hilbert_tame(spec.p, if disc.val_parity_odd() { 1 } else { 0 }, ua, 1, 1)
}

/// Translates a class filter on the original `b` coordinate into the filter
/// on the shift-normalized coordinate `b' = pi^shift b`.
fn shifted_filter(filter: ClassFilter, shift: i64, spec: FieldSpec) -> ClassFilter {
    if shift == 0 {
        return filter;
    }
    match filter {
        ClassFilter::All => ClassFilter::All,
        ClassFilter::ConeLabel(sc) => {
            let twist = if shift.rem_euclid(2) == 1 { SquareClass::Pi } else { SquareClass::One };
            ClassFilter::ConeLabel(sc.mul(twist))
        }
        ClassFilter::Sign { delta, sign } => {
            let factor = if shift.rem_euclid(2) == 1 { disc_pi_symbol(spec, delta) } else { 1 };
            ClassFilter::Sign { delta, sign: sign * factor }
        }
        // Stratum filters are already expressed in normalized coordinates.
        ClassFilter::BExact { .. } => filter,
    }
}

/// The filter selecting the rational class of a regular element.
fn filter_for_class(class: &OrbitClass) -> ClassFilter {
    match class {
        OrbitClass::Nilpotent(sc) => ClassFilter::ConeLabel(*sc),
        OrbitClass::Split => ClassFilter::Sign { delta: SquareClass::One, sign: 1 },
        OrbitClass::Elliptic { disc, sign } => ClassFilter::Sign { delta: *disc, sign: *sign },
    }
}

fn fiber_for_pair(
    spec: FieldSpec,
    pair: &BarbaschMoyPair,
    delta: LocalElement,
    class_filter: ClassFilter,
) -> QuadricFiber {
    let support = pair.normalized_support();
    let filter = shifted_filter(class_filter, support.b_shift, spec);
    let [a, b, c] = support.balls;
    QuadricFiber { spec, delta, ball_a: a, ball_b: b, ball_c: c, filter }
}

/// Orbital integral `O(X, 1_pair)` of a regular semisimple element: the Leray
/// measure of the rational class of X intersected with the support coset,
/// counted at modulus `ord(D) + depth`.
pub fn orbital_integral(
    x: &Sl2Element,
    pair: &BarbaschMoyPair,
    depth: usize,
    spec: FieldSpec,
) -> Result<IntegralResult> {
    let d = x.char_point()?;
    let v = d
        .ord()
        .ok_or_else(|| Error::Domain("orbital_integral needs a regular semisimple element".into()))?;
    let class = class_invariant(x)?;
    if matches!(class, OrbitClass::Nilpotent(_)) {
        return Err(Error::Domain("use nilpotent_orbital_integral for nilpotent elements".into()));
    }
    stable_point_integral(&d, Some(class), pair, depth, spec).map(|mut r| {
        r.depth = v as usize + depth;
        r
    })
}

/// Integral over the full stable class of a characteristic point (all
/// rational classes), or over one class when `class` is given.
pub fn stable_point_integral(
    d: &LocalElement,
    class: Option<OrbitClass>,
    pair: &BarbaschMoyPair,
    depth: usize,
    spec: FieldSpec,
) -> Result<IntegralResult> {
    let v = d.ord().ok_or_else(|| Error::Domain("characteristic point must be nonzero".into()))?;
    if v < 0 {
        return Err(Error::Domain("characteristic points of negative valuation are out of range".into()));
    }
    if v as usize + 2 > spec.precision {
        return Err(Error::InsufficientPrecision(format!(
            "ord(D) = {v} is indistinguishable from nilpotent at precision {}",
            spec.precision
        )));
    }
    let filter = match &class {
        Some(c) => filter_for_class(c),
        None => ClassFilter::All,
    };
    let delta = d.neg()?;
    let fiber = fiber_for_pair(spec, pair, delta, filter);
    let max_radius = fiber
        .ball_a
        .radius
        .max(fiber.ball_b.radius)
        .max(fiber.ball_c.radius)
        .max(0) as usize;
    let m = (v as usize + depth).max(max_radius + 1).max(v as usize + 2);
    let (value, stable) = fiber.measure(m)?;
    Ok(IntegralResult { value, depth: m, stable, field: spec })
}

/// Nilpotent orbital integral `O(N, 1_pair)`.
///
/// The zero orbit is a point mass: the value is `1_pair(0)`. A regular orbit
/// is the cone `{det = 0}` minus the origin in its square class; when the
/// support misses the origin a direct stabilized count suffices, and when the
/// support contains the origin (the zero-orbit pairs) the integral is an
/// exact shell series whose geometric self-similarity is certified shell by
/// shell before summation.
pub fn nilpotent_orbital_integral(
    orbit: Option<SquareClass>,
    pair: &BarbaschMoyPair,
    depth: usize,
    spec: FieldSpec,
) -> Result<IntegralResult> {
    let Some(label) = orbit else {
        // Zero orbit: point evaluation at 0.
        let value = if pair.support_contains_zero() { q_int(1) } else { q_int(0) };
        return Ok(IntegralResult { value, depth, stable: true, field: spec });
    };
    let support = pair.normalized_support();
    let [ball_a, ball_b, ball_c] = support.balls;
    let zero = LocalElement::zero(spec);
    let max_radius = ball_a.radius.max(ball_b.radius).max(ball_c.radius).max(0) as usize;

    if !pair.support_contains_zero() {
        let filter = shifted_filter(ClassFilter::ConeLabel(label), support.b_shift, spec);
        let fiber = QuadricFiber { spec, delta: zero, ball_a, ball_b, ball_c, filter };
        let m = (depth + 2).max(max_radius + 1);
        let (value, stable) = fiber.measure(m)?;
        return Ok(IntegralResult { value, depth: m, stable, field: spec });
    }

    // Shell series. The support contains 0, so decompose the cone into
    // min-order shells. A shell-j point has its minimum at b or at c (never
    // at a alone, since a^2 = -bc), and the class label is read off the
    // pinned coordinate: sc(b) when ord b = j, sc(-c) when ord c = j with b
    // strictly deeper. Each branch is a Hensel-stable stratum count; beyond
    // the ball radii the shells are exactly self-similar with ratio p^-2
    // every two steps, which is certified on computed shells before the
    // geometric tail is summed.
    if support.b_shift != 0 {
        return Err(Error::Domain("zero-orbit supports are not shift-normalized".into()));
    }
    for ball in [&ball_a, &ball_b, &ball_c] {
        if !ball.center.is_zero() {
            return Err(Error::Domain("zero-orbit support balls must be 0-centered".into()));
        }
    }
    let (ra, rb, rc) = (ball_a.radius, ball_b.radius, ball_c.radius);
    let eta_leg: i8 = if label.unit_is_residue() { 1 } else { -1 };
    let leg_minus_one = crate::localfield::legendre(spec.p - 1, spec.p);
    let shells_needed = max_radius + 4;
    let mut shell_values = Vec::new();
    let mut all_stable = true;
    for j in 0..=shells_needed {
        if label.val_parity_odd() != (j % 2 == 1) {
            shell_values.push(Q::zero());
            continue;
        }
        let m = (2 * (j + 1) + depth).max(j as usize + 2).max(max_radius + 2);
        let jj = j as i64;
        // Branch B: ord b = j exactly, a and c at least as deep.
        let b_branch = QuadricFiber {
            spec,
            delta: zero.clone(),
            ball_a: Ball::at_origin(spec, ra.max(jj)),
            ball_b: ball_b.clone(),
            ball_c: Ball::at_origin(spec, rc.max(jj)),
            filter: ClassFilter::BExact { beta: j, leg: eta_leg },
        };
        // Branch C: ord c = j exactly, b strictly deeper; the form is
        // symmetric in b and c, so swap the roles and label through
        // leg(ac(-c)) = leg(-1) * leg(ac c).
        let c_branch = QuadricFiber {
            spec,
            delta: zero.clone(),
            ball_a: Ball::at_origin(spec, ra.max(jj)),
            ball_b: ball_c.clone(),
            ball_c: Ball::at_origin(spec, rb.max(jj + 1)),
            filter: ClassFilter::BExact { beta: j, leg: eta_leg * leg_minus_one },
        };
        let (vb, sb) = b_branch.measure(m)?;
        let (vc, sc) = c_branch.measure(m)?;
        all_stable &= sb && sc;
        shell_values.push(vb + vc);
    }
    // Certify s_{j+2} = s_j / p^2 on the last computed shells.
    let psq = crate::q_pow(spec.p, 2);
    for j in (shells_needed - 3)..=(shells_needed - 2) {
        let lhs = &shell_values[j];
        let rhs = &shell_values[j + 2] * &psq;
        if *lhs != rhs {
            return Err(Error::Unstable(format!(
                "shell series not self-similar at shell {j}: {lhs} vs {rhs}"
            )));
        }
    }
    // total = head + geometric tail over the certified residue pair.
    let tail_start = shells_needed - 1;
    let head: Q = shell_values[..tail_start].iter().fold(Q::zero(), |s, x| s + x);
    let tail = (&shell_values[tail_start] + &shell_values[tail_start + 1]) * &psq
        / (&psq - q_int(1));
    Ok(IntegralResult { value: head + tail, depth, stable: all_stable, field: spec })
}

/// The Theta matrix of nilpotent orbital integrals together with its exact
/// determinant and adjugate: entry `(i, j) = O(N_i, 1_{pair_j})` in the
/// closure order of the tuple (regular orbits by square class, zero last).
#[derive(Debug, Clone)]
pub struct ThetaMatrix {
    pub entries: Matrix,
    pub labels: Vec<Option<SquareClass>>,
    pub det: Q,
    pub adjugate: Matrix,
    pub stable: bool,
    pub depth: usize,
}

impl ThetaMatrix {
    /// Upper triangularity with nonzero diagonal, in the stored order.
    pub fn is_upper_triangular(&self) -> bool {
        let k = self.entries.len();
        for i in 0..k {
            if self.entries[i][i].is_zero() {
                return false;
            }
            for j in 0..i {
                if !self.entries[i][j].is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

pub fn theta_matrix(
    tuple: &[BarbaschMoyPair],
    depth: usize,
    spec: FieldSpec,
) -> Result<ThetaMatrix> {
    let k = tuple.len();
    let mut entries = vec![vec![Q::zero(); k]; k];
    let mut stable = true;
    let cells: Vec<(usize, usize)> =
        (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    use rayon::prelude::*;
    let computed: Vec<(usize, usize, IntegralResult)> = cells
        .into_par_iter()
        .map(|(i, j)| -> Result<(usize, usize, IntegralResult)> {
            let r = nilpotent_orbital_integral(tuple[i].label, &tuple[j], depth, spec)?;
            Ok((i, j, r))
        })
        .collect::<Result<_>>()?;
    for (i, j, r) in computed {
        stable &= r.stable;
        entries[i][j] = r.value;
    }
    let det = linalg::det(&entries);
    if det.is_zero() {
        return Err(Error::Domain(
            "Theta matrix is singular: the tuple is not a valid germ basis".into(),
        ));
    }
    let adjugate = linalg::adjugate(&entries);
    let labels = tuple.iter().map(|p| p.label).collect();
    Ok(ThetaMatrix { entries, labels, det, adjugate, stable, depth })
}

/// A germ table at one regular semisimple element: the orbital integral
/// vector `O(X, tuple)`, the germ vector `Gamma = adj(Theta) * O`, and the
/// determinant `d_k`, so that `d_k * O = Theta * Gamma` holds exactly.
#[derive(Debug, Clone)]
pub struct GermTable {
    pub orbital: Vec<Q>,
    pub gamma: Vec<Q>,
    pub det: Q,
    pub stable: bool,
}

impl GermTable {
    /// Exact re-verification of the germ expansion identity.
    pub fn expansion_residual(&self, theta: &ThetaMatrix) -> Vec<Q> {
        let lhs: Vec<Q> = self.orbital.iter().map(|x| x * &self.det).collect();
        let rhs = linalg::mat_vec(&theta.entries, &self.gamma);
        lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect()
    }
}

pub fn shalika_germs(
    x: &Sl2Element,
    tuple: &[BarbaschMoyPair],
    theta: &ThetaMatrix,
    depth: usize,
    spec: FieldSpec,
) -> Result<GermTable> {
    let mut orbital = Vec::with_capacity(tuple.len());
    let mut stable = theta.stable;
    for pair in tuple {
        let r = orbital_integral(x, pair, depth, spec)?;
        stable &= r.stable;
        orbital.push(r.value);
    }
    let gamma = linalg::mat_vec(&theta.adjugate, &orbital);
    Ok(GermTable { orbital, gamma, det: theta.det.clone(), stable })
}

/// Germs of the stable orbital integrals of a characteristic point: the same
/// triangular solve applied to the class-summed integrals. Solved through the
/// transposed system (the expansion of test functions in nilpotent orbital
/// integrals), whose regular components are the stable germ coefficients; in
/// this normalization the regular ones are identically 1 near 0.
pub fn stable_germs(
    d: &LocalElement,
    tuple: &[BarbaschMoyPair],
    theta: &ThetaMatrix,
    depth: usize,
    spec: FieldSpec,
) -> Result<Vec<Q>> {
    let mut so = Vec::with_capacity(tuple.len());
    for pair in tuple {
        let r = stable_point_integral(d, None, pair, depth, spec)?;
        r.require_stable()?;
        so.push(r.value);
    }
    // Solve Theta^T gamma = SO exactly via the adjugate.
    let tt = linalg::transpose(&theta.entries);
    let adj = linalg::adjugate(&tt);
    let gamma = linalg::mat_vec(&adj, &so);
    Ok(gamma.into_iter().map(|g| g / &theta.det).collect())
}

/// The truncation family: `1_a` is the indicator of
/// `{X : ord(char_point X) >= a}`, a shrinking family of neighborhoods of the
/// nilpotent cone.
pub fn truncation_family(a: i64) -> DefinableSet {
    use crate::denefpas::RingOp::*;
    let var = |n: &str| VfTerm::Var(n.to_string());
    let det = VfTerm::Neg(Box::new(VfTerm::Bin(
        Add,
        Box::new(VfTerm::Bin(Mul, Box::new(var("xa")), Box::new(var("xa")))),
        Box::new(VfTerm::Bin(Mul, Box::new(var("xb")), Box::new(var("xc")))),
    )));
    let formula = Formula::VgCmp(VgCmp::Ge, VgTerm::Ord(Box::new(det)), VgTerm::Int(a));
    DefinableSet::new(formula)
}

/// Result of the exact linear-dependence scan over truncation levels.
#[derive(Debug, Clone)]
pub struct DependenceReport {
    pub dependent: bool,
    /// A common kernel vector across all levels, when one exists.
    pub kernel: Option<Vec<Q>>,
    /// Too few samples to certify a rank decision.
    pub inconclusive: bool,
}

/// Exact rank computation per truncation level: the function tuple is
/// `a0`-asymptotically dependent iff every level's sample matrix is rank
/// deficient; a common kernel vector is extracted from the stacked system.
pub fn asymptotic_dependence_check(levels: &[Matrix]) -> Result<DependenceReport> {
    if levels.is_empty() {
        return Err(Error::Domain("no truncation levels given".into()));
    }
    let k = levels[0].first().map(|r| r.len()).unwrap_or(0);
    let mut stacked: Matrix = Vec::new();
    let mut dependent = true;
    let mut inconclusive = false;
    for m in levels {
        for row in m {
            if row.len() != k {
                return Err(Error::Domain("ragged sample matrix".into()));
            }
            stacked.push(row.clone());
        }
        let r = linalg::rank(m);
        if r >= k {
            dependent = false;
        }
        if m.len() < k && r == m.len() {
            // Full row rank with fewer samples than functions: the level
            // cannot certify dependence or independence.
            inconclusive = true;
        }
    }
    let kernel = if dependent { linalg::kernel_vector(&stacked) } else { None };
    let dependent = dependent && kernel.is_some();
    Ok(DependenceReport { dependent, kernel, inconclusive })
}

/// The two-field regression family: measures, shell integrals, every Theta
/// entry, and germ vectors at identically-sampled elements, each compared
/// exactly between `Q_p` and `F_p((t))`.
///
/// Samples are drawn digitwise from the seed, so the two fields receive the
/// same digit data and the comparison is meaningful.
pub fn ak_regression_family(
    p: u64,
    precision: usize,
    depth: usize,
    seed: u64,
) -> Result<Vec<(String, crate::integrate::TransferReport)>> {
    use crate::denefpas::{parse, Ball};
    use crate::integrate::{integrate, measure, transfer_compare, TransferReport};
    use crate::localfield::FieldSpec;

    let mut out: Vec<(String, TransferReport)> = Vec::new();

    // Measures of ord/ac-window sets over the unit ball.
    let measures = [
        ("measure ord>=1", "vf x; ord(x) >= 1"),
        ("measure ord>=2", "vf x; ord(x) >= 2"),
        ("measure ac=1, ord<=2", "vf x; ac(x) = 1 && ord(x) <= 2"),
    ];
    for (name, text) in measures {
        let report = transfer_compare(p, precision, |spec| {
            let set = parse(text)?;
            measure(&set, &[Ball::unit(spec)], depth.max(4), spec)
        })?;
        out.push((name.to_string(), report));
    }

    // Shell integrals of |x|^(-1) and |x| over bounded shells.
    let shells: [(&str, i64, &str); 2] = [
        ("shell integral |x|^-1 on 1<=ord<=2", 1, "vf x; ord(x) >= 1 && ord(x) <= 2"),
        ("shell integral |x| on 0<=ord<=1", -1, "vf x; ord(x) >= 0 && ord(x) <= 1"),
    ];
    for (name, mult, text) in shells {
        let report = transfer_compare(p, precision, |spec| {
            let set = parse(text)?;
            let f = crate::integrate::Integrand {
                terms: vec![crate::integrate::IntegrandTerm {
                    coeff: q_int(1),
                    ord_factor: Some((mult, VfTerm::Var("x".into()))),
                    support: None,
                }],
            };
            integrate(&f, &set, &[Ball::unit(spec)], depth.max(3), spec)
        })?;
        out.push((name.to_string(), report));
    }

    // Theta entries and germ vectors, computed once per field.
    let mixed = FieldSpec::qp(p, precision)?;
    let equal = FieldSpec::fpt(p, precision)?;
    let run_field = |spec: FieldSpec| -> Result<(ThetaMatrix, Vec<(String, Vec<Q>)>)> {
        let tuple = crate::sl2germs::barbasch_moy_tuple(spec, 5);
        let theta = theta_matrix(&tuple, depth, spec)?;
        if !theta.stable {
            return Err(Error::Unstable("Theta entries unstable".into()));
        }
        let mut germ_vectors = Vec::new();
        for class in crate::localfield::SquareClass::ALL {
            let v = if class.val_parity_odd() { 3 } else { 2 };
            let samples = crate::sl2germs::sample_regular(spec, seed, class, v, 1, 1)?;
            let table = shalika_germs(&samples[0].x, &tuple, &theta, depth, spec)?;
            if !table.stable {
                return Err(Error::Unstable("germ values unstable".into()));
            }
            germ_vectors.push((format!("germ vector, D class {}", class.label()), table.gamma));
        }
        Ok((theta, germ_vectors))
    };
    let (theta_m, germs_m) = run_field(mixed)?;
    let (theta_e, germs_e) = run_field(equal)?;
    for i in 0..theta_m.entries.len() {
        for j in 0..theta_m.entries.len() {
            let vm = theta_m.entries[i][j].clone();
            let ve = theta_e.entries[i][j].clone();
            out.push((
                format!("theta[{i}][{j}]"),
                TransferReport { p, depth, agree: vm == ve, value_mixed: vm, value_equal: ve },
            ));
        }
    }
    for ((name, gm), (_, ge)) in germs_m.into_iter().zip(germs_e) {
        for (i, (vm, ve)) in gm.into_iter().zip(ge).enumerate() {
            out.push((
                format!("{name}[{i}]"),
                TransferReport { p, depth, agree: vm == ve, value_mixed: vm, value_equal: ve },
            ));
        }
    }
    Ok(out)
}
