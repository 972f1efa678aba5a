//! Exact-arithmetic laboratory for orbital integrals on sl2 over nonarchimedean
//! local fields of both characteristics.
//!
//! The crate is organized around eight subsystems:
//!
//! * [`localfield`] — finite-precision exact arithmetic in `Q_p` and `F_p((t))`:
//!   valuation, angular component, square classes, square roots, Hilbert symbol.
//! * [`denefpas`] — a three-sorted first-order formula language (valued field,
//!   residue field, value group) with a parser, printer, and concrete evaluator.
//! * [`presburger`] — exact algebra of piecewise exponential polynomials on `Z`,
//!   with zero-set scans and certified tail bounds.
//! * [`integrate`] — measures and integrals of definable sets by coset counting,
//!   Leray fiber measures for the sl2 quadric, and the two-field comparator.
//! * [`rootdata`] — root data, affine diagrams with automorphisms, and the
//!   parahoric indexing set.
//! * [`sl2germs`] — nilpotent orbits, Moy-Prasad lattices, Barbasch-Moy pairs,
//!   the Theta matrix of nilpotent orbital integrals, and Shalika germ tables.
//! * [`endoscopy`] — rank-1 transfer factors, kappa-orbital integrals, stable
//!   integrals on the endoscopic torus, and the local matching search.
//! * [`linalg`] — exact rational matrix helpers (determinant, adjugate, kernels).
//!
//! All numeric results are exact rationals; no floating point is used anywhere.

pub mod denefpas;
pub mod endoscopy;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod localfield;
pub mod presburger;
pub mod rootdata;
pub mod sampling;
pub mod sl2germs;

pub use error::{Error, Result};

/// Exact rational scalar used for all measures, integrals, and germ values.
pub type Q = num_rational::BigRational;

/// Exact integer used for point counts and rational numerators/denominators.
pub type Z = num_bigint::BigInt;

/// Convenience: build a `Q` from an integer.
pub fn q_int(n: i64) -> Q {
    Q::from_integer(Z::from(n))
}

/// Convenience: build a `Q` from a numerator/denominator pair.
pub fn q_ratio(num: i64, den: i64) -> Q {
    Q::new(Z::from(num), Z::from(den))
}

/// p^k as a `Q`, with k possibly negative.
pub fn q_pow(p: u64, k: i64) -> Q {
    let base = Z::from(p);
    if k >= 0 {
        Q::from_integer(base.pow(k as u32))
    } else {
        Q::new(Z::from(1), base.pow((-k) as u32))
    }
}
