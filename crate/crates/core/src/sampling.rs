//! Seeded, reproducible sampling helpers. Every sampled experiment takes an
//! explicit seed; the same seed yields the same elements on every run and
//! in both field kinds (digits are drawn, not values).

use crate::localfield::{FieldSpec, LocalElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A unit with the given leading digit and random higher digits.
    pub fn unit_with_ac(&mut self, spec: FieldSpec, ac: u64, digits: usize) -> LocalElement {
        assert!(ac >= 1 && ac < spec.p);
        let mut ds = vec![ac];
        for _ in 1..digits {
            ds.push(self.rng.gen_range(0..spec.p));
        }
        LocalElement::from_digits(spec, 0, ds, true).unwrap()
    }

    /// A random unit (nonzero leading digit).
    pub fn unit(&mut self, spec: FieldSpec, digits: usize) -> LocalElement {
        let ac = self.rng.gen_range(1..spec.p);
        self.unit_with_ac(spec, ac, digits)
    }

    /// A random element with the exact valuation `val`.
    pub fn with_valuation(&mut self, spec: FieldSpec, val: i64, digits: usize) -> LocalElement {
        self.unit(spec, digits).shift(val)
    }

    /// A random integral element of valuation >= 0, allowing zero digits.
    pub fn integral(&mut self, spec: FieldSpec, digits: usize) -> LocalElement {
        let ds: Vec<u64> = (0..digits).map(|_| self.rng.gen_range(0..spec.p)).collect();
        LocalElement::from_digits(spec, 0, ds, true).unwrap_or_else(|_| LocalElement::zero(spec))
    }
}
