//! Brute-force conjugation classification of nilpotent elements at a finite
//! digit depth — the independent oracle behind the class count.
//!
//! The oracle enumerates the trace-zero triples `(a, b, c)` with
//! `a^2 + bc = 0 (mod pi^m)` and min-order 0 ("unit level"), and computes
//! their orbit partition under conjugation by the elementary generators
//! `E12(pi^i)`, `E21(pi^i)` of SL2 over the residue ring. Every nonzero
//! nilpotent class has a representative of min-order 0 or 1, shells alternate
//! under scaling, and dividing a min-order-1 representative by the
//! uniformizer identifies its classification with the unit-level run one
//! digit shallower. The class count is therefore
//! `components(depth) + components(depth - 1) + 1` (the zero orbit).

use crate::error::{Error, Result};
use crate::localfield::residue::ResidueRing;
use crate::localfield::FieldSpec;
use std::collections::HashMap;

/// Summary of the brute-force classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotentClassification {
    /// Conjugation components among min-order-0 representatives at `depth`.
    pub unit_level_components: usize,
    /// Components of the pi-scaled shell (unit level at `depth - 1`).
    pub scaled_level_components: usize,
    /// Total class count: both shells plus the zero orbit.
    pub class_count: usize,
    /// Representatives enumerated across the two runs.
    pub nodes: usize,
    pub depth: usize,
}

fn pack(ring: &ResidueRing, a: u64, b: u64, c: u64) -> u128 {
    let s = ring.size as u128;
    (a as u128) * s * s + (b as u128) * s + c as u128
}

fn min_ord_is_zero(ring: &ResidueRing, a: u64, b: u64, c: u64) -> bool {
    [a, b, c].iter().any(|&x| ring.ord(x) == Some(0))
}

/// Conjugation by [[1, t], [0, 1]]: (a, b, c) -> (a + tc, b - 2ta - t^2 c, c).
fn conj_e12(ring: &ResidueRing, t: u64, a: u64, b: u64, c: u64) -> (u64, u64, u64) {
    let tc = ring.mul(t, c);
    let two_ta = ring.mul(2 % ring.p, ring.mul(t, a));
    let ttc = ring.mul(ring.mul(t, t), c);
    (ring.add(a, tc), ring.sub(ring.sub(b, two_ta), ttc), c)
}

/// Conjugation by [[1, 0], [t, 1]]: (a, b, c) -> (a - tb, b, c + 2ta - t^2 b).
fn conj_e21(ring: &ResidueRing, t: u64, a: u64, b: u64, c: u64) -> (u64, u64, u64) {
    let tb = ring.mul(t, b);
    let two_ta = ring.mul(2 % ring.p, ring.mul(t, a));
    let ttb = ring.mul(ring.mul(t, t), b);
    (ring.sub(a, tb), b, ring.sub(ring.add(c, two_ta), ttb))
}

/// Orbit count of unit-level nilpotent representatives mod pi^m.
fn unit_level_components(spec: FieldSpec, m: usize) -> Result<(usize, usize)> {
    if m < 2 {
        return Err(Error::Domain("unit-level classification needs modulus >= 2".into()));
    }
    let ring = ResidueRing::new(&spec, m)?;
    let n = ring.size;
    let mut index: HashMap<u128, usize> = HashMap::new();
    let mut nodes: Vec<(u64, u64, u64)> = Vec::new();
    let mut visit = |ring: &ResidueRing, a: u64, b: u64, c: u64| {
        debug_assert_eq!(ring.add(ring.mul(a, a), ring.mul(b, c)), 0);
        if min_ord_is_zero(ring, a, b, c) {
            let key = pack(ring, a, b, c);
            if !index.contains_key(&key) {
                index.insert(key, nodes.len());
                nodes.push((a, b, c));
            }
        }
    };
    for a in 0..n {
        let rhs = ring.neg(ring.mul(a, a));
        for b in 0..n {
            if b == 0 {
                if rhs == 0 {
                    for c in 0..n {
                        visit(&ring, a, 0, c);
                    }
                }
                continue;
            }
            let beta = ring.ord(b).unwrap();
            if let Some(w) = ring.ord(rhs) {
                if w < beta {
                    continue;
                }
            }
            let unit_b = ring.shift_down(b, beta);
            let inv_u = ring.inv_unit(unit_b);
            let rhs_shift = if rhs == 0 { 0 } else { ring.shift_down(rhs, beta) };
            let step = ring.pow_p(ring.m - beta);
            let c0 = ring.mul(rhs_shift, inv_u) % step;
            let mut c = c0;
            while c < ring.size {
                visit(&ring, a, b, c);
                c += step;
            }
        }
    }
    // Union-find under conjugation by E12(pi^i), E21(pi^i), which generate
    // SL2 over the residue ring in both characteristics.
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let generators: Vec<u64> = (0..m).map(|i| ring.pow_p(i)).collect();
    for i in 0..nodes.len() {
        let (a, b, c) = nodes[i];
        for &t in &generators {
            for (na, nb, nc) in [conj_e12(&ring, t, a, b, c), conj_e21(&ring, t, a, b, c)] {
                let key = pack(&ring, na, nb, nc);
                let j = *index
                    .get(&key)
                    .expect("conjugation preserves nilpotence and the unit level");
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..nodes.len()).map(|i| find(&mut parent, i)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok((roots.len(), nodes.len()))
}

/// Enumerates and classifies. `depth >= 3` keeps both shell runs Hensel-valid.
pub fn classify_nilpotents(spec: FieldSpec, depth: usize) -> Result<NilpotentClassification> {
    if depth < 3 {
        return Err(Error::Domain("classification needs depth >= 3".into()));
    }
    let (unit, n0) = unit_level_components(spec, depth)?;
    let (scaled, n1) = unit_level_components(spec, depth - 1)?;
    Ok(NilpotentClassification {
        unit_level_components: unit,
        scaled_level_components: scaled,
        class_count: unit + scaled + 1,
        nodes: n0 + n1,
        depth,
    })
}
