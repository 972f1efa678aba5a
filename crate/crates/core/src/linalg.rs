//! Exact rational linear algebra: determinant, adjugate, rank, kernels.
//! Sizes here are tiny (k <= 6 for germ tables), so cofactor expansion and
//! fraction-free elimination are plenty.

use crate::Q;
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<Q>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|k| &a[i][k] * &b[k][j]).fold(Q::zero(), |s, x| s + x))
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Matrix, v: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).fold(Q::zero(), |s, t| s + t))
        .collect()
}

pub fn scale(a: &Matrix, c: &Q) -> Matrix {
    a.iter().map(|row| row.iter().map(|x| x * c).collect()).collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn det(a: &Matrix) -> Q {
    let n = a.len();
    if n == 0 {
        return Q::one();
    }
    if n == 1 {
        return a[0][0].clone();
    }
    let mut acc = Q::zero();
    for j in 0..n {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: Matrix = a[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter_map(|(k, x)| if k == j { None } else { Some(x.clone()) })
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
        acc += sign * &a[0][j] * det(&minor);
    }
    acc
}

/// Adjugate matrix: adj(A)[i][j] = cofactor(A)[j][i], so A * adj(A) = det(A) I.
pub fn adjugate(a: &Matrix) -> Matrix {
    let n = a.len();
    if n == 1 {
        return vec![vec![Q::one()]];
    }
    let mut out = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Matrix = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| a[r][c].clone()).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { Q::one() } else { -Q::one() };
            out[i][j] = sign * det(&minor);
        }
    }
    out
}

/// Row echelon rank by exact Gaussian elimination.
pub fn rank(a: &Matrix) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0usize;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let pivot = (r..rows).find(|&i| !m[i][c].is_zero());
        let Some(pivot) = pivot else { continue };
        m.swap(r, pivot);
        let pv = m[r][c].clone();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pv;
                for j in c..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] = &m[i][j] - sub;
                }
            }
        }
        r += 1;
    }
    r
}

/// A nonzero kernel vector of the column space (solves A x = 0), or None when
/// the columns are independent.
pub fn kernel_vector(a: &Matrix) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { return None } else { a[0].len() };
    let mut m = a.clone();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut r = 0usize;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        if let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) {
            m.swap(r, p);
            let pv = m[r][c].clone();
            for j in 0..cols {
                m[r][j] = &m[r][j] / &pv;
            }
            for i in 0..rows {
                if i != r && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in 0..cols {
                        let sub = &f * &m[r][j];
                        m[i][j] = &m[i][j] - sub;
                    }
                }
            }
            pivot_of_col[c] = Some(r);
            r += 1;
        }
    }
    // Pick the first free column and back-substitute.
    let free = (0..cols).find(|&c| pivot_of_col[c].is_none())?;
    let mut x = vec![Q::zero(); cols];
    x[free] = Q::one();
    for c in 0..cols {
        if let Some(pr) = pivot_of_col[c] {
            x[c] = -m[pr][free].clone();
        }
    }
    Some(x)
}

/// Formats a rational as the canonical `num/den` string used in all outputs.
pub fn q_to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses the `num/den` form.
pub fn q_from_string(s: &str) -> Option<Q> {
    let (n, d) = s.split_once('/')?;
    let n: crate::Z = n.trim().parse().ok()?;
    let d: crate::Z = d.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

/// `p^k` as a rational with integer exponent of either sign.
pub fn pow_q(p: u64, k: i64) -> Q {
    crate::q_pow(p, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| crate::q_int(x)).collect()).collect()
    }

    #[test]
    fn adjugate_small() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let adj = adjugate(&a);
        assert_eq!(adj, m(&[&[4, -2], &[-3, 1]]));
        let idm = identity(3);
        assert_eq!(adjugate(&idm), idm);
    }

    #[test]
    fn adjugate_identity_holds() {
        let a = m(&[&[2, 0, 1], &[1, 3, 0], &[0, 1, 1]]);
        let d = det(&a);
        let prod = mat_mul(&adjugate(&a), &a);
        assert_eq!(prod, scale(&identity(3), &d));
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rank(&a), 2);
        let k = kernel_vector(&a).unwrap();
        let img = mat_vec(&a, &k);
        assert!(img.iter().all(|x| x.is_zero()));
        assert!(k.iter().any(|x| !x.is_zero()));
        let full = m(&[&[1, 0], &[0, 1]]);
        assert!(kernel_vector(&full).is_none());
    }

    #[test]
    fn q_string_round_trip() {
        let x = crate::q_ratio(-8, 6);
        let s = q_to_string(&x);
        assert_eq!(s, "-4/3");
        assert_eq!(q_from_string(&s).unwrap(), x);
    }
}
