//! Exact linear algebra over the rationals.
//!
//! Rows are cleared to integers and reduced with Bareiss' fraction-free
//! elimination; the reduced row echelon form is only formed at the end, so
//! intermediate entries never carry denominators. Pivot columns are always
//! taken left to right and pivot rows top to bottom, so results are
//! reproducible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::exactalg::rat::{denominator_lcm, Rat};

pub type Matrix = Vec<Vec<Rat>>;

fn to_integer_rows(rows: &[Vec<Rat>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| {
            let l = denominator_lcm(row.iter());
            row.iter()
                .map(|r| r.numer() * (&l / r.denom()))
                .collect()
        })
        .collect()
}

/// Fraction-free forward elimination. Returns the echelon matrix over the
/// integers and the pivot columns.
fn bareiss(mut a: Vec<Vec<BigInt>>, ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..ncols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        // Rows left of column c below r are already zero.
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    // Remove common content so later back substitution stays small.
    for row in &mut a {
        let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if !g.is_zero() && !g.is_one() {
            for x in row.iter_mut() {
                *x = &*x / &g;
            }
        }
    }
    (a, pivots)
}

/// Reduced row echelon form. Zero rows are dropped; the returned pivot list
/// gives the pivot column of each remaining row.
pub fn rref(rows: &[Vec<Rat>], ncols: usize) -> (Matrix, Vec<usize>) {
    debug_assert!(rows.iter().all(|r| r.len() == ncols));
    let (ech, pivots) = bareiss(to_integer_rows(rows), ncols);
    let mut m: Matrix = ech
        .into_iter()
        .map(|row| row.into_iter().map(Rat::from_int).collect())
        .collect();
    for k in (0..m.len()).rev() {
        let pc = pivots[k];
        let inv = m[k][pc].recip();
        for x in m[k].iter_mut() {
            *x = &*x * &inv;
        }
        let (above, rest) = m.split_at_mut(k);
        let pivot_row = &rest[0];
        for row in above {
            let f = row[pc].clone();
            if f.is_zero() {
                continue;
            }
            for (x, p) in row[pc..ncols].iter_mut().zip(&pivot_row[pc..ncols]) {
                *x -= &(p * &f);
            }
        }
    }
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rat>], ncols: usize) -> usize {
    bareiss(to_integer_rows(rows), ncols).1.len()
}

/// Basis of the right kernel `{v : A v = 0}`, one vector per free column in
/// ascending order, with a 1 in that column.
pub fn kernel(rows: &[Vec<Rat>], ncols: usize) -> Matrix {
    let (r, pivots) = rref(rows, ncols);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (k, &pc) in pivots.iter().enumerate() {
            v[pc] = -&r[k][free];
        }
        out.push(v);
    }
    out
}

/// Inverse of a square matrix, or `None` if singular.
pub fn inverse(a: &[Vec<Rat>]) -> Option<Matrix> {
    let n = a.len();
    let aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Matrix {
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    (0..k).fold(Rat::zero(), |acc, t| acc + &row[t] * &b[t][j])
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Rat::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

/// Determinant via fraction-free elimination.
pub fn det(a: &[Vec<Rat>]) -> Rat {
    let n = a.len();
    if n == 0 {
        return Rat::one();
    }
    let mut scale = Rat::one();
    let mut rows = Vec::with_capacity(n);
    for row in a {
        let l = denominator_lcm(row.iter());
        scale = scale * Rat::from_int(l.clone());
        rows.push(row.iter().map(|r| r.numer() * (&l / r.denom())).collect::<Vec<_>>());
    }
    // Track swaps by hand so the sign is right.
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !rows[i][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            rows.swap(p, c);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                let v = &rows[c][c] * &rows[i][j] - &rows[i][c] * &rows[c][j];
                rows[i][j] = v / &prev;
            }
            rows[i][c] = BigInt::zero();
        }
        prev = rows[c][c].clone();
    }
    let d = &rows[n - 1][n - 1] * sign;
    Rat::from_int(d) / scale
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(Rat::is_zero)
}

/// Whether an integer matrix has determinant +1 or -1.
pub fn is_unimodular(a: &[Vec<Rat>]) -> bool {
    let d = det(a);
    d.is_integer() && d.abs().is_one() && a.iter().flatten().all(Rat::is_integer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter()
            .map(|r| r.iter().map(|&x| Rat::from(x)).collect())
            .collect()
    }

    #[test]
    fn kernel_of_rank_one() {
        let a = m(&[&[2, 3, 0, 0]]);
        let k = kernel(&a, 4);
        assert_eq!(k.len(), 3);
        for v in &k {
            assert!(is_zero_vec(&mat_vec(&a, v)));
        }
        assert_eq!(k[0], vec![Rat::new(-3, 2), Rat::one(), Rat::zero(), Rat::zero()]);
    }

    #[test]
    fn rref_with_fractions() {
        let a = vec![
            vec![Rat::new(1, 2), Rat::new(1, 3)],
            vec![Rat::from(3), Rat::from(2)],
        ];
        let (r, p) = rref(&a, 2);
        assert_eq!(p, vec![0]);
        assert_eq!(r, vec![vec![Rat::one(), Rat::new(2, 3)]]);
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(det(&a), Rat::one());
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), m(&[&[1, 0], &[0, 1]]));
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
        assert_eq!(det(&m(&[&[0, 1], &[1, 0]])), Rat::from(-1));
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_annihilated(
            entries in proptest::collection::vec(-4i64..5, 12),
        ) {
            let a: Matrix = entries.chunks(4).map(|r| r.iter().map(|&x| Rat::from(x)).collect()).collect();
            let k = kernel(&a, 4);
            prop_assert_eq!(k.len() + rank(&a, 4), 4);
            for v in &k {
                prop_assert!(is_zero_vec(&mat_vec(&a, v)));
            }
        }

        #[test]
        fn det_matches_cofactor_3x3(entries in proptest::collection::vec(-5i64..6, 9)) {
            let a: Matrix = entries.chunks(3).map(|r| r.iter().map(|&x| Rat::from(x)).collect()).collect();
            let e = |i: usize, j: usize| entries[i * 3 + j];
            let expect = e(0,0)*(e(1,1)*e(2,2)-e(1,2)*e(2,1))
                - e(0,1)*(e(1,0)*e(2,2)-e(1,2)*e(2,0))
                + e(0,2)*(e(1,0)*e(2,1)-e(1,1)*e(2,0));
            prop_assert_eq!(det(&a), Rat::from(expect));
        }
    }
}
