//! Exact integer matrices, Smith normal form and rational solving.
//!
//! Matrices act on column vectors. All lattices in this crate are
//! `Z^n` with the standard dot product as pairing, so a matrix acting on the
//! character lattice acts on the cocharacter lattice by its inverse transpose.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<i64>;

/// Serialized as a list of rows.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<i64>>", try_from = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = String;

    fn try_from(rows: Vec<Vec<i64>>) -> std::result::Result<Self, String> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err("matrix rows have different lengths".into());
        }
        Ok(IntMatrix::from_rows(&rows, cols))
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows. Every row must have length `cols`.
    pub fn from_rows(rows: &[Vec<i64>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<i64>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged matrix columns");
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: i64) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    /// Determinant by fraction-free elimination.
    pub fn det(&self) -> i64 {
        assert!(self.is_square());
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> = (0..n)
            .map(|i| self.row(i).iter().map(|&x| x as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                let Some(swap) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                    return 0;
                };
                a.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        (sign * a[n - 1][n - 1]) as i64
    }

    /// Inverse over the rationals, if the matrix is invertible.
    pub fn inverse_rational(&self) -> Option<Vec<Vec<Rational>>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut r: Vec<Rational> = self.row(i).iter().map(|&x| Rational::from(x)).collect();
                r.extend((0..n).map(|j| Rational::from(i64::from(i == j))));
                r
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&i| a[i][c] != Rational::from(0))?;
            a.swap(c, p);
            let piv = a[c][c];
            for x in a[c].iter_mut() {
                *x /= piv;
            }
            for i in 0..n {
                if i != c && a[i][c] != Rational::from(0) {
                    let f = a[i][c];
                    for j in 0..2 * n {
                        let t = a[c][j];
                        a[i][j] -= f * t;
                    }
                }
            }
        }
        Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Inverse over the integers; `None` unless the matrix is unimodular.
    pub fn inverse(&self) -> Option<IntMatrix> {
        let inv = self.inverse_rational()?;
        let mut m = Self::zeros(self.rows, self.cols);
        for (i, r) in inv.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                if !x.is_integer() {
                    return None;
                }
                m.set(i, j, x.to_integer());
            }
        }
        Some(m)
    }

    /// Multiplicative order, if it is at most `bound`.
    pub fn order(&self, bound: u32) -> Option<u32> {
        let id = Self::identity(self.rows);
        let mut p = self.clone();
        for k in 1..=bound {
            if p == id {
                return Some(k);
            }
            p = p.mul(self);
        }
        None
    }
}

/// `u * a * v == diag` with `u`, `v` unimodular and `diag` the invariant
/// factors (nonnegative, each dividing the next, zeros last).
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub diag: Vec<i64>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|&&d| d != 0).count()
    }

    /// Invariant factors greater than one: the torsion of the cokernel.
    pub fn torsion(&self) -> Vec<i64> {
        self.diag.iter().copied().filter(|&d| d > 1).collect()
    }
}

/// `a / b` rounded to the nearest integer, keeping remainders balanced.
fn nearest_quotient(a: i128, b: i128) -> i128 {
    let q = a / b;
    let r = a - q * b;
    if 2 * r.abs() > b.abs() {
        q + r.signum() * b.signum()
    } else {
        q
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> Smith {
    let (m, n) = (a.rows, a.cols);
    let mut d: Vec<Vec<i128>> = (0..m)
        .map(|i| a.row(i).iter().map(|&x| x as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..m)
        .map(|i| (0..m).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();

    let swap_cols = |mat: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for row in mat.iter_mut() {
            row.swap(i, j);
        }
    };

    let mut t = 0;
    while t < m.min(n) {
        // pivot: smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if d[i][j] != 0 && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if d[i][t] != 0 {
                    let q = nearest_quotient(d[i][t], d[t][t]);
                    for j in 0..n {
                        d[i][j] -= q * d[t][j];
                    }
                    for j in 0..m {
                        u[i][j] -= q * u[t][j];
                    }
                    if d[i][t] != 0 {
                        d.swap(t, i);
                        u.swap(t, i);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..n {
                if d[t][j] != 0 {
                    let q = nearest_quotient(d[t][j], d[t][t]);
                    for i in 0..m {
                        d[i][j] -= q * d[i][t];
                    }
                    for i in 0..n {
                        v[i][j] -= q * v[i][t];
                    }
                    if d[t][j] != 0 {
                        swap_cols(&mut d, t, j);
                        swap_cols(&mut v, t, j);
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // divisibility of the trailing block
            let bad = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| d[i][j] % d[t][t] != 0);
            match bad {
                Some((i, _)) => {
                    for j in 0..n {
                        d[t][j] += d[i][j];
                    }
                    for j in 0..m {
                        u[t][j] += u[i][j];
                    }
                }
                None => break,
            }
        }
        if d[t][t] < 0 {
            for j in 0..n {
                d[t][j] = -d[t][j];
            }
            for j in 0..m {
                u[t][j] = -u[t][j];
            }
        }
        t += 1;
    }

    let to_mat = |x: &Vec<Vec<i128>>, r: usize, c: usize| {
        let mut out = IntMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                out.set(i, j, i64::try_from(x[i][j]).expect("Smith form entry overflow"));
            }
        }
        out
    };
    let diag = (0..m.min(n))
        .map(|i| i64::try_from(d[i][i]).expect("Smith form entry overflow"))
        .collect();
    Smith {
        u: to_mat(&u, m, m),
        v: to_mat(&v, n, n),
        diag,
    }
}

/// Solves `a x = b` over the rationals when `a` has full column rank.
/// Returns `None` if the system is inconsistent.
pub fn solve_rational(a: &IntMatrix, b: &[i64]) -> Option<Vec<Rational>> {
    let (m, n) = (a.rows, a.cols);
    assert_eq!(b.len(), m);
    let zero = Rational::from(0);
    let mut rows: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut r: Vec<Rational> = a.row(i).iter().map(|&x| Rational::from(x)).collect();
            r.push(Rational::from(b[i]));
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| rows[i][c] != zero) else {
            continue;
        };
        rows.swap(r, p);
        let piv = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= piv;
        }
        for i in 0..m {
            if i != r && rows[i][c] != zero {
                let f = rows[i][c];
                for j in 0..=n {
                    let t = rows[r][j];
                    rows[i][j] -= f * t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[n] != zero) {
        return None;
    }
    if pivots.len() < n {
        return None;
    }
    let mut x = vec![zero; n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][n];
    }
    Some(x)
}

/// Integer solution of `a x = b` for full column rank `a`, if one exists.
pub fn solve_integer(a: &IntMatrix, b: &[i64]) -> Option<Vec<i64>> {
    solve_rational(a, b)?
        .into_iter()
        .map(|x| x.is_integer().then(|| x.to_integer()))
        .collect()
}

/// A basis (as columns) of the lattice spanned by the columns of `gens`.
pub fn lattice_basis(gens: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(gens);
    let uinv = s.u.inverse().expect("Smith transform is unimodular");
    let cols: Vec<Vec<i64>> = s
        .diag
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(i, &d)| uinv.col(i).into_iter().map(|x| x * d).collect())
        .collect();
    IntMatrix::from_cols(&cols, gens.rows)
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_smith(a: &IntMatrix) {
        let s = smith_normal_form(a);
        let prod = s.u.mul(a).mul(&s.v);
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let expected = if i == j { s.diag[i] } else { 0 };
                assert_eq!(prod.get(i, j), expected, "{a:?} -> {prod:?}");
            }
        }
        for w in s.diag.windows(2) {
            if w[1] != 0 {
                assert_eq!(w[1] % w[0], 0);
            }
        }
        assert_eq!(s.u.det().abs(), 1);
        assert_eq!(s.v.det().abs(), 1);
    }

    #[test]
    fn smith_small_cases() {
        check_smith(&IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]], 3));
        check_smith(&IntMatrix::from_rows(&[vec![2]], 1));
        check_smith(&IntMatrix::from_rows(&[vec![1, -1], vec![-1, 1]], 2));
        check_smith(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]], 2));
        let s = smith_normal_form(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]], 2));
        assert_eq!(s.diag, vec![1, 6]);
    }

    #[test]
    fn det_and_inverse() {
        let a = IntMatrix::from_rows(&[vec![2, -1], vec![-1, 2]], 2);
        assert_eq!(a.det(), 3);
        assert!(a.inverse().is_none());
        let b = IntMatrix::from_rows(&[vec![0, 1], vec![-1, -1]], 2);
        let bi = b.inverse().unwrap();
        assert!(b.mul(&bi).is_identity());
        assert_eq!(b.order(12), Some(3));
    }

    #[test]
    fn rational_solve() {
        let a = IntMatrix::from_rows(&[vec![1, 0], vec![1, 1], vec![0, 2]], 2);
        assert_eq!(solve_integer(&a, &[1, 3, 4]), Some(vec![1, 2]));
        assert_eq!(solve_rational(&a, &[1, 3, 5]), None);
    }

    proptest::proptest! {
        #[test]
        fn smith_random(entries in proptest::collection::vec(-9i64..10, 12)) {
            let a = IntMatrix::from_rows(&[entries[0..4].to_vec(), entries[4..8].to_vec(), entries[8..12].to_vec()], 4);
            check_smith(&a);
        }
    }
}
