//! Dense integer matrices: Hermite normal form, kernels, saturation.
//!
//! Conventions: HNF is column style. For an `m x n` input `M` we return a
//! unimodular `n x n` transform `U` with `M * U = H`, where `H` is lower
//! echelon: the pivot of each pivot row is positive, entries to the right
//! of a pivot are zero and entries to its left lie in `[0, pivot)`. The
//! last `n - rank` columns of `H` are zero, so the matching columns of `U`
//! form a basis of the integer kernel.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_rational::Ratio;

use crate::scalar::{content, is_zero_vec, Rational, Scalar};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Build from rows; every row must have length `ncols`.
    pub fn from_rows(rows: &[Vec<T>], ncols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged matrix");
            data.extend(r.iter().cloned());
        }
        Matrix {
            nrows: rows.len(),
            ncols,
            data,
        }
    }

    /// Build from columns of length `nrows`.
    pub fn from_cols(cols: &[Vec<T>], nrows: usize) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows, "ragged matrix");
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.nrows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.ncols, rhs.nrows, "dimension mismatch");
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let prod = a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, v.len(), "dimension mismatch");
        (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && (0..self.nrows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.nrows {
            self.data.swap(i * self.ncols + a, i * self.ncols + b);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.nrows {
            let v = -self[(i, j)].clone();
            self[(i, j)] = v;
        }
    }

    /// `col_dst -= q * col_src`
    fn sub_col_multiple(&mut self, dst: usize, src: usize, q: &T) {
        for i in 0..self.nrows {
            let v = self[(i, dst)].clone() - q.clone() * self[(i, src)].clone();
            self[(i, dst)] = v;
        }
    }

    /// Simultaneously `col_a <- s*col_a + t*col_b`, `col_b <- u*col_a + v*col_b`.
    fn combine_cols(&mut self, a: usize, b: usize, s: &T, t: &T, u: &T, v: &T) {
        for i in 0..self.nrows {
            let x = self[(i, a)].clone();
            let y = self[(i, b)].clone();
            self[(i, a)] = s.clone() * x.clone() + t.clone() * y.clone();
            self[(i, b)] = u.clone() * x + v.clone() * y;
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> T {
        assert_eq!(self.nrows, self.ncols, "determinant of a non-square matrix");
        let n = self.nrows;
        if n == 0 {
            return T::one();
        }
        let mut a = self.rows();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return T::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                    a[i][j] = num / prev.clone();
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    pub fn rank(&self) -> usize {
        hnf(self).rank
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            let row: Vec<String> = (0..self.ncols)
                .map(|j| format!("{:?}", self.data[i * self.ncols + j]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Result of [`hnf`].
#[derive(Debug, Clone)]
pub struct Hnf<T> {
    pub h: Matrix<T>,
    pub transform: Matrix<T>,
    pub rank: usize,
    /// `(row, col)` of each pivot, in order.
    pub pivots: Vec<(usize, usize)>,
}

fn xgcd<T: Scalar>(a: &T, b: &T) -> (T, T, T) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Column-style Hermite normal form with its unimodular transform.
pub fn hnf<T: Scalar>(m: &Matrix<T>) -> Hnf<T> {
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut a = m.clone();
    let mut u = Matrix::identity(nc);
    let mut k = 0;
    let mut pivots = Vec::new();
    for i in 0..nr {
        if k == nc {
            break;
        }
        for j in k + 1..nc {
            if a[(i, j)].is_zero() {
                continue;
            }
            if a[(i, k)].is_zero() {
                a.swap_cols(k, j);
                u.swap_cols(k, j);
                continue;
            }
            let (x, y) = (a[(i, k)].clone(), a[(i, j)].clone());
            if y.is_multiple_of(&x) {
                let q = y / x;
                a.sub_col_multiple(j, k, &q);
                u.sub_col_multiple(j, k, &q);
                continue;
            }
            let (g, s, t) = xgcd(&x, &y);
            let (xg, yg) = (x / g.clone(), y / g);
            let neg_yg = -yg;
            a.combine_cols(k, j, &s, &t, &neg_yg, &xg);
            u.combine_cols(k, j, &s, &t, &neg_yg, &xg);
        }
        if a[(i, k)].is_zero() {
            continue;
        }
        if a[(i, k)].is_negative() {
            a.negate_col(k);
            u.negate_col(k);
        }
        let pivot = a[(i, k)].clone();
        for j in 0..k {
            let q = a[(i, j)].div_floor(&pivot);
            if !q.is_zero() {
                a.sub_col_multiple(j, k, &q);
                u.sub_col_multiple(j, k, &q);
            }
        }
        pivots.push((i, k));
        k += 1;
    }
    Hnf {
        h: a,
        transform: u,
        rank: k,
        pivots,
    }
}

/// Flip sign so the first nonzero coordinate is positive.
fn sign_normalize<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    if let Some(x) = v.iter().find(|x| !x.is_zero()) {
        if x.is_negative() {
            for c in v.iter_mut() {
                *c = -c.clone();
            }
        }
    }
    v
}

/// A basis of `{ v in Z^n : M v = 0 }`. The basis generates the whole
/// kernel lattice, not a finite-index sublattice.
pub fn integer_kernel<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let res = hnf(m);
    (res.rank..m.ncols())
        .map(|j| sign_normalize(res.transform.col(j)))
        .collect()
}

/// Clear denominators of a rational vector (result is a positive multiple).
pub fn clear_denominators<T: Scalar>(v: &[Rational<T>]) -> Vec<T> {
    let l = v.iter().fold(T::one(), |acc, x| acc.lcm(x.denom()));
    v.iter()
        .map(|x| (x.clone() * Ratio::from_integer(l.clone())).to_integer())
        .collect()
}

/// Integer vector with coprime coordinates, a positive multiple of `v`.
/// `None` for the zero vector.
pub fn primitivize<T: Scalar>(v: &[Rational<T>]) -> Option<Vec<T>> {
    primitivize_int(&clear_denominators(v))
}

pub fn primitivize_int<T: Scalar>(v: &[T]) -> Option<Vec<T>> {
    let g = content(v);
    if g.is_zero() {
        return None;
    }
    Some(v.iter().map(|x| x.clone() / g.clone()).collect())
}

/// Canonical basis of the lattice spanned by `vectors` (all of length `n`):
/// the nonzero columns of the HNF of the matrix whose columns are the input.
pub fn canonical_basis<T: Scalar>(vectors: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    let res = hnf(&Matrix::from_cols(vectors, n));
    (0..res.rank).map(|j| res.h.col(j)).collect()
}

/// Error from [`saturate`]: the input vectors are linearly dependent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependentInput;

/// A Z-basis of `span_Q(vectors) ∩ Z^n`, in canonical (HNF) form.
pub fn saturate<T: Scalar>(vectors: &[Vec<Rational<T>>], n: usize) -> Result<Vec<Vec<T>>, DependentInput> {
    let rows: Vec<Vec<T>> = vectors.iter().map(|v| clear_denominators(v)).collect();
    saturate_int(&rows, n)
}

pub fn saturate_int<T: Scalar>(rows: &[Vec<T>], n: usize) -> Result<Vec<Vec<T>>, DependentInput> {
    if rows.iter().any(|r| is_zero_vec(r)) {
        return Err(DependentInput);
    }
    let m = Matrix::from_rows(rows, n);
    if m.rank() != rows.len() {
        return Err(DependentInput);
    }
    let kernel = integer_kernel(&m);
    let sat = integer_kernel(&Matrix::from_rows(&kernel, n));
    Ok(canonical_basis(&sat, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{Signed, Zero};
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> Matrix<i64> {
        let v: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        Matrix::from_rows(&v, rows[0].len())
    }

    fn q(n: i64, d: i64) -> Rational<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn hnf_examples() {
        let id = mat(&[&[1, 0], &[0, 1]]);
        let r = hnf(&id);
        assert_eq!(r.h, id);
        assert_eq!(r.transform, id);

        let d = mat(&[&[2, 0], &[0, 3]]);
        let r = hnf(&d);
        assert_eq!(r.h, d);
        assert_eq!(r.transform, id);

        let m = mat(&[&[2, 4], &[0, 2]]);
        let r = hnf(&m);
        assert_eq!(r.h, mat(&[&[2, 0], &[0, 2]]));
        assert_eq!(m.mul(&r.transform), r.h);
        assert_eq!(r.transform.det().abs(), 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(integer_kernel(&mat(&[&[1, 0]])), vec![vec![0, 1]]);
        assert!(integer_kernel(&mat(&[&[1, 0], &[0, 1]])).is_empty());
        assert_eq!(integer_kernel(&mat(&[&[2, 4]])), vec![vec![2, -1]]);
        let empty: Matrix<i64> = Matrix::zeros(0, 3);
        assert_eq!(integer_kernel(&empty).len(), 3);
    }

    #[test]
    fn det_examples() {
        assert_eq!(mat(&[&[0, 1], &[1, 0]]).det(), -1);
        assert_eq!(mat(&[&[2, 4], &[1, 2]]).det(), 0);
        assert_eq!(mat(&[&[0, 2, 1], &[3, 0, 0], &[1, 1, 1]]).det(), -3);
    }

    #[test]
    fn primitivize_examples() {
        assert_eq!(primitivize(&[q(2, 1), q(4, 1), q(0, 1)]), Some(vec![1, 2, 0]));
        assert_eq!(primitivize(&[q(1, 3), q(0, 1)]), Some(vec![1, 0]));
        assert_eq!(primitivize(&[q(-2, 1), q(0, 1)]), Some(vec![-1, 0]));
        assert_eq!(primitivize(&[q(-1, 2), q(1, 2)]), Some(vec![-1, 1]));
        assert_eq!(primitivize::<i64>(&[q(0, 1), q(0, 1)]), None);
    }

    #[test]
    fn saturate_examples() {
        let r = |v: &[i64]| v.iter().map(|&x| q(x, 1)).collect::<Vec<_>>();
        assert_eq!(
            saturate(&[r(&[2, 0, 0]), r(&[0, 2, 0])], 3).unwrap(),
            vec![vec![1, 0, 0], vec![0, 1, 0]]
        );
        assert_eq!(
            saturate(&[vec![q(1, 2), q(0, 1), q(0, 1)]], 3).unwrap(),
            vec![vec![1, 0, 0]]
        );
        // (1,1) and (1,-1) span an index-2 sublattice whose saturation is Z^2
        // on those coordinates.
        assert_eq!(
            saturate(&[r(&[1, 1, 0]), r(&[1, -1, 0])], 3).unwrap(),
            vec![vec![1, 0, 0], vec![0, 1, 0]]
        );
        assert_eq!(canonical_basis(&[vec![1i64, 1], vec![1, -1]], 2), vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(saturate(&[r(&[1, 2]), r(&[2, 4])], 2), Err(DependentInput));
        assert_eq!(saturate(&[r(&[0, 0])], 2), Err(DependentInput));
    }

    // Independent check of the normal-form shape.
    fn is_column_hnf(h: &Matrix<BigInt>, rank: usize) -> bool {
        let mut col = 0;
        for i in 0..h.nrows() {
            if col < h.ncols() && !h[(i, col)].is_zero() {
                let p = &h[(i, col)];
                if !p.is_positive() {
                    return false;
                }
                if (col + 1..h.ncols()).any(|j| !h[(i, j)].is_zero()) {
                    return false;
                }
                if (0..col).any(|j| h[(i, j)].is_negative() || &h[(i, j)] >= p) {
                    return false;
                }
                col += 1;
            } else if (col..h.ncols()).any(|j| !h[(i, j)].is_zero()) {
                return false;
            }
        }
        col == rank
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix<BigInt>> {
        (1usize..5, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-20i64..=20, r * c).prop_map(move |d| {
                let rows: Vec<Vec<BigInt>> = d.chunks(c).map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect()).collect();
                Matrix::from_rows(&rows, c)
            })
        })
    }

    proptest! {
        #[test]
        fn hnf_is_normal_form(m in arb_matrix()) {
            let r = hnf(&m);
            prop_assert_eq!(m.mul(&r.transform), r.h.clone());
            prop_assert_eq!(r.transform.det().abs(), BigInt::from(1));
            prop_assert!(is_column_hnf(&r.h, r.rank));
        }

        #[test]
        fn kernel_is_annihilated(m in arb_matrix()) {
            let k = integer_kernel(&m);
            prop_assert_eq!(k.len() + m.rank(), m.ncols());
            for v in &k {
                prop_assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
            }
        }

        #[test]
        fn det_matches_cofactor_expansion(d in proptest::collection::vec(-9i64..=9, 16)) {
            let rows: Vec<Vec<i64>> = d.chunks(4).map(|c| c.to_vec()).collect();
            let m = Matrix::from_rows(&rows, 4);
            prop_assert_eq!(m.det(), cofactor_det(&rows));
        }
    }

    fn cofactor_det(rows: &[Vec<i64>]) -> i64 {
        let n = rows.len();
        if n == 1 {
            return rows[0][0];
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * rows[0][j] * cofactor_det(&minor)
            })
            .sum()
    }
}
