//! Even lattices given by an exact symmetric Gram matrix, and the
//! building blocks `U`, `E8(-1)`, `Z(-d)` of the polarized K3 lattice
//! `Λ_d = Z(-d) ⊕ U ⊕ U ⊕ E8(-1) ⊕ E8(-1)`.
//!
//! Coordinates of `Λ_d` follow a fixed slot order:
//!
//! | slot        | coordinates |
//! |-------------|-------------|
//! | `Z(-d)`     | 0           |
//! | first `U`   | 1, 2        |
//! | second `U`  | 3, 4        |
//! | first `E8`  | 5..=12      |
//! | second `E8` | 13..=20     |
//!
//! Inside an `E8(-1)` slot the simple roots are the coordinate vectors in
//! Bourbaki order: the chain `1-3-4-5-6-7-8` with node 2 attached to 4.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("vector has length {found}, lattice rank is {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("Gram matrix is not square and symmetric")]
    NotSymmetric,
    #[error("Gram matrix is degenerate")]
    Degenerate,
    #[error("degree must be even and at least 2, got {0}")]
    InvalidDegree(i64),
    #[error("no vector of norm -2 found within the search bound")]
    NotFound,
}

/// Adjacent node pairs of the E8 Dynkin diagram, 1-based Bourbaki labels.
pub const E8_EDGES: [(usize, usize); 7] = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)];

/// Largest coefficient used when combining roots in [`GramLattice::find_norm_minus2`].
pub const ROOT_COMBINATION_BOUND: i64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// `Z(-d)`: rank one with form `-d`.
    ScaledLine { d: u64 },
    /// `U`
    Hyperbolic,
    /// `E8(-1)`
    E8Negative,
}

impl BlockKind {
    pub fn rank(self) -> usize {
        match self {
            BlockKind::ScaledLine { .. } => 1,
            BlockKind::Hyperbolic => 2,
            BlockKind::E8Negative => 8,
        }
    }
}

/// An orthogonal summand occupying coordinates `offset..offset + kind.rank()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
}

/// A nondegenerate integral lattice with a fixed basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramLattice<T> {
    label: String,
    gram: Matrix<T>,
    blocks: Vec<Block>,
    degree: Option<u64>,
}

impl<T: Scalar> GramLattice<T> {
    /// Validates squareness, symmetry and nondegeneracy.
    pub fn new(label: impl Into<String>, rows: &[Vec<T>]) -> Result<Self, LatticeError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(LatticeError::NotSymmetric);
        }
        let gram = Matrix::from_rows(rows, n);
        if !gram.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        if gram.det().is_zero() {
            return Err(LatticeError::Degenerate);
        }
        Ok(GramLattice {
            label: label.into(),
            gram,
            blocks: Vec::new(),
            degree: None,
        })
    }

    fn from_block(label: &str, kind: BlockKind, rows: Vec<Vec<i64>>) -> Self {
        let n = rows.len();
        let rows: Vec<Vec<T>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(T::from_int).collect())
            .collect();
        GramLattice {
            label: label.to_string(),
            gram: Matrix::from_rows(&rows, n),
            blocks: vec![Block { kind, offset: 0 }],
            degree: None,
        }
    }

    /// The hyperbolic plane `U`, Gram `[[0,1],[1,0]]`.
    pub fn hyperbolic() -> Self {
        Self::from_block("U", BlockKind::Hyperbolic, vec![vec![0, 1], vec![1, 0]])
    }

    /// `E8(-1)`: diagonal `-2`, `+1` on Dynkin-adjacent pairs.
    pub fn e8_negative() -> Self {
        let mut g = vec![vec![0i64; 8]; 8];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = -2;
        }
        for &(a, b) in E8_EDGES.iter() {
            g[a - 1][b - 1] = 1;
            g[b - 1][a - 1] = 1;
        }
        Self::from_block("E8(-1)", BlockKind::E8Negative, g)
    }

    /// `Z(-d)`.
    pub fn scaled_line(d: u64) -> Self {
        Self::from_block(&format!("Z(-{d})"), BlockKind::ScaledLine { d }, vec![vec![-(d as i64)]])
    }

    /// `Λ_d = Z(-d) ⊕ U ⊕ U ⊕ E8(-1) ⊕ E8(-1)` for even `d >= 2`.
    pub fn lambda(d: i64) -> Result<Self, LatticeError> {
        if d < 2 || d % 2 != 0 {
            return Err(LatticeError::InvalidDegree(d));
        }
        let (u, e8) = (Self::hyperbolic(), Self::e8_negative());
        let mut l = Self::direct_sum(
            format!("Lambda_{d}"),
            &[&Self::scaled_line(d as u64), &u, &u, &e8, &e8],
        );
        l.degree = Some(d as u64);
        Ok(l)
    }

    /// Orthogonal direct sum, blocks laid out in argument order.
    pub fn direct_sum(label: impl Into<String>, parts: &[&GramLattice<T>]) -> Self {
        let n: usize = parts.iter().map(|p| p.rank()).sum();
        let mut gram = Matrix::zeros(n, n);
        let mut blocks = Vec::new();
        let mut offset = 0;
        for part in parts {
            let r = part.rank();
            for i in 0..r {
                for j in 0..r {
                    gram[(offset + i, offset + j)] = part.gram[(i, j)].clone();
                }
            }
            blocks.extend(part.blocks.iter().map(|b| Block {
                kind: b.kind,
                offset: b.offset + offset,
            }));
            offset += r;
        }
        GramLattice {
            label: label.into(),
            gram,
            blocks,
            degree: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// `Some(d)` for lattices built by [`GramLattice::lambda`].
    pub fn degree(&self) -> Option<u64> {
        self.degree
    }

    pub fn det(&self) -> T {
        self.gram.det()
    }

    /// Every diagonal entry even, hence `(v,v)` even for all `v`.
    pub fn is_even(&self) -> bool {
        let two = T::from_int(2);
        (0..self.rank()).all(|i| self.gram[(i, i)].is_multiple_of(&two))
    }

    fn check(&self, v: &[impl Sized]) -> Result<(), LatticeError> {
        if v.len() == self.rank() {
            Ok(())
        } else {
            Err(LatticeError::RankMismatch {
                expected: self.rank(),
                found: v.len(),
            })
        }
    }

    /// `x^T G y`.
    pub fn inner(&self, x: &[T], y: &[T]) -> Result<T, LatticeError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.inner_unchecked(x, y))
    }

    pub(crate) fn inner_unchecked(&self, x: &[T], y: &[T]) -> T {
        let gy = self.gram.mul_vec(y);
        x.iter()
            .zip(&gy)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    pub fn norm(&self, v: &[T]) -> Result<T, LatticeError> {
        self.inner(v, v)
    }

    pub fn inner_rational(&self, x: &[Rational<T>], y: &[Rational<T>]) -> Result<Rational<T>, LatticeError> {
        self.check(x)?;
        self.check(y)?;
        let n = self.rank();
        let mut acc = Ratio::from_integer(T::zero());
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                let g = &self.gram[(i, j)];
                if g.is_zero() || y[j].is_zero() {
                    continue;
                }
                acc = acc + x[i].clone() * y[j].clone() * Ratio::from_integer(g.clone());
            }
        }
        Ok(acc)
    }

    /// `G v`: the row of pairings `(v, e_i)` with the basis vectors.
    pub fn pairing_row(&self, v: &[T]) -> Result<Vec<T>, LatticeError> {
        self.check(v)?;
        Ok(self.gram.mul_vec(v))
    }

    /// `(n_plus, n_minus)` by exact symmetric Gaussian elimination over Q.
    pub fn signature(&self) -> (usize, usize) {
        let (pos, neg, zero) = rational_inertia(&self.gram);
        debug_assert_eq!(zero, 0, "nondegenerate by construction");
        (pos, neg)
    }

    pub fn unit(&self, i: usize) -> Vec<T> {
        let mut v = vec![T::zero(); self.rank()];
        v[i] = T::one();
        v
    }

    /// Norm `-2` vectors in canonical search order: the simple roots of each
    /// `E8(-1)` block, then `e - f` of each `U` block.
    pub fn root_candidates(&self) -> Vec<Vec<T>> {
        let mut out = Vec::new();
        for b in self.blocks.iter().filter(|b| b.kind == BlockKind::E8Negative) {
            out.extend((0..8).map(|i| self.unit(b.offset + i)));
        }
        for b in self.blocks.iter().filter(|b| b.kind == BlockKind::Hyperbolic) {
            let mut v = vec![T::zero(); self.rank()];
            v[b.offset] = T::one();
            v[b.offset + 1] = -T::one();
            out.push(v);
        }
        out
    }

    /// First norm `-2` vector accepted by `accept`.
    ///
    /// Searches [`root_candidates`](Self::root_candidates) first, then
    /// combinations `a*r_i + b*r_j` of two candidates with
    /// `0 < |a|, |b| <= 3`.
    pub fn find_norm_minus2<F>(&self, mut accept: F) -> Result<Vec<T>, LatticeError>
    where
        F: FnMut(&[T]) -> bool,
    {
        let roots = self.root_candidates();
        if let Some(r) = roots.iter().find(|r| accept(r)) {
            return Ok(r.clone());
        }
        let minus_two = T::from_int(-2);
        let coeffs: Vec<i64> = (-ROOT_COMBINATION_BOUND..=ROOT_COMBINATION_BOUND)
            .filter(|&c| c != 0)
            .collect();
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                for &a in &coeffs {
                    for &b in &coeffs {
                        let (a, b) = (T::from_int(a), T::from_int(b));
                        let v: Vec<T> = roots[i]
                            .iter()
                            .zip(&roots[j])
                            .map(|(x, y)| a.clone() * x.clone() + b.clone() * y.clone())
                            .collect();
                        if self.inner_unchecked(&v, &v) == minus_two && accept(&v) {
                            return Ok(v);
                        }
                    }
                }
            }
        }
        Err(LatticeError::NotFound)
    }

    /// First pair of root candidates with zero pairing.
    pub fn find_orthogonal_root_pair(&self) -> Result<(Vec<T>, Vec<T>), LatticeError> {
        let roots = self.root_candidates();
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if self.inner_unchecked(&roots[i], &roots[j]).is_zero() {
                    return Ok((roots[i].clone(), roots[j].clone()));
                }
            }
        }
        Err(LatticeError::NotFound)
    }
}

/// Counts of positive, negative and zero pivots of a symmetric matrix under
/// congruence diagonalization over Q.
pub fn rational_inertia<T: Scalar>(m: &Matrix<T>) -> (usize, usize, usize) {
    let n = m.nrows();
    let mut a: Vec<Vec<Rational<T>>> = (0..n)
        .map(|i| m.row(i).iter().map(|x| Ratio::from_integer(x.clone())).collect())
        .collect();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                a.swap(i, k);
                for row in a.iter_mut() {
                    row.swap(i, k);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !a[k][j].is_zero()) {
                // row_k += row_j, col_k += col_j makes a[k][k] = 2 a[k][j]
                for c in 0..n {
                    let v = a[k][c].clone() + a[j][c].clone();
                    a[k][c] = v;
                }
                for row in a.iter_mut() {
                    let v = row[k].clone() + row[j].clone();
                    row[k] = v;
                }
            } else {
                zero += 1;
                continue;
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].clone() / pivot.clone();
            for c in k..n {
                let v = a[i][c].clone() - f.clone() * a[k][c].clone();
                a[i][c] = v;
            }
            for row in a.iter_mut().skip(k) {
                let v = row[i].clone() - f.clone() * row[k].clone();
                row[i] = v;
            }
        }
    }
    (pos, neg, zero)
}
