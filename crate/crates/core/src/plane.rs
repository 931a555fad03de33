//! Rational 2-planes in `L ⊗ Q` and the discriminant-square predicate.

use std::sync::Arc;

use num_rational::Ratio;
use thiserror::Error;

use crate::lattice::{GramLattice, LatticeError};
use crate::matrix::{canonical_basis, integer_kernel, primitivize, primitivize_int, saturate_int, Matrix};
use crate::modp::{Legendre, ModP, Prime};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaneError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("basis vectors are linearly dependent")]
    Dependent,
    #[error("first basis vector is isotropic")]
    DegenerateFirstVector,
    #[error("basis is not orthogonal")]
    NotDiagonal,
    #[error("norm of a basis vector vanishes mod {0}")]
    NonInvertibleDenominator(u64),
}

/// Which basis vector of a plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Omega1,
    Omega2,
}

/// Gram determinant of an ordered pair: `(x,x)(y,y) - (x,y)^2`.
pub fn pair_disc<T: Scalar>(l: &GramLattice<T>, x: &[T], y: &[T]) -> Result<T, LatticeError> {
    let (a, b, c) = (l.inner(x, x)?, l.inner(x, y)?, l.inner(y, y)?);
    Ok(a * c - b.clone() * b)
}

/// Discriminant together with its class mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscClass<T> {
    pub disc: T,
    pub residue: ModP,
    pub legendre: Legendre,
}

impl<T: Scalar> DiscClass<T> {
    pub fn new(disc: T, p: Prime) -> Self {
        let residue = p.reduce(&disc);
        DiscClass {
            disc,
            residue,
            legendre: residue.legendre(),
        }
    }

    pub fn is_nonzero_square(&self) -> bool {
        self.legendre == Legendre::Residue
    }

    /// Canonical square root of the residue when it is a square.
    pub fn sqrt(&self) -> Option<ModP> {
        self.residue.sqrt().ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyR<T> {
    pub holds: bool,
    pub class: DiscClass<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralPropertyR<T> {
    pub holds: bool,
    pub class: DiscClass<T>,
    /// Canonical Z-basis of `H ∩ L`.
    pub basis: [Vec<T>; 2],
}

/// A 2-plane spanned by two primitive integer vectors of a common lattice.
///
/// The spanned subspace is the meaningful object; constructors normalize
/// each basis vector to its primitive positive multiple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane<T> {
    lattice: Arc<GramLattice<T>>,
    omega1: Vec<T>,
    omega2: Vec<T>,
}

impl<T: Scalar> Plane<T> {
    pub fn new(lattice: Arc<GramLattice<T>>, omega1: Vec<T>, omega2: Vec<T>) -> Result<Self, PlaneError> {
        for v in [&omega1, &omega2] {
            if v.len() != lattice.rank() {
                return Err(LatticeError::RankMismatch {
                    expected: lattice.rank(),
                    found: v.len(),
                }
                .into());
            }
        }
        let omega1 = primitivize_int(&omega1).ok_or(PlaneError::Dependent)?;
        let omega2 = primitivize_int(&omega2).ok_or(PlaneError::Dependent)?;
        if !independent(&omega1, &omega2) {
            return Err(PlaneError::Dependent);
        }
        Ok(Plane { lattice, omega1, omega2 })
    }

    pub fn from_rational(
        lattice: Arc<GramLattice<T>>,
        omega1: &[Rational<T>],
        omega2: &[Rational<T>],
    ) -> Result<Self, PlaneError> {
        let w1 = primitivize(omega1).ok_or(PlaneError::Dependent)?;
        let w2 = primitivize(omega2).ok_or(PlaneError::Dependent)?;
        Self::new(lattice, w1, w2)
    }

    pub fn lattice(&self) -> &Arc<GramLattice<T>> {
        &self.lattice
    }

    pub fn omega1(&self) -> &[T] {
        &self.omega1
    }

    pub fn omega2(&self) -> &[T] {
        &self.omega2
    }

    pub fn vector(&self, t: Target) -> &[T] {
        match t {
            Target::Omega1 => &self.omega1,
            Target::Omega2 => &self.omega2,
        }
    }

    /// Replace one basis vector.
    pub fn with_vector(&self, t: Target, v: Vec<T>) -> Result<Self, PlaneError> {
        match t {
            Target::Omega1 => Self::new(self.lattice.clone(), v, self.omega2.clone()),
            Target::Omega2 => Self::new(self.lattice.clone(), self.omega1.clone(), v),
        }
    }

    fn ip(&self, x: &[T], y: &[T]) -> T {
        self.lattice.inner_unchecked(x, y)
    }

    /// `(ω1, ω1)`
    pub fn norm1(&self) -> T {
        self.ip(&self.omega1, &self.omega1)
    }

    /// `(ω2, ω2)`
    pub fn norm2(&self) -> T {
        self.ip(&self.omega2, &self.omega2)
    }

    /// `(ω1, ω2)`
    pub fn pairing(&self) -> T {
        self.ip(&self.omega1, &self.omega2)
    }

    /// Pairings of `v` with `ω1` and `ω2`.
    pub fn pairings_with(&self, v: &[T]) -> Result<(T, T), LatticeError> {
        Ok((self.lattice.inner(&self.omega1, v)?, self.lattice.inner(&self.omega2, v)?))
    }

    /// `(ω1,ω1)(ω2,ω2) - (ω1,ω2)^2`.
    pub fn disc(&self) -> T {
        let b = self.pairing();
        self.norm1() * self.norm2() - b.clone() * b
    }

    pub fn disc_class(&self, p: Prime) -> DiscClass<T> {
        DiscClass::new(self.disc(), p)
    }

    /// Discriminant of the stored basis is a nonzero square mod `p`.
    pub fn property_r(&self, p: Prime) -> PropertyR<T> {
        let class = self.disc_class(p);
        PropertyR {
            holds: class.is_nonzero_square(),
            class,
        }
    }

    /// Canonical Z-basis of `span_Q(ω1, ω2) ∩ L`.
    pub fn saturated_basis(&self) -> [Vec<T>; 2] {
        let mut b = saturate_int(&[self.omega1.clone(), self.omega2.clone()], self.lattice.rank())
            .expect("plane basis is independent");
        let second = b.pop().expect("rank two");
        let first = b.pop().expect("rank two");
        [first, second]
    }

    /// The same predicate evaluated on a Z-basis of `H ∩ L`.
    pub fn property_r_integral(&self, p: Prime) -> IntegralPropertyR<T> {
        let basis = self.saturated_basis();
        let disc = pair_disc(&self.lattice, &basis[0], &basis[1]).expect("rank checked");
        let class = DiscClass::new(disc, p);
        IntegralPropertyR {
            holds: class.is_nonzero_square(),
            class,
            basis,
        }
    }

    /// Whether `v` lies in the rational span of the plane.
    pub fn contains(&self, v: &[T]) -> bool {
        v.len() == self.lattice.rank()
            && Matrix::from_rows(&[self.omega1.clone(), self.omega2.clone(), v.to_vec()], v.len()).rank() == 2
    }

    pub fn same_span(&self, other: &Plane<T>) -> bool {
        self.contains(&other.omega1) && self.contains(&other.omega2)
    }

    /// Replace `ω2` by the primitive positive multiple of
    /// `ω2 - ((ω1,ω2)/(ω1,ω1)) ω1`. The span is unchanged.
    pub fn diagonalize(&self) -> Result<Self, PlaneError> {
        let n11 = self.norm1();
        if n11.is_zero() {
            return Err(PlaneError::DegenerateFirstVector);
        }
        let n12 = self.pairing();
        let sign = n11.signum();
        let v: Vec<T> = self
            .omega1
            .iter()
            .zip(&self.omega2)
            .map(|(a, b)| sign.clone() * (n11.clone() * b.clone() - n12.clone() * a.clone()))
            .collect();
        self.with_vector(Target::Omega2, v)
    }

    /// Canonical basis of `{ v in L : (v, ω1) = (v, ω2) = 0 }`.
    pub fn orth_complement(&self) -> Vec<Vec<T>> {
        let n = self.lattice.rank();
        let rows = vec![
            self.lattice.pairing_row(&self.omega1).expect("rank checked"),
            self.lattice.pairing_row(&self.omega2).expect("rank checked"),
        ];
        let kernel = integer_kernel(&Matrix::from_rows(&rows, n));
        canonical_basis(&kernel, n)
    }

    /// `(δ,δ) - (ω1,δ)^2/(ω1,ω1) - (ω2,δ)^2/(ω2,ω2)` mod `p`, the norm of the
    /// component of `δ` orthogonal to an orthogonal basis.
    pub fn projection_residual_norm(&self, delta: &[T], p: Prime) -> Result<ModP, PlaneError> {
        if !self.pairing().is_zero() {
            return Err(PlaneError::NotDiagonal);
        }
        let n1 = p.reduce(&self.norm1());
        let n2 = p.reduce(&self.norm2());
        if n1.is_zero() || n2.is_zero() {
            return Err(PlaneError::NonInvertibleDenominator(p.get()));
        }
        let (a, b) = self.pairings_with(delta)?;
        let (a, b) = (p.reduce(&a), p.reduce(&b));
        let dd = p.reduce(&self.lattice.inner(delta, delta)?);
        let inv1 = n1.inverse().expect("nonzero");
        let inv2 = n2.inverse().expect("nonzero");
        Ok(dd - a * a * inv1 - b * b * inv2)
    }

    /// Exact orthogonal residual `δ - Σ (ω_i,δ)/(ω_i,ω_i) ω_i` for an
    /// orthogonal basis with anisotropic vectors.
    pub fn orthogonal_residual(&self, delta: &[T]) -> Result<Vec<Rational<T>>, PlaneError> {
        if !self.pairing().is_zero() {
            return Err(PlaneError::NotDiagonal);
        }
        let (n1, n2) = (self.norm1(), self.norm2());
        if n1.is_zero() || n2.is_zero() {
            return Err(PlaneError::DegenerateFirstVector);
        }
        let (a, b) = self.pairings_with(delta)?;
        let c1 = Ratio::new(a, n1);
        let c2 = Ratio::new(b, n2);
        Ok(delta
            .iter()
            .zip(self.omega1.iter().zip(&self.omega2))
            .map(|(d, (w1, w2))| {
                Ratio::from_integer(d.clone())
                    - c1.clone() * Ratio::from_integer(w1.clone())
                    - c2.clone() * Ratio::from_integer(w2.clone())
            })
            .collect())
    }

    /// The restricted form on the plane is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.norm1().is_positive() && self.disc().is_positive()
    }
}

fn independent<T: Scalar>(x: &[T], y: &[T]) -> bool {
    let n = x.len();
    (0..n).any(|i| {
        (i + 1..n).any(|j| x[i].clone() * y[j].clone() != x[j].clone() * y[i].clone())
    })
}
