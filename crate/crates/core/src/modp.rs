//! Arithmetic in the prime field `Z/p` for small odd primes.
//!
//! Residues are plain `u64` values below a modulus that is itself below
//! 2^31, so every product fits without widening.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Largest modulus accepted by [`Prime::new`].
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModPError {
    #[error("{0} is not an odd prime below 2^31")]
    NotOddPrime(u64),
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("{value} is not a square mod {modulus}")]
    NotASquare { value: u64, modulus: u64 },
    #[error("mixed moduli {left} and {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("residue lemma needs p >= 5, got {0}")]
    PrimeTooSmall(u64),
    #[error("residue lemma needs nonzero A and B")]
    ZeroCoefficient,
    #[error("no y makes A - B*y^2 a nonzero square mod {0}")]
    NoSolution(u64),
}

/// An odd prime modulus, checked by trial division.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, ModPError> {
        if is_odd_prime(p) {
            Ok(Prime(p))
        } else {
            Err(ModPError::NotOddPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Reduce an arbitrary exact integer into `[0, p)`.
    pub fn reduce<T: Scalar>(self, x: &T) -> ModP {
        let m = T::from_u64(self.0).expect("modulus fits the scalar type");
        let r = x.mod_floor(&m);
        ModP {
            value: r.to_u64().expect("reduced value fits u64"),
            p: self,
        }
    }

    /// Whether `p` divides `x`.
    pub fn divides<T: Scalar>(self, x: &T) -> bool {
        self.reduce(x).is_zero()
    }

    pub fn elem(self, value: u64) -> ModP {
        ModP {
            value: value % self.0,
            p: self,
        }
    }

    pub fn elem_i64(self, value: i64) -> ModP {
        ModP {
            value: value.rem_euclid(self.0 as i64) as u64,
            p: self,
        }
    }

    /// Every element of the field in canonical order.
    pub fn elements(self) -> impl Iterator<Item = ModP> {
        (0..self.0).map(move |v| ModP { value: v, p: self })
    }
}

impl TryFrom<u64> for Prime {
    type Error = ModPError;
    fn try_from(p: u64) -> Result<Self, ModPError> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_odd_prime(p: u64) -> bool {
    if !(3..MAX_MODULUS).contains(&p) || p % 2 == 0 {
        return false;
    }
    let mut q = 3;
    while q * q <= p {
        if p % q == 0 {
            return false;
        }
        q += 2;
    }
    true
}

/// Quadratic character of a residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Legendre {
    NonResidue,
    Zero,
    Residue,
}

impl Legendre {
    pub fn as_i8(self) -> i8 {
        match self {
            Legendre::NonResidue => -1,
            Legendre::Zero => 0,
            Legendre::Residue => 1,
        }
    }
}

impl From<Legendre> for i8 {
    fn from(l: Legendre) -> i8 {
        l.as_i8()
    }
}

impl TryFrom<i8> for Legendre {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            -1 => Ok(Legendre::NonResidue),
            0 => Ok(Legendre::Zero),
            1 => Ok(Legendre::Residue),
            _ => Err(format!("legendre symbol must be -1, 0 or 1, got {v}")),
        }
    }
}

/// An element of `Z/p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModP {
    value: u64,
    p: Prime,
}

impl ModP {
    /// Checks that `modulus` is an odd prime.
    pub fn new(value: u64, modulus: u64) -> Result<Self, ModPError> {
        Ok(Prime::new(modulus)?.elem(value))
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.p.0
    }

    pub fn prime(self) -> Prime {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: ModP) -> Result<(), ModPError> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(ModPError::ModulusMismatch {
                left: self.p.0,
                right: other.p.0,
            })
        }
    }

    pub fn checked_add(self, other: ModP) -> Result<ModP, ModPError> {
        self.same_field(other)?;
        Ok(self.p.elem(self.value + other.value))
    }

    pub fn checked_sub(self, other: ModP) -> Result<ModP, ModPError> {
        self.same_field(other)?;
        Ok(self.p.elem(self.value + self.p.0 - other.value))
    }

    pub fn checked_mul(self, other: ModP) -> Result<ModP, ModPError> {
        self.same_field(other)?;
        Ok(self.p.elem(self.value * other.value))
    }

    pub fn checked_div(self, other: ModP) -> Result<ModP, ModPError> {
        self.same_field(other)?;
        Ok(self * other.inverse()?)
    }

    pub fn pow(self, mut e: u64) -> ModP {
        let mut base = self.value;
        let mut acc = 1 % self.p.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p.0;
            }
            base = base * base % self.p.0;
            e >>= 1;
        }
        ModP {
            value: acc,
            p: self.p,
        }
    }

    pub fn inverse(self) -> Result<ModP, ModPError> {
        if self.is_zero() {
            return Err(ModPError::ZeroInverse);
        }
        let e = (self.value as i64).extended_gcd(&(self.p.0 as i64));
        Ok(self.p.elem_i64(e.x))
    }

    /// Euler's criterion.
    pub fn legendre(self) -> Legendre {
        if self.is_zero() {
            return Legendre::Zero;
        }
        if self.pow((self.p.0 - 1) / 2).value == 1 {
            Legendre::Residue
        } else {
            Legendre::NonResidue
        }
    }

    pub fn is_nonzero_square(self) -> bool {
        self.legendre() == Legendre::Residue
    }

    /// The smaller of the two square roots, found by exhaustive search.
    pub fn sqrt(self) -> Result<ModP, ModPError> {
        if self.legendre() == Legendre::NonResidue {
            return Err(ModPError::NotASquare {
                value: self.value,
                modulus: self.p.0,
            });
        }
        (0..=self.p.0 / 2)
            .find(|r| r * r % self.p.0 == self.value)
            .map(|r| self.p.elem(r))
            .ok_or(ModPError::NotASquare {
                value: self.value,
                modulus: self.p.0,
            })
    }
}

macro_rules! field_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr for ModP {
            type Output = ModP;
            /// Panics when the moduli differ; use the `checked_` form to get an error.
            fn $method(self, rhs: ModP) -> ModP {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

field_op!(Add, add, checked_add);
field_op!(Sub, sub, checked_sub);
field_op!(Mul, mul, checked_mul);

impl Neg for ModP {
    type Output = ModP;
    fn neg(self) -> ModP {
        self.p.elem(self.p.0 - self.value)
    }
}

impl fmt::Display for ModP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.p.0)
    }
}

/// Find the smallest `y` in `[0, p)` with `A - B*y^2` a nonzero square.
///
/// Returns `(y, A - B*y^2)`. When `A` is already a nonzero square the answer
/// is `y = 0`.
pub fn solve_residue_lemma(a: ModP, b: ModP) -> Result<(ModP, ModP), ModPError> {
    a.same_field(b)?;
    let p = a.prime();
    if p.get() < 5 {
        return Err(ModPError::PrimeTooSmall(p.get()));
    }
    if a.is_zero() || b.is_zero() {
        return Err(ModPError::ZeroCoefficient);
    }
    p.elements()
        .map(|y| (y, a - b * y * y))
        .find(|(_, s)| s.is_nonzero_square())
        .ok_or(ModPError::NoSolution(p.get()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn primes_below(n: u64) -> Vec<Prime> {
        (3..n).filter_map(|q| Prime::new(q).ok()).collect()
    }

    fn square_table(p: Prime) -> Vec<bool> {
        let mut t = vec![false; p.get() as usize];
        for x in 1..p.get() {
            t[(x * x % p.get()) as usize] = true;
        }
        t
    }

    #[test]
    fn prime_construction() {
        assert!(Prime::new(23).is_ok());
        assert_eq!(Prime::new(2), Err(ModPError::NotOddPrime(2)));
        assert_eq!(Prime::new(21), Err(ModPError::NotOddPrime(21)));
        assert_eq!(Prime::new(1), Err(ModPError::NotOddPrime(1)));
        assert!(ModP::new(3, 9).is_err());
        assert_eq!(ModP::new(30, 23).unwrap().value(), 7);
    }

    #[test]
    fn inverse_examples() {
        let f = p(23);
        assert_eq!(f.elem(1).inverse().unwrap().value(), 1);
        assert_eq!(f.elem(2).inverse().unwrap().value(), 12);
        assert_eq!((f.elem(2) * f.elem(12)).value(), 1);
        assert_eq!(f.elem(22).inverse().unwrap().value(), 22);
        assert_eq!(f.elem(0).inverse(), Err(ModPError::ZeroInverse));
    }

    #[test]
    fn legendre_examples() {
        let f = p(23);
        assert_eq!(f.elem(0).legendre(), Legendre::Zero);
        assert_eq!(f.elem(4).legendre(), Legendre::Residue);
        assert_eq!(f.elem(5).legendre(), Legendre::NonResidue);
        let squares: Vec<u64> = (0..23)
            .filter(|&v| v > 0 && square_table(f)[v as usize])
            .collect();
        assert_eq!(squares, vec![1, 2, 3, 4, 6, 8, 9, 12, 13, 16, 18]);
    }

    #[test]
    fn sqrt_examples() {
        let f = p(23);
        assert_eq!(f.elem(0).sqrt().unwrap().value(), 0);
        assert_eq!(f.elem(4).sqrt().unwrap().value(), 2);
        assert_eq!(f.elem(2).sqrt().unwrap().value(), 5);
        assert!(matches!(f.elem(5).sqrt(), Err(ModPError::NotASquare { .. })));
    }

    #[test]
    fn residue_lemma_examples() {
        let f = p(23);
        let (y, s) = solve_residue_lemma(f.elem(4), f.elem(3)).unwrap();
        assert_eq!((y.value(), s.value()), (0, 4));
        let (y, s) = solve_residue_lemma(f.elem(5), f.elem(1)).unwrap();
        assert_eq!((y.value(), s.value()), (1, 4));
        let f5 = p(5);
        let (y, s) = solve_residue_lemma(f5.elem(2), f5.elem(2)).unwrap();
        assert_eq!((y.value(), s.value()), (2, 4));
    }

    #[test]
    fn residue_lemma_rejects_bad_input() {
        let f3 = p(3);
        assert_eq!(
            solve_residue_lemma(f3.elem(2), f3.elem(2)),
            Err(ModPError::PrimeTooSmall(3))
        );
        let f = p(23);
        assert_eq!(
            solve_residue_lemma(f.elem(0), f.elem(2)),
            Err(ModPError::ZeroCoefficient)
        );
        assert!(matches!(
            solve_residue_lemma(f.elem(1), p(29).elem(1)),
            Err(ModPError::ModulusMismatch { .. })
        ));
    }

    // Brute force over p = 3 confirms the exclusion is real.
    #[test]
    fn residue_lemma_fails_at_three() {
        let f3 = p(3);
        let found = f3
            .elements()
            .any(|y| (f3.elem(2) - f3.elem(2) * y * y).value() == 1);
        assert!(!found);
    }

    #[test]
    fn mixed_moduli_rejected() {
        let a = p(23).elem(3);
        let b = p(29).elem(3);
        assert!(a.checked_add(b).is_err());
        assert!(a.checked_mul(b).is_err());
        assert!(std::panic::catch_unwind(|| a + b).is_err());
    }

    #[test]
    fn legendre_matches_square_table() {
        for f in primes_below(200) {
            let table = square_table(f);
            for x in f.elements() {
                let expected = if x.is_zero() {
                    Legendre::Zero
                } else if table[x.value() as usize] {
                    Legendre::Residue
                } else {
                    Legendre::NonResidue
                };
                assert_eq!(x.legendre(), expected, "{x}");
            }
        }
    }

    #[test]
    fn residue_lemma_sweep_small_primes() {
        for f in primes_below(200).into_iter().filter(|q| q.get() >= 5) {
            let table = square_table(f);
            for a in f.elements().skip(1) {
                for b in f.elements().skip(1) {
                    let (y, s) = solve_residue_lemma(a, b).unwrap();
                    assert_eq!(s, a - b * y * y);
                    assert!(table[s.value() as usize] && !s.is_zero());
                    // smallest qualifying y
                    for z in 0..y.value() {
                        let t = a - b * f.elem(z) * f.elem(z);
                        assert!(t.is_zero() || !table[t.value() as usize]);
                    }
                }
            }
        }
    }

    // Case (2): B a nonsquare and A/B a nonsquare still admits a solution.
    #[test]
    fn residue_lemma_case_two() {
        for f in primes_below(200).into_iter().filter(|q| q.get() >= 5) {
            let table = square_table(f);
            for b in f.elements().skip(1).filter(|b| !table[b.value() as usize]) {
                for a in f.elements().skip(1) {
                    let ratio = a.checked_div(b).unwrap();
                    if table[ratio.value() as usize] {
                        continue;
                    }
                    let exists = f.elements().any(|y| {
                        let s = a - b * y * y;
                        !s.is_zero() && table[s.value() as usize]
                    });
                    assert!(exists, "p={f} a={a} b={b}");
                }
            }
        }
    }

    // Case (1) counting: with B a square, the values A - B*y^2 for
    // y in 0..=(p-1)/2 are pairwise distinct.
    #[test]
    fn residue_lemma_case_one_distinct_values() {
        for f in primes_below(100).into_iter().filter(|q| q.get() >= 5) {
            let table = square_table(f);
            for b in f.elements().skip(1).filter(|b| table[b.value() as usize]) {
                let a = f.elem(1);
                let mut vals: Vec<u64> = (0..=(f.get() - 1) / 2)
                    .map(|y| (a - b * f.elem(y) * f.elem(y)).value())
                    .collect();
                vals.sort_unstable();
                vals.dedup();
                assert_eq!(vals.len() as u64, (f.get() + 1) / 2);
            }
        }
    }

    proptest! {
        #[test]
        fn sqrt_of_square_is_a_root(idx in 0usize..40, x in 0u64..10_000) {
            let primes = primes_below(200);
            let f = primes[idx % primes.len()];
            let x = f.elem(x);
            let r = (x * x).sqrt().unwrap();
            prop_assert!(r == x || r == -x);
            prop_assert!(r.value() <= f.get() / 2);
        }

        #[test]
        fn inverse_round_trips(x in 1u64..1_000_000) {
            let f = Prime::new(1_000_003).unwrap();
            let x = f.elem(x);
            prop_assume!(!x.is_zero());
            prop_assert_eq!((x * x.inverse().unwrap()).value(), 1);
        }
    }
}
