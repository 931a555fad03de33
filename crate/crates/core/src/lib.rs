//! Exact lattice toolkit for the polarized K3 lattice
//! `Λ_d = Z(-d) ⊕ U ⊕ U ⊕ E8(-1) ⊕ E8(-1)`.
//!
//! * [`modp`]: the prime field, Legendre symbols, square roots and the
//!   residue lemma solver.
//! * [`matrix`] and [`lattice`]: Gram lattices, Hermite normal form,
//!   integer kernels and saturation.
//! * [`plane`]: rational planes, discriminants and the predicate
//!   "discriminant is a nonzero square mod p".
//! * [`perturb`]: the four-step perturbation engine with replayable
//!   certificates.
//!
//! Everything is generic over an exact integer [`Scalar`]; the aliases
//! below fix the common choices.

pub mod json;
pub mod lattice;
pub mod matrix;
pub mod modp;
pub mod perturb;
pub mod plane;
pub mod sampling;
pub mod scalar;

pub use lattice::{Block, BlockKind, GramLattice, LatticeError};
pub use matrix::{hnf, integer_kernel, primitivize, saturate, Hnf, Matrix};
pub use modp::{solve_residue_lemma, Legendre, ModP, ModPError, Prime};
pub use perturb::{
    make_property_r, verify_certificate, Budget, PerturbCertificate, PerturbError, PerturbStep, Residues,
    StepKind, Verification,
};
pub use plane::{DiscClass, Plane, PlaneError, Target};
pub use scalar::{Rational, Scalar};

pub use num_bigint::BigInt;

/// Arbitrary-precision lattice, the default for the engine.
pub type Lattice = GramLattice<BigInt>;
pub type LatticePlane = Plane<BigInt>;
pub type Certificate = PerturbCertificate<BigInt>;
pub type BigRational = Rational<BigInt>;

pub type Lattice128 = GramLattice<i128>;
pub type Plane128 = Plane<i128>;

pub type Lattice64 = GramLattice<i64>;
pub type Plane64 = Plane<i64>;
