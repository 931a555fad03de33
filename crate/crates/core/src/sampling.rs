//! Seeded random vectors and planes for sweeps and experiments.

use std::sync::Arc;

use rand::Rng;

use crate::lattice::GramLattice;
use crate::matrix::primitivize_int;
use crate::plane::Plane;
use crate::scalar::Scalar;

/// Default coordinate range for random planes: `[-10, 10]`.
pub const DEFAULT_ENTRY_BOUND: i64 = 10;

/// Uniform integer coordinates in `[-bound, bound]`.
pub fn random_vector<T: Scalar, R: Rng + ?Sized>(rank: usize, bound: i64, rng: &mut R) -> Vec<T> {
    (0..rank).map(|_| T::from_int(rng.gen_range(-bound..=bound))).collect()
}

/// A random nonzero vector divided by its content.
pub fn random_primitive_vector<T: Scalar, R: Rng + ?Sized>(rank: usize, bound: i64, rng: &mut R) -> Vec<T> {
    loop {
        if let Some(v) = primitivize_int(&random_vector::<T, R>(rank, bound, rng)) {
            return v;
        }
    }
}

/// A plane spanned by two random vectors, resampled until independent.
pub fn random_plane<T: Scalar, R: Rng + ?Sized>(lattice: &Arc<GramLattice<T>>, bound: i64, rng: &mut R) -> Plane<T> {
    let n = lattice.rank();
    loop {
        let a = random_vector(n, bound, rng);
        let b = random_vector(n, bound, rng);
        if let Ok(h) = Plane::new(lattice.clone(), a, b) {
            return h;
        }
    }
}
