#![allow(dead_code)]

use std::sync::Arc;

use k3lat::{BigInt, GramLattice, LatticePlane, Prime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn lambda(d: i64) -> Arc<GramLattice<BigInt>> {
    Arc::new(GramLattice::lambda(d).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

pub fn unit(i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::from(0); 21];
    v[i] = BigInt::from(1);
    v
}

pub fn sparse(coords: &[(usize, i64)]) -> Vec<BigInt> {
    let mut v = vec![BigInt::from(0); 21];
    for &(i, c) in coords {
        v[i] = BigInt::from(c);
    }
    v
}

pub fn plane(d: i64, w1: Vec<BigInt>, w2: Vec<BigInt>) -> LatticePlane {
    LatticePlane::new(lambda(d), w1, w2).unwrap()
}
