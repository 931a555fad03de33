//! The exact integer scalar the lattice code is generic over.
//!
//! Every routine in this crate works over any signed integer type that
//! implements the `num-traits`/`num-integer` vocabulary. `BigInt` is the
//! default used by the CLI and the perturbation engine; the fixed-width
//! types are fine for small inputs but will overflow on long perturbation
//! chains with tiny epsilon.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

pub trait Scalar:
    Integer
    + Signed
    + Clone
    + Debug
    + Display
    + FromStr
    + FromPrimitive
    + ToPrimitive
    + Hash
    + Send
    + Sync
    + 'static
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("scalar type cannot represent a small integer")
    }
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + Debug
        + Display
        + FromStr
        + FromPrimitive
        + ToPrimitive
        + Hash
        + Send
        + Sync
        + 'static
{
}

/// Exact rational over the scalar `T`.
pub type Rational<T> = Ratio<T>;

/// Largest absolute coordinate.
pub fn sup_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|x| x.abs()).fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Non-negative gcd of all entries; zero for the zero vector.
pub fn content<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |g, x| g.gcd(x))
}

pub fn is_zero_vec<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Parse `"a"` or `"a/b"` into an exact rational.
pub fn parse_rational<T: Scalar>(s: &str) -> Option<Rational<T>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: T = n.trim().parse().ok()?;
            let d: T = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Ratio::new(n, d))
        }
        None => s.parse().ok().map(Ratio::from_integer),
    }
}

/// `"a"` for integers, `"a/b"` otherwise.
pub fn format_rational<T: Scalar>(r: &Rational<T>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer `>= r`.
pub fn ceil_rational<T: Scalar>(r: &Rational<T>) -> T {
    r.ceil().to_integer()
}
