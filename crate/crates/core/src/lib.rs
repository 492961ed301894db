//! Exact arithmetic for the method of maximal singularities.
//!
//! The crate models the numerical shadow of the classical approach to
//! birational rigidity: plane Cremona data and Noether's factorization,
//! resolution graphs of discrete valuations with the counting-multiplicities
//! bound, the lattice action of the untwisting involution of a singular
//! quartic, and the intersection arithmetic used to exclude maximal cycles.
//!
//! All quantities are exact: integers are [`num_bigint::BigInt`] and every
//! ratio is a [`num_rational::BigRational`] in lowest terms. Nothing is ever
//! approximated in floating point.
//!
//! Indices of base points and of resolution vertices are 1-based throughout,
//! matching the usual notation `ν₁, …, ν_N` and `B₀ ⊂ X₀, E₁ ⊂ X₁, …`.

pub mod bound;
pub mod cremona;
pub mod error;
pub mod exact;
pub mod oracle;
pub mod picard;
pub mod surface;
pub mod valuation;
pub mod verdict;

pub use error::{Error, Result};
pub use verdict::Verdict;
