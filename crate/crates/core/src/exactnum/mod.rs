//! Exact number systems: p-adic truncations with explicit precision,
//! cyclotomic integers in the power basis (with an optional formal square
//! root of a residue cardinality), and finite-order characters with their
//! Gauss sums.
//!
//! Design constraints, shared by everything below:
//! - nothing floats: every certified value is a rational, a cyclotomic
//!   coordinate vector, or a residue at a stated precision;
//! - truncated p-adics always carry their precision; operations at mixed
//!   precision truncate to the smaller one rather than pretending;
//! - roots of unity of distinct conductors interoperate by promotion to
//!   the least common conductor, never by numeric approximation.

pub mod character;
pub mod cyclotomic;
pub mod padic;
pub mod padic_cyclotomic;

pub use character::{gauss_sum, FiniteCharacter, UnitGroup};
pub use cyclotomic::{cyclotomic_polynomial, euler_phi, CyclotomicElement};
pub use padic::{padic_valuation, rational_trunc, teichmuller, PadicTrunc};
pub use padic_cyclotomic::{
    embed_cyclotomic, embedding_convention, smallest_primitive_root, PadicCyclotomic,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactNumError {
    #[error("p-adic valuation of zero is undefined")]
    ZeroValuation,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("the Teichmuller lift requires an odd prime, got {0}")]
    EvenPrime(u64),
    #[error("cannot mix formal square roots of {0} and {1}")]
    MixedRadicands(u64, u64),
    #[error("conductor {small} does not divide {large}")]
    ConductorMismatch { small: u64, large: u64 },
    #[error("character mod {modulus} is imprimitive (conductor {conductor})")]
    ImprimitiveCharacter { modulus: u64, conductor: u64 },
    #[error("element is not a unit at p = {0}")]
    NotAUnit(u64),
    #[error("{0}")]
    Invalid(String),
}
