//! Exact-arithmetic machinery for p-adic L-functions of cohomological
//! automorphic representations, organized around the modular-symbol /
//! Iwasawa-measure construction for GL(2n) and its explicit GL(2)
//! instantiation.
//!
//! Everything here is exact: rationals, cyclotomic integers (with an
//! optional formal square root of the residue cardinality), and p-adic
//! numbers truncated at an explicit precision.  No floating point enters
//! any certified value; complex embeddings are provided for diagnostics
//! only.
//!
//! Module map:
//! - [`exactnum`]: p-adic truncations, cyclotomic arithmetic, finite
//!   characters and Gauss sums.
//! - [`weights`]: pure dominant weights, critical sets, prime partitions.
//! - [`highest_weight`]: highest-weight lattices for GL(2n), the twisted
//!   integral semigroup action, branching functionals and the congruence
//!   engine behind the Manin relations.
//! - [`local_reps`]: Satake parameters, parahoric Hecke combinatorics,
//!   ordinarity and regularity certificates.
//! - [`shalika_zeta`]: local zeta integrals of Shalika type against
//!   ramified twists, in closed form and by brute-force summation.
//! - [`iwasawa`]: finite-level measure towers, cyclotomic twists,
//!   power-series transport and non-vanishing certificates.
//! - [`gl2_symbols`]: classical weight-k modular symbols, ordinary
//!   stabilization, evaluation towers and interpolation checks.

pub mod exactnum;
pub mod gl2_symbols;
pub mod highest_weight;
pub mod iwasawa;
pub mod linalg;
pub mod local_reps;
pub mod par;
pub mod ring;
pub mod shalika_zeta;
pub mod weights;

pub use ring::{Ring, ZModPN, QQ};
