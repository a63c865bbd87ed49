//! Algebraic representations of GL(2n) with distinguished integral structure.
//!
//! A dominant integral weight mu determines an irreducible representation,
//! realized here inside a tensor product of exterior powers of the standard
//! module twisted by a power of the determinant.  The module exposes:
//!
//! * an admissible Z-lattice generated from the lowest weight vector by
//!   divided powers of the raising generators,
//! * the torus-twisted bullet action of block-diagonal scaling elements,
//!   normalized so the lowest weight vector is fixed,
//! * the one-dimensional space of linear functionals kappa_j attached to
//!   each critical index j, normalized against xi times the lowest vector,
//! * congruence checks between distinct kappa functionals on the image of
//!   the lattice under xi and a scaling element,
//! * Lie-algebra level transversality checks for the twisted Levi pair.

mod congruence;
mod kappa;
mod rep;
mod tensor;
mod xi;

pub use congruence::{
    bullet_action, manin_congruence_auto, manin_congruence_check, BulletResult, CongruenceReport,
    CongruenceWitness, ManinOutcome, ParahoricFactorization,
};
pub use kappa::{kappa_j, KappaFunctional, KappaSolve};
pub use rep::{
    cached_rep, weyl_dimension, GeneratorDump, HighestWeightLattice, LatticeDump, SparseIntMat,
};
pub use xi::{
    transversality_check, transversality_check_corrupted, xi_conj_identities_hold,
    TransversalityReport, XiMatrix,
};

use crate::weights::WeightError;

/// Errors raised while building or using a highest weight lattice.
#[derive(Debug, thiserror::Error)]
pub enum HighestWeightError {
    #[error("rank 2n = {0} is not supported here; expected an even rank at most 4")]
    RankUnsupported(usize),
    #[error("weight {0:?} is rejected: {1}")]
    Weight(Vec<i64>, WeightError),
    #[error("{0} is not prime")]
    BadPrime(u64),
    #[error("representation dimension {dim} exceeds the bound {bound}")]
    DimensionTooLarge { dim: u64, bound: u64 },
    #[error("ambient tensor dimension {0} is too large to enumerate")]
    AmbientTooLarge(u64),
    #[error("vector has length {found}, expected {expected}")]
    VectorDimension { expected: usize, found: usize },
    #[error("vector is not p-integral with respect to the lattice")]
    VectorNotIntegral,
    #[error("vector does not lie in the representation subspace")]
    NotInRepresentation,
    #[error("group element is not invertible")]
    DegenerateGroupElement,
    #[error("parahoric factorization rejected: {0}")]
    NotInParahoric(String),
    #[error("index {j} is not critical for this weight")]
    NotCritical { j: i64 },
    #[error("functional space at j = {j} has dimension {dim}, expected 1")]
    KappaDimension { j: i64, dim: usize },
    #[error("kappa normalization vanishes at j = {j}")]
    KappaDegenerate { j: i64 },
    #[error("kappa at j = {j} takes a non integral value on the lattice")]
    KappaNotIntegral { j: i64 },
    #[error("fewer than two critical indices: nothing to compare")]
    NothingToCompare,
    #[error("serialized lattice is inconsistent: {0}")]
    BadDump(String),
}
