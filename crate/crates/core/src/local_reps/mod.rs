//! Unramified local representation data at a prime above p.
//!
//! A local representation is carried entirely by its Satake parameters
//! (alpha_1, ..., alpha_2n) at a prime of residue cardinality q = p^f,
//! stored exactly: each parameter is a unit flag, an exact valuation,
//! and optionally an exact rational value. On top of that sit the
//! ordinarity tests (subset-sum and ordered-chain forms), regularity,
//! the induced principal-series model with its parahoric Hecke operator,
//! the coset decomposition that operator integrates over, and the
//! depth-beta congruence subgroup membership test.

use thiserror::Error;

use crate::weights::WeightError;

mod cosets;
mod induced;
mod lbeta;
mod ordinarity;
mod satake;

pub use cosets::{parahoric_cosets, CosetReport};
pub use induced::{
    central_element_check, iwasawa_decompose, jacquet_spectrum_check, schubert_tau, up_matrix,
    CentralReport, JacquetReport,
};
pub use lbeta::{l_beta_equivalence, l_beta_membership, LBetaReport};
pub use ordinarity::{
    b_ordinary_check, consistent_pairing_etas, ord_reg_shadow_check, pairing_exists,
    q_ordinary_achievers, q_ordinary_target, q_ordinary_tau, q_ordinary_tau_with_target,
    q_regular_check, sample_ordinarity_case, strip_doubled_bound, strip_holds, OrdinarityCase,
    ShadowOutcome,
};
pub use satake::{
    binomial, half_shift_exponent, poly_from_roots, prime_power, rat_pow, rational, rational_frac,
    subsets, tau_eigenvalue, tau_eigenvalues, up_charpoly, SatakeAlpha, SatakeFile, SatakeParams,
    TauSubset,
};

/// Errors from local representation data and its ordinarity machinery.
#[derive(Debug, Error)]
pub enum LocalRepsError {
    #[error("residue cardinality {q} is not a prime power")]
    NotPrimePower { q: u64 },
    #[error("expected {expected} Satake parameters, found {found}")]
    WrongAlphaCount { expected: usize, found: usize },
    #[error("Satake parameters must be nonzero")]
    ZeroAlpha,
    #[error("parameter {index}: declared valuation {declared}, value has valuation {actual}")]
    ValuationMismatch { index: usize, declared: i64, actual: i64 },
    #[error("operation needs exact parameter values, only valuations are stored")]
    ValuesRequired,
    #[error("subset {members:?} is not an n-element subset of 1..={}", 2 * n)]
    BadSubset { n: usize, members: Vec<usize> },
    #[error("bad parameter file: {0}")]
    BadFile(String),
    #[error("weight has half-rank {found}, parameters need {expected}")]
    WeightRank { expected: usize, found: usize },
    #[error("prime partition does not cover the weight's embeddings exactly once")]
    BadPartition,
    #[error("parameters live over p = {expected}, partition is at p = {found}")]
    PrimeMismatch { expected: u64, found: u64 },
    #[error("partition has no block {index}")]
    BlockIndex { index: usize },
    #[error("q = {q} over p = {p} needs {expected_f} embedding rows, block has {found_rows}")]
    ResidueDegree { q: u64, p: u64, expected_f: u32, found_rows: u32 },
    #[error(
        "subset {members:?} meets the valuation target but violates the strip at 2v = {doubled_bound}"
    )]
    StripViolation { members: Vec<usize>, doubled_bound: i64 },
    #[error("subsets {first:?} and {second:?} both meet the target under the strip hypothesis")]
    OrdinaryInconsistent { first: Vec<usize>, second: Vec<usize> },
    #[error("certified subset failed a consequence: {0}")]
    ShadowFailure(String),
    #[error("induced-model computation needs prime q, got {q}")]
    QMustBePrime { q: u64 },
    #[error("matrix is not invertible over the local field")]
    NotInvertible,
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
}
