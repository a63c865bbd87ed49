//! p-adic measures on class group towers: distribution relations,
//! cyclotomic twists, pushforwards through norm maps, Iwasawa power
//! series with certified Weierstrass data, and the volume constants
//! entering the interpolation formula.

mod certificate;
mod gamma;
mod measure;
mod series;
mod tower;

pub use certificate::{
    nonvanishing_certificate, ComponentCertificate, NonvanishingCertificate, ScanRecord,
};
pub use gamma::{gamma_constant, gl_order, IdealFactorization};
pub use measure::{
    check_distribution_relation, manin_relation_check, CharacterIntegral, DistributionReport,
    DistributionWitness, FiniteLevelMeasure, ManinReport, ManinWitness, MeasureFile,
    MeasureLevelFile, MeasureTower, NormalizationMode,
};
pub use series::{
    omega_component_of, omega_split_to_series, weierstrass_invariants, PowerSeriesTrunc,
    WeierstrassOutcome,
};
pub use tower::{product_tower, ClassGroupTower, TowerFile, TowerLevel};

use crate::exactnum::ExactNumError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IwasawaError {
    #[error("{p} is not prime")]
    NotPrime { p: u64 },
    #[error("tower needs {expected} levels, found {found}")]
    MissingLevels { expected: usize, found: usize },
    #[error("malformed level {beta}: {detail}")]
    LevelShape { beta: u32, detail: String },
    #[error("towers do not match: {0}")]
    TowerMismatch(String),
    #[error("working precision mismatch: {left} vs {right}")]
    PrecisionMismatch { left: u32, right: u32 },
    #[error("residue characteristic mismatch: {left} vs {right}")]
    MixedPrime { left: u64, right: u64 },
    #[error("measure carries no critical exponent tag")]
    MissingExponent,
    #[error("distribution relation fails at level {beta}, element {index}")]
    DistributionFailure { beta: u32, index: usize },
    #[error("operation requires the rational tower")]
    NotRational,
    #[error("tower carries no norm data")]
    NormMissing,
    #[error("slope {slope} meets or exceeds working precision {prec}")]
    SlopeExceedsPrecision { slope: u32, prec: u32 },
    #[error("modulus {modulus} is not a power of the tower prime")]
    TwistModulus { modulus: u64 },
    #[error("conductor {modulus} exceeds the tower height {height}")]
    ConductorOverflow { modulus: u64, height: u32 },
    #[error("twist of order {order} does not embed in the truncated units")]
    WildTwist { order: u64 },
    #[error("series truncation {requested} exceeds the finite-level bound {bound}")]
    BadTruncation { requested: usize, bound: usize },
    #[error("omega component {m0} out of range for p = {p}")]
    OmegaComponent { m0: u32, p: u64 },
    #[error("{0}")]
    Unsupported(String),
    #[error("malformed measure file: {0}")]
    BadFile(String),
    #[error(transparent)]
    Num(#[from] ExactNumError),
}
