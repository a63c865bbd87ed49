//! Weight-k symbol spaces for congruence levels, Hecke
//! eigenfunctionals, p-stabilization, and the measure towers they
//! induce on unit classes.
//!
//! The pipeline is: present the space by generators and relations,
//! cut out a one-dimensional eigenfunctional, stabilize it to the
//! level divisible by p, read off cusp-kernel values along the p-power
//! tower, and hand the result to the Iwasawa layer as a verified
//! measure. Twisted first-moment sums against a character stay on the
//! unstabilized symbol and remain exact cyclotomic numbers, which is
//! what the interpolation comparison checks against.

pub mod lfamily;
pub mod p1;
pub mod paths;
pub mod poly;
pub mod space;
pub mod symbol;

pub use lfamily::{
    birch_twisted_value, evaluation_vectors, interpolation_check,
    interpolation_check_with_unit, InterpolationReport, PadicLFamily,
};
pub use space::{build_space, SymbolSpace};
pub use symbol::{eigen_symbol, ordinary_stabilize, EigenSymbol, StabilizedSymbol};

use crate::exactnum::ExactNumError;
use crate::iwasawa::IwasawaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Gl2Error {
    #[error("level {level} is not a positive integer")]
    BadLevel { level: u64 },
    #[error("weight {weight} is below two")]
    WeightTooSmall { weight: u32 },
    #[error("weight {weight} is odd; only even weights have critical twists here")]
    OddWeight { weight: u32 },
    #[error("{p} is not prime")]
    NotPrime { p: u64 },
    #[error("p = {p} divides the level {level}")]
    LevelDivisibleByP { p: u64, level: u64 },
    #[error("p^prec overflows a machine word for p = {p}, prec = {prec}")]
    PrecisionOverflow { p: u64, prec: u32 },
    #[error("presentation at level {level}, weight {weight} has dimension {found}, expected {expected}")]
    DimensionMismatch { level: u64, weight: u32, expected: usize, found: usize },
    #[error("joint eigenspace has dimension {dim}, expected one")]
    AmbiguousEigenspace { dim: usize },
    #[error("operator at {ell} does not act as a scalar on the cut-out line")]
    NotAnEigenvector { ell: u64 },
    #[error("eigenvalue at {p} is not a rational integer")]
    NonIntegralEigenvalue { p: u64 },
    #[error("not ordinary at {p}: the p-th eigenvalue vanishes")]
    NotOrdinary { p: u64 },
    #[error("slope {slope} admits no finite-slope root at weight {weight}")]
    SlopeOutOfRange { slope: u32, weight: u32 },
    #[error("stabilized functional fails the U_p eigenvalue identity at generator {generator}")]
    StabilizationFailed { generator: usize },
    #[error("character of modulus {modulus} is not primitive")]
    NotPrimitive { modulus: u64 },
    #[error("character modulus {modulus} is not a power of the working prime")]
    BadTwistModulus { modulus: u64 },
    #[error("tower depth {beta} pushes the modulus past cusp arithmetic range")]
    TowerTooDeep { beta: u32 },
    #[error("towers {left} and {right} disagree under the cyclotomic twist")]
    ManinRelationFailed { left: usize, right: usize },
    #[error("exponent {j} is outside the critical range 0..={top}")]
    ExponentOutOfRange { j: usize, top: usize },
    #[error("character parity disagrees with the symbol sign for exponent {j}")]
    ParityMismatch { j: usize },
    #[error(transparent)]
    Num(#[from] ExactNumError),
    #[error(transparent)]
    Iwasawa(#[from] IwasawaError),
}
