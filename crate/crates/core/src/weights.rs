//! Dominant pure weights for GL(2n) over a totally real base, their
//! critical ranges, and the scaling a diagonal prime element induces on
//! the dual weight.
//!
//! A weight assigns one nonincreasing integer 2n-tuple to each archimedean
//! embedding. Purity requires entry i plus entry 2n+1-i to equal one
//! common integer w across all embeddings and positions; the critical
//! range is the interval between the largest (n+1)-st entry and the
//! smallest n-th entry over the embeddings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("row {row} has length {found}, expected {expected}")]
    BadShape { row: usize, expected: usize, found: usize },
    #[error("row {row} is not dominant at position {index}: {left} < {right}")]
    NotDominant { row: usize, index: usize, left: i64, right: i64 },
    #[error(
        "row {row} violates purity at position {index}: {found} != expected weight {expected}"
    )]
    NotPure { row: usize, index: usize, expected: i64, found: i64 },
    #[error("weight has an empty critical range [{lo_bound}, {hi_bound}]")]
    EmptyCritical { lo_bound: i64, hi_bound: i64 },
}

/// A dominant algebraic weight of GL(2n) given by one row per archimedean
/// embedding. Construction validates shape and dominance only; purity is
/// checked by `purity_weight`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureWeight {
    rows: Vec<Vec<i64>>,
}

/// The inclusive interval of critical positions of a pure weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritRange {
    pub lo: i64,
    pub hi: i64,
}

impl CritRange {
    pub fn contains(&self, j: i64) -> bool {
        self.lo <= j && j <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

impl PureWeight {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, WeightError> {
        assert!(!rows.is_empty(), "at least one embedding row required");
        let width = rows[0].len();
        assert!(width >= 2 && width % 2 == 0, "row length must be even and positive");
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(WeightError::BadShape {
                    row: r,
                    expected: width,
                    found: row.len(),
                });
            }
            for i in 0..width - 1 {
                if row[i] < row[i + 1] {
                    return Err(WeightError::NotDominant {
                        row: r,
                        index: i,
                        left: row[i],
                        right: row[i + 1],
                    });
                }
            }
        }
        Ok(PureWeight { rows })
    }

    /// Single-embedding constructor for the rational base field.
    pub fn rational(row: Vec<i64>) -> Result<Self, WeightError> {
        Self::new(vec![row])
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn embeddings(&self) -> usize {
        self.rows.len()
    }

    /// Half the matrix size: the weight belongs to GL(2n).
    pub fn half_rank(&self) -> usize {
        self.rows[0].len() / 2
    }

    /// The purity weight w with entry_i + entry_{2n+1-i} = w everywhere;
    /// the first violating position is reported otherwise.
    pub fn purity_weight(&self) -> Result<i64, WeightError> {
        let width = self.rows[0].len();
        let w = self.rows[0][0] + self.rows[0][width - 1];
        for (r, row) in self.rows.iter().enumerate() {
            for i in 0..width {
                let found = row[i] + row[width - 1 - i];
                if found != w {
                    return Err(WeightError::NotPure {
                        row: r,
                        index: i,
                        expected: w,
                        found,
                    });
                }
            }
        }
        Ok(w)
    }

    /// Critical positions [max over embeddings of entry n+1, min over
    /// embeddings of entry n]. Requires purity; errors when the interval
    /// is empty.
    pub fn crit_range(&self) -> Result<CritRange, WeightError> {
        self.purity_weight()?;
        let n = self.half_rank();
        let lo = self.rows.iter().map(|r| r[n]).max().expect("nonempty");
        let hi = self.rows.iter().map(|r| r[n - 1]).min().expect("nonempty");
        if hi < lo {
            return Err(WeightError::EmptyCritical { lo_bound: lo, hi_bound: hi });
        }
        Ok(CritRange { lo, hi })
    }

    /// The central position w/2 when w is even and central-critical;
    /// None for odd purity weight.
    pub fn center(&self) -> Result<Option<i64>, WeightError> {
        let w = self.purity_weight()?;
        if w.rem_euclid(2) != 0 {
            return Ok(None);
        }
        let crit = self.crit_range()?;
        let c = w / 2;
        Ok(crit.contains(c).then_some(c))
    }
}

/// Rank of the supported twist-parameter grid for GL(2n) over a field
/// with the given number of archimedean embeddings.
pub fn t_constant(embeddings: usize, n: usize) -> u64 {
    (embeddings as u64) * ((n * n + n - 1) as u64)
}

/// One prime above p: its inertia-degree block of embedding rows and the
/// chosen depth beta.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeBlock {
    pub beta: u32,
    pub embedding_rows: Vec<usize>,
}

/// The partition of archimedean embeddings by the primes above p, with a
/// depth per prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePartition {
    pub p: u64,
    pub blocks: Vec<PrimeBlock>,
}

impl PrimePartition {
    /// Every embedding row appears in exactly one block.
    pub fn validate(&self, embeddings: usize) -> bool {
        let mut seen = vec![false; embeddings];
        for b in &self.blocks {
            for &r in &b.embedding_rows {
                if r >= embeddings || seen[r] {
                    return false;
                }
                seen[r] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Exact scaling of the dual weight on the diagonal prime element: p
/// raised to minus the sum over blocks of beta times the lower half-sum
/// of the weight rows in the block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpScaling {
    pub p: u64,
    pub exponent: i64,
}

impl TpScaling {
    pub fn value(&self) -> BigRational {
        let pe = BigInt::from(self.p).pow(self.exponent.unsigned_abs() as u32);
        if self.exponent >= 0 {
            BigRational::from(pe)
        } else {
            BigRational::new(BigInt::one(), pe)
        }
    }
}

pub fn mu_vee_on_tp(mu: &PureWeight, partition: &PrimePartition) -> TpScaling {
    assert!(partition.validate(mu.embeddings()), "partition must cover embeddings");
    let n = mu.half_rank();
    let mut exponent = 0i64;
    for block in &partition.blocks {
        let lower_sum: i64 = block
            .embedding_rows
            .iter()
            .map(|&r| mu.rows()[r][n..].iter().sum::<i64>())
            .sum();
        exponent -= i64::from(block.beta) * lower_sum;
    }
    TpScaling { p: partition.p, exponent }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_block(p: u64, beta: u32) -> PrimePartition {
        PrimePartition { p, blocks: vec![PrimeBlock { beta, embedding_rows: vec![0] }] }
    }

    #[test]
    fn purity_and_crit_examples() {
        let mu = PureWeight::rational(vec![3, 1, 0, -2]).unwrap();
        assert_eq!(mu.purity_weight().unwrap(), 1);
        assert_eq!(mu.crit_range().unwrap(), CritRange { lo: 0, hi: 1 });
        assert_eq!(mu.center().unwrap(), None);

        let gl2 = PureWeight::rational(vec![10, 0]).unwrap();
        assert_eq!(gl2.purity_weight().unwrap(), 10);
        assert_eq!(gl2.crit_range().unwrap(), CritRange { lo: 0, hi: 10 });
        assert_eq!(gl2.center().unwrap(), Some(5));
    }

    #[test]
    fn violations_report_first_position() {
        assert_eq!(
            PureWeight::rational(vec![1, 0, 0, 1]).unwrap_err(),
            WeightError::NotDominant { row: 0, index: 2, left: 0, right: 1 }
        );
        let imp = PureWeight::rational(vec![5, 1, 0, -2]).unwrap();
        assert_eq!(
            imp.purity_weight().unwrap_err(),
            WeightError::NotPure { row: 0, index: 1, expected: 3, found: 1 }
        );
    }

    #[test]
    fn crit_range_over_two_embeddings() {
        // Two embeddings narrow the interval from both sides.
        let mu = PureWeight::new(vec![vec![4, 2, 1, -1], vec![5, 3, 0, -2]]).unwrap();
        assert_eq!(mu.purity_weight().unwrap(), 3);
        assert_eq!(mu.crit_range().unwrap(), CritRange { lo: 1, hi: 2 });
        // Purity pins entry n at or above the ceiling of w/2 and entry
        // n+1 at or below the floor, so a pure dominant weight can pinch
        // the range to the center but never empty it.
        let pinched =
            PureWeight::new(vec![vec![16, 9, 8, 1], vec![14, 8, 9, 3]]);
        assert!(pinched.is_err(), "a crossing middle pair already fails dominance");
        let center_only = PureWeight::new(vec![vec![16, 8, 8, 0], vec![12, 8, 8, 4]]).unwrap();
        assert_eq!(center_only.crit_range().unwrap(), CritRange { lo: 8, hi: 8 });
    }

    #[test]
    fn center_requires_even_weight() {
        let even = PureWeight::rational(vec![6, 4]).unwrap();
        assert_eq!(even.purity_weight().unwrap(), 10);
        assert_eq!(even.center().unwrap(), Some(5));
        let odd = PureWeight::rational(vec![2, 1]).unwrap();
        assert_eq!(odd.center().unwrap(), None);
    }

    #[test]
    fn t_constant_values() {
        assert_eq!(t_constant(1, 1), 1);
        assert_eq!(t_constant(1, 2), 5);
        assert_eq!(t_constant(3, 2), 15);
    }

    #[test]
    fn tp_scaling_examples() {
        // Lower half-sum of (6,4) is 4; depth 1 gives exponent -4.
        let gl2 = PureWeight::rational(vec![6, 4]).unwrap();
        assert_eq!(mu_vee_on_tp(&gl2, &single_block(5, 1)).exponent, -4);
        // Lower half-sum of (3,1,0,-2) is -2; depth 2 gives exponent +4.
        let gl4 = PureWeight::rational(vec![3, 1, 0, -2]).unwrap();
        let scale = mu_vee_on_tp(&gl4, &single_block(5, 2));
        assert_eq!(scale.exponent, 4);
        assert_eq!(scale.value(), BigRational::from(BigInt::from(625)));
    }

    #[test]
    fn crit_symmetry_under_purity_reflection() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3usize);
            let w: i64 = rng.gen_range(-6..12);
            // Build a pure dominant row: choose the upper half descending
            // and reflect.
            let mut upper: Vec<i64> = (0..n).map(|_| rng.gen_range(-10..10)).collect();
            upper.sort_unstable_by(|a, b| b.cmp(a));
            // Push the upper half above w/2 so that reflection keeps
            // dominance.
            let shift = (w - 2 * upper[n - 1]).max(0).div_euclid(2) + upper[n - 1].abs() + 6;
            let upper: Vec<i64> = upper.into_iter().map(|x| x + shift).collect();
            let mut row = upper.clone();
            row.extend(upper.iter().rev().map(|x| w - x));
            let Ok(mu) = PureWeight::rational(row) else { continue };
            assert_eq!(mu.purity_weight().unwrap(), w);
            // Nonempty by purity plus dominance, and reflection-symmetric.
            let crit = mu.crit_range().unwrap();
            assert!(!crit.is_empty());
            assert!(crit.contains(w.div_euclid(2)));
            assert_eq!(crit.hi, w - crit.lo, "critical range reflects around w/2");
        }
    }
}
