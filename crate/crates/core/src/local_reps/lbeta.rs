//! Depth congruence test for paired block elements.
//!
//! Conjugating the block-diagonal element iota(h1, h2) by the fixed
//! period matrix with blocks (1, w; 0, w) and then by t^beta yields
//! (h1, p^-beta (h1 - h2) w; 0, w h2 w), so membership in the parahoric
//! after conjugation is equivalent to the entrywise congruence
//! h1 = h2 mod p^beta. Both routes are computed exactly and compared.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cosets::in_parahoric;
use super::induced::t_matrix;
use super::LocalRepsError;
use crate::exactnum::padic::padic_valuation;
use crate::linalg::Mat;
use crate::par;
use crate::ring::QQ;

fn antidiagonal(n: usize) -> Mat<QQ> {
    let mut w = Mat::<QQ>::zero(&QQ, n, n);
    for i in 0..n {
        *w.at_mut(i, n - 1 - i) = BigRational::one();
    }
    w
}

/// Period matrix with blocks (1, w; 0, w) and its inverse (1, -1; 0, w).
fn period_matrices(n: usize) -> (Mat<QQ>, Mat<QQ>) {
    let w = antidiagonal(n);
    let mut xi = Mat::<QQ>::zero(&QQ, 2 * n, 2 * n);
    let mut xi_inv = Mat::<QQ>::zero(&QQ, 2 * n, 2 * n);
    for i in 0..n {
        *xi.at_mut(i, i) = BigRational::one();
        *xi_inv.at_mut(i, i) = BigRational::one();
        *xi_inv.at_mut(i, n + i) = -BigRational::one();
        for j in 0..n {
            *xi.at_mut(i, n + j) = w.at(i, j).clone();
            *xi.at_mut(n + i, n + j) = w.at(i, j).clone();
            *xi_inv.at_mut(n + i, n + j) = w.at(i, j).clone();
        }
    }
    (xi, xi_inv)
}

fn block_diagonal(h1: &Mat<QQ>, h2: &Mat<QQ>) -> Mat<QQ> {
    let n = h1.rows;
    let mut m = Mat::<QQ>::zero(&QQ, 2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            *m.at_mut(i, j) = h1.at(i, j).clone();
            *m.at_mut(n + i, n + j) = h2.at(i, j).clone();
        }
    }
    m
}

fn require_unit_matrix(h: &Mat<QQ>, p: u64) -> Result<(), LocalRepsError> {
    for i in 0..h.rows {
        for j in 0..h.cols {
            let e = h.at(i, j);
            if !e.is_zero() && padic_valuation(e, p).expect("nonzero entry") < 0 {
                return Err(LocalRepsError::Unsupported(
                    "congruence test needs p-integral blocks".into(),
                ));
            }
        }
    }
    let det = h.det();
    if det.is_zero() || padic_valuation(&det, p).expect("nonzero det") != 0 {
        return Err(LocalRepsError::NotInvertible);
    }
    Ok(())
}

/// Whether iota(h1, h2) lies in the depth-beta paired subgroup. The
/// congruence h1 = h2 mod p^beta is computed entrywise and must agree
/// with the exact conjugation route through the period matrix.
pub fn l_beta_membership(
    h1: &Mat<QQ>,
    h2: &Mat<QQ>,
    p: u64,
    beta: u32,
) -> Result<bool, LocalRepsError> {
    assert_eq!(h1.rows, h2.rows, "blocks must share a size");
    assert!(beta >= 1, "depth must be positive");
    require_unit_matrix(h1, p)?;
    require_unit_matrix(h2, p)?;
    let n = h1.rows;
    let congruent = (0..n).all(|i| {
        (0..n).all(|j| {
            let d = h1.at(i, j) - h2.at(i, j);
            d.is_zero() || padic_valuation(&d, p).expect("nonzero difference") >= beta as i64
        })
    });
    let (xi, xi_inv) = period_matrices(n);
    let conjugated = t_matrix(n, p, -(beta as i64))
        .mul(&QQ, &xi_inv)
        .mul(&QQ, &block_diagonal(h1, h2))
        .mul(&QQ, &xi)
        .mul(&QQ, &t_matrix(n, p, beta as i64));
    let member = in_parahoric(&conjugated, n, p);
    assert_eq!(member, congruent, "conjugation and congruence routes must agree");
    Ok(member)
}

/// Outcome of the sampled equivalence between the two membership routes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LBetaReport {
    pub n: usize,
    pub p: u64,
    pub beta: u32,
    pub samples: usize,
    pub members: usize,
    pub non_members: usize,
    pub all_expected: bool,
}

/// Draws sample pairs h2 = h1 + p^e R at depths e around beta and
/// verifies both membership routes against the construction: e >= beta
/// must be a member, e = beta - 1 with a unit entry in R must not.
pub fn l_beta_equivalence(
    n: usize,
    p: u64,
    beta: u32,
    samples: usize,
    seed: u64,
) -> Result<LBetaReport, LocalRepsError> {
    assert!(beta >= 1, "depth must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases: Vec<(Mat<QQ>, Mat<QQ>, bool)> = Vec::with_capacity(samples);
    while cases.len() < samples {
        let h1 = random_unit_matrix(&mut rng, n, p);
        let expect_member = cases.len() % 2 == 0;
        let exponent = if expect_member { beta + rng.gen_range(0..=1) } else { beta - 1 };
        let scale = super::satake::rat_pow(
            &BigRational::from(BigInt::from(p)),
            exponent as i64,
        );
        let mut h2 = h1.clone();
        let mut unit_seen = false;
        for i in 0..n {
            for j in 0..n {
                let r = rng.gen_range(-(p as i64)..=p as i64);
                if r % p as i64 != 0 {
                    unit_seen = true;
                }
                let bump = &scale * BigRational::from(BigInt::from(r));
                *h2.at_mut(i, j) = h2.at(i, j) + bump;
            }
        }
        if !expect_member && !unit_seen {
            continue;
        }
        if h2.det().is_zero()
            || padic_valuation(&h2.det(), p).expect("nonzero determinant") != 0
        {
            continue;
        }
        cases.push((h1, h2, expect_member));
    }
    let results = par::map_items(cases, |(h1, h2, expected)| {
        let member = l_beta_membership(&h1, &h2, p, beta)?;
        Ok::<(bool, bool), LocalRepsError>((member, member == expected))
    });
    let mut members = 0;
    let mut non_members = 0;
    let mut all_expected = true;
    for r in results {
        let (member, as_expected) = r?;
        if member {
            members += 1;
        } else {
            non_members += 1;
        }
        all_expected &= as_expected;
    }
    Ok(LBetaReport { n, p, beta, samples, members, non_members, all_expected })
}

fn random_unit_matrix(rng: &mut ChaCha8Rng, n: usize, p: u64) -> Mat<QQ> {
    loop {
        let m = Mat::<QQ>::from_rows(
            (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| BigRational::from(BigInt::from(rng.gen_range(-9i64..=9))))
                        .collect()
                })
                .collect(),
        );
        let det = m.det();
        if !det.is_zero() && padic_valuation(&det, p).expect("nonzero det") == 0 {
            return m;
        }
    }
}
