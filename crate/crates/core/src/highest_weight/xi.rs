//! The xi matrix, its conjugation identities and Lie algebra transversality.
//!
//! xi has block form ((1, w), (0, w)) with w the antidiagonal permutation.
//! Conjugation by xi moves the block diagonal Levi against the opposite
//! parabolic; the checks below verify, over the integers and modulo p, that
//! the Levi plus the xi twist of the lower Borel spans the full matrix
//! algebra, that their intersection has dimension n, and that the twist of
//! the upper triangular part of the Levi falls into the derived Levi plus
//! the twist of the strict lower triangle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HighestWeightError;
use crate::linalg::Mat;
use crate::ring::{Ring, ZModPN, QQ};

/// Antidiagonal permutation matrix of size n.
pub fn w_matrix(n: usize) -> Mat<QQ> {
    let mut m = Mat::<QQ>::zero(&QQ, n, n);
    for i in 0..n {
        *m.at_mut(i, n - 1 - i) = BigRational::one();
    }
    m
}

/// The block matrix ((1, w), (0, w)) and its inverse ((1, -1), (0, w)).
pub struct XiMatrix {
    n: usize,
    mat: Mat<QQ>,
    inv: Mat<QQ>,
}

impl XiMatrix {
    pub fn new(n: usize) -> Self {
        let two_n = 2 * n;
        let mut mat = Mat::<QQ>::zero(&QQ, two_n, two_n);
        let mut inv = Mat::<QQ>::zero(&QQ, two_n, two_n);
        for i in 0..n {
            *mat.at_mut(i, i) = BigRational::one();
            *mat.at_mut(i, n + (n - 1 - i)) = BigRational::one();
            *mat.at_mut(n + i, n + (n - 1 - i)) = BigRational::one();
            *inv.at_mut(i, i) = BigRational::one();
            *inv.at_mut(i, n + i) = -BigRational::one();
            *inv.at_mut(n + i, n + (n - 1 - i)) = BigRational::one();
        }
        XiMatrix { n, mat, inv }
    }

    /// Variant with the antidiagonal replaced by the identity; used as a
    /// negative control, it breaks transversality in rank four and higher.
    pub fn corrupted(n: usize) -> Self {
        let two_n = 2 * n;
        let mut mat = Mat::<QQ>::zero(&QQ, two_n, two_n);
        for i in 0..n {
            *mat.at_mut(i, i) = BigRational::one();
            *mat.at_mut(i, n + i) = BigRational::one();
            *mat.at_mut(n + i, n + i) = BigRational::one();
        }
        let inv = invert(&mat).expect("corrupted xi is still invertible");
        XiMatrix { n, mat, inv }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mat(&self) -> &Mat<QQ> {
        &self.mat
    }

    pub fn inv(&self) -> &Mat<QQ> {
        &self.inv
    }

    /// xi g xi^{-1}.
    pub fn conj(&self, g: &Mat<QQ>) -> Mat<QQ> {
        self.mat.mul(&QQ, g).mul(&QQ, &self.inv)
    }

    /// xi^{-1} g xi.
    pub fn conj_inv(&self, g: &Mat<QQ>) -> Mat<QQ> {
        self.inv.mul(&QQ, g).mul(&QQ, &self.mat)
    }
}

fn invert(m: &Mat<QQ>) -> Option<Mat<QQ>> {
    let n = m.rows;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![BigRational::zero(); n];
        e[j] = BigRational::one();
        cols.push(m.solve(&QQ, &e)?);
    }
    let mut out = Mat::<QQ>::zero(&QQ, n, n);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            *out.at_mut(i, j) = col[i].clone();
        }
    }
    Some(out)
}

fn block_assemble(n: usize, a: &Mat<QQ>, b: &Mat<QQ>, c: &Mat<QQ>, d: &Mat<QQ>) -> Mat<QQ> {
    let mut m = Mat::<QQ>::zero(&QQ, 2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            *m.at_mut(i, j) = a.at(i, j).clone();
            *m.at_mut(i, n + j) = b.at(i, j).clone();
            *m.at_mut(n + i, j) = c.at(i, j).clone();
            *m.at_mut(n + i, n + j) = d.at(i, j).clone();
        }
    }
    m
}

fn random_block(n: usize, rng: &mut ChaCha8Rng) -> Mat<QQ> {
    let mut m = Mat::<QQ>::zero(&QQ, n, n);
    for i in 0..n {
        for j in 0..n {
            *m.at_mut(i, j) = BigRational::from_integer(BigInt::from(rng.gen_range(-9i64..=9)));
        }
    }
    m
}

/// Conjugation identities for xi on random integer blocks:
///   xi^{-1} ((A,B),(C,D)) xi = ((A-C, (A+B-C-D) w), (wC, w(C+D)w))
///   xi ((A,B),(C,D)) xi^{-1} = ((A+wC, wDw - A + Bw - wC), (wC, wDw - wC))
/// together with xi xi^{-1} = 1.
pub fn xi_conj_identities_hold(n: usize, trials: u32, seed: u64) -> bool {
    let xi = XiMatrix::new(n);
    let ctx = QQ;
    let id = Mat::<QQ>::identity(&ctx, 2 * n);
    if !xi.mat.mul(&ctx, &xi.inv).sub(&ctx, &id).is_zero(&ctx) {
        return false;
    }
    let w = w_matrix(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let a = random_block(n, &mut rng);
        let b = random_block(n, &mut rng);
        let c = random_block(n, &mut rng);
        let d = random_block(n, &mut rng);
        let g = block_assemble(n, &a, &b, &c, &d);

        let lhs1 = xi.conj_inv(&g);
        let a_c = a.sub(&ctx, &c);
        let top_right = a.add(&ctx, &b).sub(&ctx, &c).sub(&ctx, &d).mul(&ctx, &w);
        let wc = w.mul(&ctx, &c);
        let cd_w = w.mul(&ctx, &c.add(&ctx, &d)).mul(&ctx, &w);
        let rhs1 = block_assemble(n, &a_c, &top_right, &wc, &cd_w);
        if !lhs1.sub(&ctx, &rhs1).is_zero(&ctx) {
            return false;
        }

        let lhs2 = xi.conj(&g);
        let wdw = w.mul(&ctx, &d).mul(&ctx, &w);
        let a_wc = a.add(&ctx, &wc);
        let tr = wdw.sub(&ctx, &a).add(&ctx, &b.mul(&ctx, &w)).sub(&ctx, &wc);
        let br = wdw.sub(&ctx, &wc);
        let rhs2 = block_assemble(n, &a_wc, &tr, &wc, &br);
        if !lhs2.sub(&ctx, &rhs2).is_zero(&ctx) {
            return false;
        }
    }
    true
}

/// Flattened matrix basis of the block diagonal Levi.
fn levi_basis(n: usize) -> Vec<Vec<i64>> {
    let two_n = 2 * n;
    let mut out = Vec::new();
    for base in [0, n] {
        for i in 0..n {
            for j in 0..n {
                let mut v = vec![0i64; two_n * two_n];
                v[(base + i) * two_n + (base + j)] = 1;
                out.push(v);
            }
        }
    }
    out
}

/// Flattened basis of the lower triangular Borel (diagonal included),
/// conjugated by xi.
fn twisted_lower_borel(n: usize, xi: &XiMatrix) -> Vec<Vec<i64>> {
    let two_n = 2 * n;
    let mut out = Vec::new();
    for i in 0..two_n {
        for j in 0..=i {
            let mut e = Mat::<QQ>::zero(&QQ, two_n, two_n);
            *e.at_mut(i, j) = BigRational::one();
            let t = xi.conj(&e);
            out.push(flatten_int(&t));
        }
    }
    out
}

fn flatten_int(m: &Mat<QQ>) -> Vec<i64> {
    let mut v = Vec::with_capacity(m.rows * m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            let x = m.at(i, j);
            assert!(x.denom().is_one(), "xi conjugates keep integer entries");
            v.push(i64::try_from(x.numer().clone()).expect("small entries"));
        }
    }
    v
}

fn rank_over<R: Ring>(ctx: &R, rows: &[Vec<i64>]) -> usize {
    let data: Vec<Vec<R::El>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| ctx.from_i64(x)).collect())
        .collect();
    Mat::<R>::from_rows(data).rank(ctx)
}

/// Report of the transversality checks for one rank.
#[derive(Debug, Clone, Serialize)]
pub struct TransversalityReport {
    pub two_n: usize,
    pub expected_rank: usize,
    pub rank_rational: usize,
    pub rank_mod_p: Vec<(u64, usize)>,
    pub intersection_dim: usize,
    pub intersection_dims_mod_p: Vec<(u64, usize)>,
    pub explicit_identity: bool,
    pub membership: bool,
    pub pass: bool,
}

fn check_with_xi(
    two_n: usize,
    primes: &[u64],
    xi: &XiMatrix,
) -> Result<TransversalityReport, HighestWeightError> {
    if two_n < 2 || two_n % 2 != 0 {
        return Err(HighestWeightError::RankUnsupported(two_n));
    }
    let n = two_n / 2;
    let full = two_n * two_n;
    let levi = levi_basis(n);
    let borel = twisted_lower_borel(n, xi);
    let mut stacked = levi.clone();
    stacked.extend(borel.iter().cloned());

    let rank_rational = rank_over(&QQ, &stacked);
    let mut rank_mod_p = Vec::new();
    let mut intersection_dims_mod_p = Vec::new();
    for &p in primes {
        if !crate::exactnum::padic::is_prime(p) {
            return Err(HighestWeightError::BadPrime(p));
        }
        let ctx = ZModPN::new(p, 1);
        let r = rank_over(&ctx, &stacked);
        rank_mod_p.push((p, r));
        intersection_dims_mod_p.push((p, levi.len() + borel.len() - r));
    }
    let intersection_dim = levi.len() + borel.len() - rank_rational;

    // Membership of the upper triangular Levi twist inside the derived Levi
    // plus the twisted strict lower triangle, by the closed form solution:
    // for X = diag(n1, n2) strictly upper in both factors,
    //   xi X xi^{-1} = diag(h, h) + xi diag(-w n2 w, -w n1 w) xi^{-1}
    // with h = n1 + w n2 w.
    let ctx = QQ;
    let w = w_matrix(n);
    let mut explicit_identity = true;
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let mut upper_cases: Vec<(Mat<QQ>, Mat<QQ>)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut u = Mat::<QQ>::zero(&ctx, n, n);
            *u.at_mut(i, j) = BigRational::one();
            upper_cases.push((u.clone(), Mat::<QQ>::zero(&ctx, n, n)));
            upper_cases.push((Mat::<QQ>::zero(&ctx, n, n), u));
        }
    }
    for _ in 0..5 {
        let mut n1 = Mat::<QQ>::zero(&ctx, n, n);
        let mut n2 = Mat::<QQ>::zero(&ctx, n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                *n1.at_mut(i, j) = BigRational::from_integer(BigInt::from(rng.gen_range(-9i64..=9)));
                *n2.at_mut(i, j) = BigRational::from_integer(BigInt::from(rng.gen_range(-9i64..=9)));
            }
        }
        upper_cases.push((n1, n2));
    }
    let zero_n = Mat::<QQ>::zero(&ctx, n, n);
    for (n1, n2) in &upper_cases {
        let x = block_assemble(n, n1, &zero_n, &zero_n, n2);
        let lhs = xi.conj(&x);
        let h = n1.add(&ctx, &w.mul(&ctx, n2).mul(&ctx, &w));
        let nbar1 = w.mul(&ctx, n2).mul(&ctx, &w).scale(&ctx, &-BigRational::one());
        let nbar2 = w.mul(&ctx, n1).mul(&ctx, &w).scale(&ctx, &-BigRational::one());
        let nbar = block_assemble(n, &nbar1, &zero_n, &zero_n, &nbar2);
        let rhs = block_assemble(n, &h, &zero_n, &zero_n, &h).add(&ctx, &xi.conj(&nbar));
        if !lhs.sub(&ctx, &rhs).is_zero(&ctx) {
            explicit_identity = false;
            break;
        }
    }

    // Independent generic check: solve the membership as a linear system over
    // the derived Levi basis and the twisted strict lower triangle.
    let mut span: Vec<Vec<i64>> = Vec::new();
    for base in [0, n] {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let mut v = vec![0i64; full];
                    v[(base + i) * two_n + (base + j)] = 1;
                    span.push(v);
                }
            }
        }
        for i in 0..n.saturating_sub(1) {
            let mut v = vec![0i64; full];
            v[(base + i) * two_n + (base + i)] = 1;
            v[(base + i + 1) * two_n + (base + i + 1)] = -1;
            span.push(v);
        }
    }
    for i in 0..two_n {
        for j in 0..i {
            let mut e = Mat::<QQ>::zero(&ctx, two_n, two_n);
            *e.at_mut(i, j) = BigRational::one();
            span.push(flatten_int(&xi.conj(&e)));
        }
    }
    let span_q: Vec<Vec<BigRational>> = span
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let cols = Mat::<QQ>::from_rows(span_q).transpose(&ctx);
    let mut membership = true;
    'outer: for base in [0usize, n] {
        for i in 0..n {
            for j in (i + 1)..n {
                let mut e = Mat::<QQ>::zero(&ctx, two_n, two_n);
                *e.at_mut(base + i, base + j) = BigRational::one();
                let target = flatten_int(&xi.conj(&e));
                let target_q: Vec<BigRational> = target
                    .iter()
                    .map(|&x| BigRational::from_integer(BigInt::from(x)))
                    .collect();
                if cols.solve(&ctx, &target_q).is_none() {
                    membership = false;
                    break 'outer;
                }
            }
        }
    }

    let expected_rank = full;
    let pass = rank_rational == expected_rank
        && rank_mod_p.iter().all(|&(_, r)| r == expected_rank)
        && intersection_dim == n
        && intersection_dims_mod_p.iter().all(|&(_, d)| d == n)
        && explicit_identity
        && membership;
    Ok(TransversalityReport {
        two_n,
        expected_rank,
        rank_rational,
        rank_mod_p,
        intersection_dim,
        intersection_dims_mod_p,
        explicit_identity,
        membership,
        pass,
    })
}

/// Verifies the transversal position of the Levi against the xi twist of the
/// lower Borel, over the rationals and modulo each given prime.
pub fn transversality_check(
    two_n: usize,
    primes: &[u64],
) -> Result<TransversalityReport, HighestWeightError> {
    check_with_xi(two_n, primes, &XiMatrix::new(two_n / 2))
}

/// Negative control: the same checks with the antidiagonal replaced by the
/// identity inside xi.
pub fn transversality_check_corrupted(
    two_n: usize,
    primes: &[u64],
) -> Result<TransversalityReport, HighestWeightError> {
    check_with_xi(two_n, primes, &XiMatrix::corrupted(two_n / 2))
}
