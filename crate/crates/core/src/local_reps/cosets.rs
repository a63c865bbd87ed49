//! Unipotent coset decomposition of the parahoric.
//!
//! With t = diag(p 1_n, 1_n), the intersection of the parahoric with
//! its t-conjugate consists of the members whose upper-right block
//! vanishes mod p, and the upper unipotents u_D over residue blocks D
//! give exactly p^{n^2} cosets. Disjointness and covering are checked
//! with exact rational matrices: membership of m amounts to m lying in
//! the parahoric with t^{-1} m t still integral. The same residue
//! geometry is cross-counted on the flag quotient, whose point count
//! must match both the Gaussian binomial and the group-order quotient,
//! split into binomial(2n, n) Schubert cells of p-power size.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::induced::{inv_mod_p, schubert_of_columns, t_matrix};
use super::LocalRepsError;
use crate::exactnum::padic::padic_valuation;
use crate::linalg::Mat;
use crate::ring::QQ;

fn is_p_integral(m: &Mat<QQ>, p: u64) -> bool {
    (0..m.rows).all(|i| {
        (0..m.cols).all(|j| {
            let e = m.at(i, j);
            e.is_zero() || padic_valuation(e, p).expect("nonzero entry") >= 0
        })
    })
}

/// Membership in the parahoric: p-integral, lower-left n-by-n block
/// divisible by p, unit determinant.
pub(super) fn in_parahoric(m: &Mat<QQ>, n: usize, p: u64) -> bool {
    if !is_p_integral(m, p) {
        return false;
    }
    for i in n..2 * n {
        for j in 0..n {
            let e = m.at(i, j);
            if !e.is_zero() && padic_valuation(e, p).expect("nonzero entry") < 1 {
                return false;
            }
        }
    }
    let det = m.det();
    !det.is_zero() && padic_valuation(&det, p).expect("nonzero det") == 0
}

/// Membership in the depth intersection: in the parahoric and still
/// integral after conjugation by t.
pub(super) fn in_depth_intersection(m: &Mat<QQ>, n: usize, p: u64) -> bool {
    if !in_parahoric(m, n, p) {
        return false;
    }
    let t = t_matrix(n, p, 1);
    let t_inv = t_matrix(n, p, -1);
    let conj = t_inv.mul(&QQ, m).mul(&QQ, &t);
    is_p_integral(&conj, p)
}

fn unipotent(n: usize, block: &[i64]) -> Mat<QQ> {
    let mut u = Mat::<QQ>::identity(&QQ, 2 * n);
    for r in 0..n {
        for c in 0..n {
            *u.at_mut(r, n + c) = BigRational::from(BigInt::from(block[r * n + c]));
        }
    }
    u
}

fn unipotent_inverse(n: usize, block: &[i64]) -> Mat<QQ> {
    let negated: Vec<i64> = block.iter().map(|&e| -e).collect();
    unipotent(n, &negated)
}

fn residue_blocks(n: usize, p: u64) -> Vec<Vec<i64>> {
    let size = n * n;
    let total = p.pow(size as u32);
    (0..total)
        .map(|mut code| {
            (0..size)
                .map(|_| {
                    let digit = (code % p) as i64;
                    code /= p;
                    digit
                })
                .collect()
        })
        .collect()
}

fn fp_det(m: &[Vec<u64>], p: u64) -> u64 {
    let n = m.len();
    let mut a: Vec<Vec<u64>> = m.to_vec();
    let mut det = 1u64;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| a[r][col] % p != 0) else {
            return 0;
        };
        if pivot != col {
            a.swap(pivot, col);
            det = (p - det % p) % p;
        }
        det = det * (a[col][col] % p) % p;
        let inv = inv_mod_p(a[col][col] % p, p);
        for r in col + 1..n {
            if a[r][col] % p != 0 {
                let f = a[r][col] % p * inv % p;
                for c in col..n {
                    a[r][c] = (a[r][c] + (p - f) * a[col][c]) % p;
                }
            }
        }
    }
    det % p
}

fn all_gl(n: usize, p: u64) -> Vec<Vec<Vec<u64>>> {
    let size = n * n;
    let total = p.pow(size as u32);
    (0..total)
        .filter_map(|code| {
            let mut c = code;
            let flat: Vec<u64> = (0..size)
                .map(|_| {
                    let d = c % p;
                    c /= p;
                    d
                })
                .collect();
            let m: Vec<Vec<u64>> = (0..n).map(|r| flat[r * n..(r + 1) * n].to_vec()).collect();
            (fp_det(&m, p) != 0).then_some(m)
        })
        .collect()
}

/// Builds the 2n-by-2n residue point with the given blocks on an
/// integer lift and vanishing lower-left block.
fn assemble(n: usize, a: &[Vec<u64>], b: &[Vec<u64>], d: &[Vec<u64>]) -> Mat<QQ> {
    let mut m = Mat::<QQ>::zero(&QQ, 2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            *m.at_mut(i, j) = BigRational::from(BigInt::from(a[i][j]));
            *m.at_mut(i, n + j) = BigRational::from(BigInt::from(b[i][j]));
            *m.at_mut(n + i, n + j) = BigRational::from(BigInt::from(d[i][j]));
        }
    }
    m
}

fn qq_from(v: i64) -> BigRational {
    BigRational::from(BigInt::from(v))
}

/// Exact count of F_p points of the flag quotient, with the Schubert
/// cell sizes keyed by pivot rows.
fn flag_census(n: usize, p: u64) -> Result<(u64, BTreeMap<Vec<usize>, u64>), LocalRepsError> {
    let entries = 2 * n * n;
    let total = p.pow(entries as u32);
    let mut canonical = std::collections::HashSet::new();
    let mut cells: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for code in 0..total {
        let mut c = code;
        let flat: Vec<u64> = (0..entries)
            .map(|_| {
                let d = c % p;
                c /= p;
                d
            })
            .collect();
        let cols: Vec<Vec<u64>> = (0..n).map(|j| flat[j * 2 * n..(j + 1) * 2 * n].to_vec()).collect();
        let Some(rref) = fp_row_rref(&cols, p) else {
            continue;
        };
        if !canonical.insert(rref) {
            continue;
        }
        let tau = schubert_of_columns(cols, n, p)?;
        *cells.entry(tau.members().to_vec()).or_insert(0) += 1;
    }
    let count = cells.values().sum();
    Ok((count, cells))
}

/// Reduced row echelon form over F_p; None when the rows are dependent.
/// The input rows are the transposed basis columns, so the result is a
/// canonical label for the spanned subspace.
fn fp_row_rref(rows: &[Vec<u64>], p: u64) -> Option<Vec<u64>> {
    let mut a = rows.to_vec();
    let height = a.len();
    let width = a[0].len();
    let mut pivot_col = 0;
    for r in 0..height {
        let mut found = None;
        while pivot_col < width {
            if let Some(pr) = (r..height).find(|&i| a[i][pivot_col] % p != 0) {
                found = Some(pr);
                break;
            }
            pivot_col += 1;
        }
        let pr = found?;
        a.swap(r, pr);
        let inv = inv_mod_p(a[r][pivot_col] % p, p);
        for c in 0..width {
            a[r][c] = a[r][c] % p * inv % p;
        }
        for i in 0..height {
            if i != r && a[i][pivot_col] % p != 0 {
                let f = a[i][pivot_col] % p;
                for c in 0..width {
                    a[i][c] = (a[i][c] + (p - f) * a[r][c]) % p;
                }
            }
        }
        pivot_col += 1;
    }
    Some(a.into_iter().flatten().collect())
}

fn gaussian_binomial(n: usize, p: u64) -> u64 {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let q = BigInt::from(p);
    for i in 1..=n as u32 {
        num *= q.pow(n as u32 + i) - BigInt::one();
        den *= q.pow(i) - BigInt::one();
    }
    let (quot, rem) = num.div_rem(&den);
    assert!(rem.is_zero(), "Gaussian binomial must divide exactly");
    quot.to_u64_digits().1.first().copied().unwrap_or(0)
}

fn gl_order(n: usize, p: u64) -> BigInt {
    let q = BigInt::from(p);
    let qn = q.pow(n as u32);
    (0..n as u32).map(|i| &qn - q.pow(i)).product()
}

/// Verification record for the coset decomposition at one (n, p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetReport {
    pub n: usize,
    pub p: u64,
    pub coset_count: u64,
    pub pairwise_disjoint: bool,
    pub residue_points_checked: u64,
    pub residue_covering_ok: bool,
    pub deep_samples: usize,
    pub deep_covering_ok: bool,
    pub flag_points: u64,
    pub flag_points_qbinomial: u64,
    pub flag_points_group_quotient: u64,
    pub schubert_cells: usize,
    pub schubert_cells_expected: usize,
    pub cell_sizes_are_p_powers: bool,
}

impl CosetReport {
    pub fn all_ok(&self) -> bool {
        self.coset_count == u64::pow(self.p, (self.n * self.n) as u32)
            && self.pairwise_disjoint
            && self.residue_covering_ok
            && self.deep_covering_ok
            && self.flag_points == self.flag_points_qbinomial
            && self.flag_points == self.flag_points_group_quotient
            && self.schubert_cells == self.schubert_cells_expected
            && self.cell_sizes_are_p_powers
    }
}

/// Verifies the p^{n^2}-coset decomposition: pairwise disjointness of
/// the unipotent representatives, exhaustive covering over all residue
/// points of the parahoric, seeded deep lifts landing in exactly one
/// coset, and the flag-quotient cross-counts.
pub fn parahoric_cosets(
    p: u64,
    n: usize,
    deep_samples: usize,
    seed: u64,
) -> Result<CosetReport, LocalRepsError> {
    if !crate::exactnum::padic::is_prime(p) {
        return Err(LocalRepsError::QMustBePrime { q: p });
    }
    let blocks = residue_blocks(n, p);
    let coset_count = blocks.len() as u64;

    let mut pairwise_disjoint = true;
    for (i, a) in blocks.iter().enumerate() {
        for (j, b) in blocks.iter().enumerate() {
            let m = unipotent_inverse(n, a).mul(&QQ, &unipotent(n, b));
            let same = in_depth_intersection(&m, n, p);
            if (i == j) != same {
                pairwise_disjoint = false;
            }
        }
    }

    let gl = all_gl(n, p);
    let mut residue_points_checked = 0u64;
    let mut residue_covering_ok = true;
    for a in &gl {
        for d in &gl {
            for b_code in residue_blocks(n, p) {
                let b: Vec<Vec<u64>> =
                    (0..n).map(|r| (0..n).map(|c| b_code[r * n + c] as u64).collect()).collect();
                let j = assemble(n, a, &b, d);
                residue_points_checked += 1;
                if count_containing_cosets(&j, &blocks, n, p) != 1 {
                    residue_covering_ok = false;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deep_covering_ok = true;
    for _ in 0..deep_samples {
        let a = &gl[rng.gen_range(0..gl.len())];
        let d = &gl[rng.gen_range(0..gl.len())];
        let mut j = Mat::<QQ>::zero(&QQ, 2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let bump = |rng: &mut ChaCha8Rng| qq_from(rng.gen_range(-3i64..=3)) * qq_from(p as i64);
                *j.at_mut(r, c) = qq_from(a[r][c] as i64) + bump(&mut rng);
                *j.at_mut(r, n + c) = qq_from(rng.gen_range(0..p as i64)) + bump(&mut rng);
                *j.at_mut(n + r, c) = qq_from(p as i64) * qq_from(rng.gen_range(-3i64..=3));
                *j.at_mut(n + r, n + c) = qq_from(d[r][c] as i64) + bump(&mut rng);
            }
        }
        if !in_parahoric(&j, n, p) || count_containing_cosets(&j, &blocks, n, p) != 1 {
            deep_covering_ok = false;
        }
    }

    let (flag_points, cells) = flag_census(n, p)?;
    let q_binom = gaussian_binomial(n, p);
    let quotient = {
        let num = gl_order(2 * n, p);
        let den = gl_order(n, p).pow(2) * BigInt::from(p).pow((n * n) as u32);
        let (q, r) = num.div_rem(&den);
        assert!(r.is_zero(), "parabolic order must divide the group order");
        q.to_u64_digits().1.first().copied().unwrap_or(0)
    };
    let cell_sizes_are_p_powers = cells.values().all(|&s| {
        let mut s = s;
        while s % p == 0 {
            s /= p;
        }
        s == 1
    });
    let expected_cells = {
        let mut c = 1u64;
        for i in 0..n as u64 {
            c = c * (2 * n as u64 - i) / (i + 1);
        }
        c as usize
    };

    Ok(CosetReport {
        n,
        p,
        coset_count,
        pairwise_disjoint,
        residue_points_checked,
        residue_covering_ok,
        deep_samples,
        deep_covering_ok,
        flag_points,
        flag_points_qbinomial: q_binom,
        flag_points_group_quotient: quotient,
        schubert_cells: cells.len(),
        schubert_cells_expected: expected_cells,
        cell_sizes_are_p_powers,
    })
}

fn count_containing_cosets(j: &Mat<QQ>, blocks: &[Vec<i64>], n: usize, p: u64) -> usize {
    blocks
        .iter()
        .filter(|delta| {
            let m = unipotent_inverse(n, delta).mul(&QQ, j);
            in_depth_intersection(&m, n, p)
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_verifies_at_all_required_points() {
        for (n, p, flag, cells) in [(1usize, 2u64, 3u64, 2usize), (1, 3, 4, 2), (1, 5, 6, 2), (2, 2, 35, 6)] {
            let report = parahoric_cosets(p, n, 25, 99).unwrap();
            assert!(report.all_ok(), "decomposition fails at n={n} p={p}: {report:?}");
            assert_eq!(report.coset_count, p.pow((n * n) as u32));
            assert_eq!(report.flag_points, flag);
            assert_eq!(report.schubert_cells, cells);
        }
    }

    #[test]
    fn representatives_shifted_by_p_collide() {
        // u_0 and u_p fall in the same coset: their quotient conjugates
        // to an integral unipotent. u_1 does not.
        let m = unipotent_inverse(1, &[0]).mul(&QQ, &unipotent(1, &[3]));
        assert!(in_depth_intersection(&m, 1, 3));
        let m = unipotent_inverse(1, &[1]).mul(&QQ, &unipotent(1, &[0]));
        assert!(!in_depth_intersection(&m, 1, 3));
    }

    #[test]
    fn composite_modulus_is_rejected() {
        assert!(matches!(parahoric_cosets(6, 1, 5, 0), Err(LocalRepsError::QMustBePrime { q: 6 })));
    }

    #[test]
    fn reports_are_reproducible_for_a_seed() {
        let a = parahoric_cosets(3, 1, 50, 1234).unwrap();
        let b = parahoric_cosets(3, 1, 50, 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(1, 2), 3);
        assert_eq!(gaussian_binomial(1, 5), 6);
        assert_eq!(gaussian_binomial(2, 2), 35);
        assert_eq!(gaussian_binomial(2, 3), 130);
    }
}
