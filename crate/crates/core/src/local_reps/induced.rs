//! Induced principal-series model at a prime with prime residue field.
//!
//! A function in the model is determined by its values on the finite
//! flag quotient: g = b k splits p-adically with b upper triangular and
//! k integral of unit determinant, f(b k) = c(b) f(k) with cocycle
//! c(b) = prod_i (alpha_i q^{i-2n})^{v(b_ii)}, and f(k) depends only on
//! the Schubert cell of k mod p under the parahoric. The double coset
//! of t = diag(p 1_n, 1_n) acts through the q^{n^2} unipotent cosets,
//! and its matrix on the cell basis realizes the Jacquet spectrum
//! prod_tau (X - q^{n(1-n)/2} alpha^tau).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::satake::{poly_from_roots, rat_pow, subsets, tau_eigenvalues, SatakeParams, TauSubset};
use super::LocalRepsError;
use crate::exactnum::padic::padic_valuation;
use crate::linalg::Mat;
use crate::ring::QQ;

/// Splits an invertible rational matrix as g = b k with b upper
/// triangular and k p-integral of unit determinant. Works bottom row
/// up: the minimal-valuation entry of each row is swapped into the
/// diagonal slot and the rest of the row cleared by column shears whose
/// coefficients are p-integral, so the accumulated inverse stays in
/// GL over the p-adic integers.
pub fn iwasawa_decompose(g: &Mat<QQ>, p: u64) -> Result<(Mat<QQ>, Mat<QQ>), LocalRepsError> {
    assert_eq!(g.rows, g.cols, "decomposition needs a square matrix");
    let dim = g.rows;
    let mut b = g.clone();
    let mut k = Mat::<QQ>::identity(&QQ, dim);
    for row in (0..dim).rev() {
        let pivot = (0..=row)
            .filter(|&j| !b.at(row, j).is_zero())
            .min_by_key(|&j| padic_valuation(b.at(row, j), p).expect("nonzero entry"))
            .ok_or(LocalRepsError::NotInvertible)?;
        if pivot != row {
            for r in 0..dim {
                let tmp = b.at(r, pivot).clone();
                *b.at_mut(r, pivot) = b.at(r, row).clone();
                *b.at_mut(r, row) = tmp;
            }
            for c in 0..dim {
                let tmp = k.at(pivot, c).clone();
                *k.at_mut(pivot, c) = k.at(row, c).clone();
                *k.at_mut(row, c) = tmp;
            }
        }
        for j in 0..row {
            if b.at(row, j).is_zero() {
                continue;
            }
            let factor = b.at(row, j) / b.at(row, row);
            debug_assert!(
                padic_valuation(&factor, p).expect("nonzero factor") >= 0,
                "shear coefficient must be p-integral"
            );
            for r in 0..dim {
                let delta = &factor * b.at(r, row);
                *b.at_mut(r, j) = b.at(r, j) - delta;
            }
            for c in 0..dim {
                let delta = &factor * k.at(j, c);
                *k.at_mut(row, c) = k.at(row, c) + delta;
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            assert!(b.at(i, j).is_zero(), "left factor must be upper triangular");
        }
        assert!(!b.at(i, i).is_zero(), "left factor needs nonzero diagonal");
    }
    let det = k.det();
    assert_eq!(
        padic_valuation(&det, p).expect("unit determinant"),
        0,
        "right factor must have unit determinant"
    );
    for i in 0..dim {
        for j in 0..dim {
            if !k.at(i, j).is_zero() {
                assert!(
                    padic_valuation(k.at(i, j), p).expect("entry") >= 0,
                    "right factor must be p-integral"
                );
            }
        }
    }
    assert_eq!(b.mul(&QQ, &k), *g, "factors must recompose the input");
    Ok((b, k))
}

pub(super) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub(super) fn inv_mod_p(x: u64, p: u64) -> u64 {
    assert!(x % p != 0, "inverse of a nonunit mod p");
    pow_mod(x, p - 2, p)
}

/// Reduces a p-integral rational mod p into 0..p.
pub(super) fn reduce_mod_p(x: &BigRational, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let num = x.numer().mod_floor(&pb).to_u64_digits().1.first().copied().unwrap_or(0);
    let den = x.denom().mod_floor(&pb).to_u64_digits().1.first().copied().unwrap_or(0);
    assert!(den % p != 0, "entry is not p-integral");
    num * inv_mod_p(den, p) % p
}

/// Schubert cell of an integral unit-determinant matrix: the bottom
/// pivot rows of the span of its first n columns mod p. Left
/// translation by upper-triangular matrices only adds lower rows to
/// upper ones, and the parahoric acts on the right through block
/// upper-triangular matrices mod p, so the row set is a well-defined
/// label on the double quotient.
pub fn schubert_tau(k: &Mat<QQ>, n: usize, p: u64) -> Result<TauSubset, LocalRepsError> {
    assert_eq!(k.rows, 2 * n, "matrix size must match the group rank");
    let cols: Vec<Vec<u64>> =
        (0..n).map(|j| (0..2 * n).map(|i| reduce_mod_p(k.at(i, j), p)).collect()).collect();
    schubert_of_columns(cols, n, p)
}

/// Bottom-pivot elimination on explicit residue columns: picks the
/// column with the lowest-lying nonzero entry, records that row, clears
/// it elsewhere, and repeats.
pub(super) fn schubert_of_columns(
    mut cols: Vec<Vec<u64>>,
    n: usize,
    p: u64,
) -> Result<TauSubset, LocalRepsError> {
    let bottom = |col: &[u64]| col.iter().rposition(|&e| e != 0);
    let mut remaining: Vec<usize> = (0..cols.len()).collect();
    let mut pivots = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let (pos, row) = remaining
            .iter()
            .enumerate()
            .filter_map(|(pos, &ci)| bottom(&cols[ci]).map(|row| (pos, row)))
            .max_by_key(|&(_, row)| row)
            .ok_or(LocalRepsError::NotInvertible)?;
        let ci = remaining.remove(pos);
        pivots.push(row + 1);
        let scale = inv_mod_p(cols[ci][row], p);
        for &other in &remaining {
            if cols[other][row] != 0 {
                let factor = cols[other][row] * scale % p;
                for i in 0..2 * n {
                    cols[other][i] = (cols[other][i] + (p - factor) * cols[ci][i]) % p;
                }
            }
        }
    }
    pivots.sort_unstable();
    TauSubset::new(n, pivots)
}

/// Permutation-matrix representative of the cell with the given pivot
/// rows: its first n columns are the standard vectors indexed by the
/// cell, the rest by the complement.
pub fn cell_representative(n: usize, tau: &TauSubset) -> Mat<QQ> {
    let mut m = Mat::<QQ>::zero(&QQ, 2 * n, 2 * n);
    for (j, &row) in tau.members().iter().enumerate() {
        *m.at_mut(row - 1, j) = BigRational::one();
    }
    for (j, &row) in tau.complement().members().iter().enumerate() {
        *m.at_mut(row - 1, n + j) = BigRational::one();
    }
    m
}

fn cocycle(params: &SatakeParams, b: &Mat<QQ>) -> Result<BigRational, LocalRepsError> {
    let values = params.values()?;
    let q = BigRational::from(BigInt::from(params.q()));
    let two_n = 2 * params.n();
    let mut acc = BigRational::one();
    for i in 0..two_n {
        let v = padic_valuation(b.at(i, i), params.p()).expect("nonzero diagonal");
        acc *= rat_pow(&values[i], v) * rat_pow(&q, (i as i64 + 1 - two_n as i64) * v);
    }
    Ok(acc)
}

fn eval_model(
    params: &SatakeParams,
    cells: &[Vec<usize>],
    c: usize,
    g: &Mat<QQ>,
) -> Result<BigRational, LocalRepsError> {
    let (b, k) = iwasawa_decompose(g, params.p())?;
    let tau = schubert_tau(&k, params.n(), params.p())?;
    let matches = cells[c].iter().map(|&i| i + 1).eq(tau.members().iter().copied());
    if matches {
        cocycle(params, &b)
    } else {
        Ok(BigRational::zero())
    }
}

fn cell_position(cells: &[Vec<usize>], tau: &TauSubset) -> usize {
    cells
        .iter()
        .position(|s| s.iter().map(|&i| i + 1).eq(tau.members().iter().copied()))
        .expect("cell appears in the enumeration")
}

pub(super) fn t_matrix(n: usize, p: u64, exponent: i64) -> Mat<QQ> {
    let mut t = Mat::<QQ>::identity(&QQ, 2 * n);
    let scale = rat_pow(&BigRational::from(BigInt::from(p)), exponent);
    for i in 0..n {
        *t.at_mut(i, i) = scale.clone();
    }
    t
}

fn unipotent_rep(n: usize, entries: &[u64]) -> Mat<QQ> {
    let mut u = Mat::<QQ>::identity(&QQ, 2 * n);
    for r in 0..n {
        for c in 0..n {
            *u.at_mut(r, n + c) = BigRational::from(BigInt::from(entries[r * n + c]));
        }
    }
    u
}

fn all_upper_blocks(n: usize, p: u64) -> Vec<Vec<u64>> {
    let size = n * n;
    let total = p.pow(size as u32);
    (0..total)
        .map(|mut code| {
            (0..size)
                .map(|_| {
                    let digit = code % p;
                    code /= p;
                    digit
                })
                .collect()
        })
        .collect()
}

/// Matrix of the parahoric Hecke operator on the cell basis of the
/// invariants of the induced model, computed by brute evaluation over
/// the q^{n^2} unipotent coset representatives. Column c holds the
/// image of the c-th cell function.
pub fn up_matrix(params: &SatakeParams) -> Result<Mat<QQ>, LocalRepsError> {
    if params.residue_degree() != 1 {
        return Err(LocalRepsError::QMustBePrime { q: params.q() });
    }
    let n = params.n();
    let p = params.p();
    let cells = subsets(2 * n, n);
    let dim = cells.len();
    let t = t_matrix(n, p, 1);
    let blocks = all_upper_blocks(n, p);
    let mut m = Mat::<QQ>::zero(&QQ, dim, dim);
    for (r, cell) in cells.iter().enumerate() {
        let tau = TauSubset::new(n, cell.iter().map(|&i| i + 1).collect())?;
        let rep = cell_representative(n, &tau);
        for entries in &blocks {
            let g = rep.mul(&QQ, &unipotent_rep(n, entries)).mul(&QQ, &t);
            let (b, k) = iwasawa_decompose(&g, p)?;
            let landed = schubert_tau(&k, n, p)?;
            let c = cell_position(&cells, &landed);
            let add = m.at(r, c) + cocycle(params, &b)?;
            *m.at_mut(r, c) = add;
        }
    }
    Ok(m)
}

/// Outcome of comparing the brute Hecke matrix against the subset
/// spectrum.
#[derive(Debug, Clone)]
pub struct JacquetReport {
    pub n: usize,
    pub q: u64,
    /// Dimension of the invariant space, binomial(2n, n).
    pub degree: usize,
    /// Characteristic polynomial equals prod_tau (X - q^{n(1-n)/2} alpha^tau).
    pub charpoly_matches: bool,
    /// Parameters pairwise distinct in value; otherwise only the
    /// semisimplification is identified and we say so.
    pub regular: bool,
    pub semisimplified_only: bool,
}

/// Brute-force check that the Hecke operator on the invariants has the
/// subset-product spectrum. Polynomial comparison is exact over Q.
pub fn jacquet_spectrum_check(params: &SatakeParams) -> Result<JacquetReport, LocalRepsError> {
    let m = up_matrix(params)?;
    let expected = poly_from_roots(&tau_eigenvalues(params)?);
    let charpoly_matches = m.charpoly() == expected;
    let values = params.values()?;
    let regular = (0..values.len())
        .all(|i| (i + 1..values.len()).all(|j| values[i] != values[j]));
    Ok(JacquetReport {
        n: params.n(),
        q: params.q(),
        degree: m.rows,
        charpoly_matches,
        regular,
        semisimplified_only: !regular,
    })
}

fn unit_residues(p: u64, depth: u32) -> Vec<u64> {
    let modulus = p.pow(depth);
    (1..modulus).filter(|u| u % p != 0).collect()
}

/// Integral of the model function over w u(x) z^shift dx by exact
/// shell summation: the unit-ball plateau, finitely many shells, and a
/// formally summed geometric tail whose ratio is asserted constant over
/// the last three shells.
fn intertwining_value(
    params: &SatakeParams,
    cells: &[Vec<usize>],
    c: usize,
    shift: bool,
) -> Result<BigRational, LocalRepsError> {
    let p = params.p();
    let q = BigRational::from(BigInt::from(p));
    let w = Mat::<QQ>::from_rows(vec![
        vec![BigRational::zero(), -BigRational::one()],
        vec![BigRational::one(), BigRational::zero()],
    ]);
    let z = t_matrix(1, p, 0);
    let z = if shift {
        let mut z = z;
        *z.at_mut(1, 1) = q.clone();
        z
    } else {
        z
    };
    let eval_at = |x: BigRational| -> Result<BigRational, LocalRepsError> {
        let u = Mat::<QQ>::from_rows(vec![
            vec![BigRational::one(), x],
            vec![BigRational::zero(), BigRational::one()],
        ]);
        eval_model(params, cells, c, &w.mul(&QQ, &u).mul(&QQ, &z))
    };
    let plateau = eval_at(BigRational::zero())?;
    for sample in [BigRational::one(), q.clone()] {
        assert_eq!(eval_at(sample)?, plateau, "plateau must be constant on the unit ball");
    }
    let mut total = plateau;
    let depth = 6usize;
    let mut contributions = Vec::with_capacity(depth);
    for shell in 1..=depth {
        let denom = BigInt::from(p).pow(shell as u32);
        let mut value: Option<BigRational> = None;
        for u in unit_residues(p, 2) {
            let x = BigRational::new(BigInt::from(u), denom.clone());
            let v = eval_at(x)?;
            match &value {
                None => value = Some(v),
                Some(prev) => assert_eq!(&v, prev, "shell value must be constant"),
            }
        }
        let value = value.expect("at least one unit residue");
        let volume = rat_pow(&q, shell as i64) - rat_pow(&q, shell as i64 - 1);
        contributions.push(volume * value);
    }
    for c in &contributions {
        total += c.clone();
    }
    let tail: Vec<&BigRational> = contributions[depth - 3..].iter().collect();
    if tail.iter().all(|c| c.is_zero()) {
        return Ok(total);
    }
    if tail.iter().any(|c| c.is_zero()) {
        return Err(LocalRepsError::Unsupported("integral tail is not geometric".into()));
    }
    let r1 = tail[1] / tail[0];
    let r2 = tail[2] / tail[1];
    if r1 != r2 {
        return Err(LocalRepsError::Unsupported("integral tail is not geometric".into()));
    }
    if r1 == BigRational::one() {
        return Err(LocalRepsError::Unsupported(
            "integral tail diverges for equal parameter ratio".into(),
        ));
    }
    total += tail[2] * &r1 / (BigRational::one() - &r1);
    Ok(total)
}

/// One functional/eigenvalue line of the central-element verification.
#[derive(Debug, Clone)]
pub struct CentralCheck {
    pub functional: &'static str,
    pub cell: usize,
    pub value: BigRational,
    pub shifted: BigRational,
    pub eigenvalue: BigRational,
    pub ok: bool,
}

/// Result of verifying how the central element iota(1, p) acts on the
/// two natural functionals of the rank-one induced model.
#[derive(Debug, Clone)]
pub struct CentralReport {
    pub checks: Vec<CentralCheck>,
    /// The functional eigenvalues are exactly the roots of the brute
    /// Hecke characteristic polynomial.
    pub spectrum_matches: bool,
}

impl CentralReport {
    pub fn all_ok(&self) -> bool {
        self.spectrum_matches && self.checks.iter().all(|c| c.ok)
    }
}

/// Verifies, for n = 1, that the central element diag(1, p) scales
/// evaluation-at-identity by alpha_2 and the intertwining integral by
/// alpha_1, tying the two Jacquet characters to the model. All values
/// are exact rationals; the integral's geometric tail is summed
/// formally.
pub fn central_element_check(params: &SatakeParams) -> Result<CentralReport, LocalRepsError> {
    if params.n() != 1 {
        return Err(LocalRepsError::Unsupported(
            "central-element verification is implemented for rank one".into(),
        ));
    }
    if params.residue_degree() != 1 {
        return Err(LocalRepsError::QMustBePrime { q: params.q() });
    }
    let values = params.values()?;
    let cells = subsets(2, 1);
    let z = {
        let mut z = Mat::<QQ>::identity(&QQ, 2);
        *z.at_mut(1, 1) = BigRational::from(BigInt::from(params.p()));
        z
    };
    let mut checks = Vec::new();
    for c in 0..cells.len() {
        let value = eval_model(params, &cells, c, &Mat::<QQ>::identity(&QQ, 2))?;
        let shifted = eval_model(params, &cells, c, &z)?;
        let eigenvalue = values[1].clone();
        let ok = shifted == &eigenvalue * &value;
        checks.push(CentralCheck { functional: "ev1", cell: c, value, shifted, eigenvalue, ok });
    }
    for c in 0..cells.len() {
        let value = intertwining_value(params, &cells, c, false)?;
        let shifted = intertwining_value(params, &cells, c, true)?;
        let eigenvalue = values[0].clone();
        let ok = shifted == &eigenvalue * &value;
        checks.push(CentralCheck {
            functional: "intertwining",
            cell: c,
            value,
            shifted,
            eigenvalue,
            ok,
        });
    }
    let mut roots = tau_eigenvalues(params)?;
    let mut eigen = vec![values[0].clone(), values[1].clone()];
    roots.sort();
    eigen.sort();
    let charpoly = up_matrix(params)?.charpoly();
    let spectrum_matches = charpoly == poly_from_roots(&roots) && roots == eigen;
    Ok(CentralReport { checks, spectrum_matches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_reps::satake::{rational, rational_frac};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, q: u64, vals: &[(i64, i64)]) -> SatakeParams {
        SatakeParams::from_values(
            n,
            q,
            vals.iter().map(|&(a, b)| rational_frac(a, b)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn decomposition_invariants_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [2u64, 3, 5] {
            for _ in 0..40 {
                let dim = rng.gen_range(2..=4);
                let g = loop {
                    let m = Mat::<QQ>::from_rows(
                        (0..dim)
                            .map(|_| {
                                (0..dim)
                                    .map(|_| {
                                        let a = rng.gen_range(-6i64..=6);
                                        let e = rng.gen_range(-2i32..=2);
                                        rational(a)
                                            * rat_pow(&rational(p as i64), e as i64)
                                    })
                                    .collect()
                            })
                            .collect(),
                    );
                    if !m.det().is_zero() {
                        break m;
                    }
                };
                let (b, k) = iwasawa_decompose(&g, p).unwrap();
                assert_eq!(b.mul(&QQ, &k), g);
                for i in 0..dim {
                    for j in 0..i {
                        assert!(b.at(i, j).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let g = Mat::<QQ>::from_rows(vec![
            vec![rational(1), rational(2)],
            vec![rational(2), rational(4)],
        ]);
        assert!(matches!(iwasawa_decompose(&g, 3), Err(LocalRepsError::NotInvertible)));
    }

    #[test]
    fn cells_of_representatives_round_trip() {
        for (n, p) in [(1usize, 5u64), (2, 2), (2, 3)] {
            for members in subsets(2 * n, n) {
                let tau = TauSubset::new(n, members.iter().map(|&i| i + 1).collect()).unwrap();
                let rep = cell_representative(n, &tau);
                assert_eq!(schubert_tau(&rep, n, p).unwrap(), tau);
            }
        }
    }

    #[test]
    fn rank_one_hecke_matrix_oracle() {
        // Expected matrix [[a1, 0], [(q-1) a1 / q, a2]] on the cell basis.
        let p = params(1, 2, &[(2, 1), (3, 1)]);
        let m = up_matrix(&p).unwrap();
        assert_eq!(*m.at(0, 0), rational(2));
        assert_eq!(*m.at(0, 1), rational(0));
        assert_eq!(*m.at(1, 0), rational(1));
        assert_eq!(*m.at(1, 1), rational(3));

        let p5 = params(1, 5, &[(7, 2), (-3, 4)]);
        let m5 = up_matrix(&p5).unwrap();
        assert_eq!(*m5.at(0, 0), rational_frac(7, 2));
        assert_eq!(*m5.at(1, 0), rational_frac(4 * 7, 5 * 2));
        assert_eq!(*m5.at(1, 1), rational_frac(-3, 4));
    }

    #[test]
    fn jacquet_spectrum_for_rank_two() {
        let p = params(2, 2, &[(1, 1), (2, 1), (3, 1), (4, 1)]);
        let report = jacquet_spectrum_check(&p).unwrap();
        assert_eq!(report.degree, 6);
        assert!(report.charpoly_matches);
        assert!(report.regular);
        assert!(!report.semisimplified_only);
    }

    #[test]
    fn spectrum_matches_even_with_coinciding_subset_products() {
        // (1,2,3,6): distinct parameters, but the subset products for
        // {1,4} and {2,3} coincide, so an eigenvalue repeats.
        let p = params(2, 2, &[(1, 1), (2, 1), (3, 1), (6, 1)]);
        let report = jacquet_spectrum_check(&p).unwrap();
        assert!(report.charpoly_matches);
        assert!(report.regular);
    }

    #[test]
    fn repeated_parameters_report_semisimplification_only() {
        let p = params(1, 3, &[(2, 1), (2, 1)]);
        let report = jacquet_spectrum_check(&p).unwrap();
        assert!(report.charpoly_matches);
        assert!(!report.regular);
        assert!(report.semisimplified_only);
    }

    #[test]
    fn rank_one_spectra_over_several_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for q in [2u64, 3, 5] {
            for _ in 0..5 {
                let a = rng.gen_range(1i64..=9);
                let b = loop {
                    let b = rng.gen_range(1i64..=9);
                    if b != a {
                        break b;
                    }
                };
                let p = params(1, q, &[(a, 1), (b, 1)]);
                assert!(jacquet_spectrum_check(&p).unwrap().charpoly_matches);
            }
        }
    }

    #[test]
    fn prime_power_residue_field_is_rejected() {
        let p = SatakeParams::from_values(1, 4, vec![rational(2), rational(3)]).unwrap();
        assert!(matches!(up_matrix(&p), Err(LocalRepsError::QMustBePrime { q: 4 })));
    }

    #[test]
    fn central_element_scales_both_functionals() {
        // q = 2, alphas (2, 3): intertwining values are 1 and 1, and the
        // shifted ones 2 and 2.
        let p = params(1, 2, &[(2, 1), (3, 1)]);
        let report = central_element_check(&p).unwrap();
        assert!(report.all_ok());
        let iw: Vec<_> = report.checks.iter().filter(|c| c.functional == "intertwining").collect();
        assert_eq!(iw[0].value, rational(1));
        assert_eq!(iw[0].shifted, rational(2));
        assert_eq!(iw[1].value, rational(1));
        assert_eq!(iw[1].shifted, rational(2));

        let fractional = params(1, 5, &[(1, 2), (7, 3)]);
        assert!(central_element_check(&fractional).unwrap().all_ok());
        let negative = params(1, 3, &[(-2, 1), (5, 7)]);
        assert!(central_element_check(&negative).unwrap().all_ok());
    }

    #[test]
    fn central_check_guards_its_domain() {
        let p = params(2, 2, &[(1, 1), (2, 1), (3, 1), (4, 1)]);
        assert!(matches!(central_element_check(&p), Err(LocalRepsError::Unsupported(_))));
        let equal = params(1, 3, &[(2, 1), (2, 1)]);
        assert!(matches!(central_element_check(&equal), Err(LocalRepsError::Unsupported(_))));
    }
}
