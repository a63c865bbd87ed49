//! Weight-k level-N symbol spaces presented by generators and
//! relations.
//!
//! Free generators are pairs (monomial of degree k-2, class in
//! P^1(Z/N)); the defining relations are g + g s = 0 and
//! g + g t + g t^2 = 0 for s = (0,-1;1,0), t = (0,-1;1,-1), with
//! (P, x) h = (P|h, x h). The quotient is where path evaluation,
//! Hecke action and eigenvector extraction happen; functionals are
//! carried as rows over the free generators so that paths pair
//! against them by plain dot products.

use super::p1::{adjugate, apply_to_cusp, mat_mul, normalize_cusp, Mat2, P1, ETA, SIGMA, TAU};
use super::paths::unimodular_chain;
use super::poly::{act, monomial};
use super::Gl2Error;
use crate::exactnum::padic::is_prime;
use crate::linalg::Mat;
use crate::ring::QQ;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Quotient dimensions for presentations whose ranks are documented
/// independently; construction cross-checks against this table.
fn known_quotient_dimension(level: u64, weight: u32) -> Option<usize> {
    match (level, weight) {
        (1, 12) => Some(3),
        (11, 2) => Some(3),
        (11, 12) => Some(22),
        (33, 2) => Some(9),
        (77, 2) => Some(17),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct SymbolSpace {
    level: u64,
    weight: u32,
    p: u64,
    prec: u32,
    p1: P1,
    free_rank: usize,
    basis_gens: Vec<usize>,
    pi: Mat<QQ>,
    relation_rank: usize,
}

/// Checks the shape arguments and presents the quotient. The prime p
/// and the working precision are carried along for the stabilization
/// and tower stages; p must not divide the level and p^prec must stay
/// within machine word range.
pub fn build_space(level: u64, weight: u32, p: u64, prec: u32) -> Result<SymbolSpace, Gl2Error> {
    if level == 0 {
        return Err(Gl2Error::BadLevel { level });
    }
    if weight < 2 {
        return Err(Gl2Error::WeightTooSmall { weight });
    }
    if weight % 2 != 0 {
        return Err(Gl2Error::OddWeight { weight });
    }
    if !is_prime(p) {
        return Err(Gl2Error::NotPrime { p });
    }
    if level % p == 0 {
        return Err(Gl2Error::LevelDivisibleByP { p, level });
    }
    if prec == 0 || checked_prime_power(p, prec).is_none() {
        return Err(Gl2Error::PrecisionOverflow { p, prec });
    }
    SymbolSpace::present(level, weight, p, prec)
}

/// p^prec if it fits a signed word, used as a guard before modular
/// contexts are built downstream.
pub(super) fn checked_prime_power(p: u64, prec: u32) -> Option<u64> {
    let mut out: u64 = 1;
    for _ in 0..prec {
        out = out.checked_mul(p)?;
    }
    if out < (1u64 << 63) {
        Some(out)
    } else {
        None
    }
}

impl SymbolSpace {
    /// Presentation without the p-coprimality guard, for the
    /// stabilized level Np where p divides the level by construction.
    pub(super) fn present_internal(
        level: u64,
        weight: u32,
        p: u64,
        prec: u32,
    ) -> Result<Self, Gl2Error> {
        Self::present(level, weight, p, prec)
    }

    fn present(level: u64, weight: u32, p: u64, prec: u32) -> Result<Self, Gl2Error> {
        let qq = QQ;
        let p1 = P1::new(level);
        let deg = (weight - 2) as usize;
        let free_rank = p1.len() * (deg + 1);
        let gen_index = |i: usize, d: usize| i * (deg + 1) + d;

        let tau_sq = mat_mul(TAU, TAU);
        let mut relations: Vec<Vec<BigRational>> = Vec::with_capacity(2 * free_rank);
        for i in 0..p1.len() {
            for d in 0..=deg {
                let mono = monomial(deg, d);
                let mut two = vec![BigRational::zero(); free_rank];
                two[gen_index(i, d)] += BigRational::one();
                accumulate(&mut two, gen_index, p1.act(i, SIGMA), &act(&mono, SIGMA));
                relations.push(two);

                let mut three = vec![BigRational::zero(); free_rank];
                three[gen_index(i, d)] += BigRational::one();
                accumulate(&mut three, gen_index, p1.act(i, TAU), &act(&mono, TAU));
                accumulate(&mut three, gen_index, p1.act(i, tau_sq), &act(&mono, tau_sq));
                relations.push(three);
            }
        }

        let mut rel_mat = Mat::<QQ>::from_rows(relations);
        let pivots = rel_mat.rref(&qq);
        let relation_rank = pivots.len();
        let basis_gens: Vec<usize> =
            (0..free_rank).filter(|j| !pivots.contains(j)).collect();
        let dim = basis_gens.len();
        if let Some(expected) = known_quotient_dimension(level, weight) {
            if dim != expected {
                return Err(Gl2Error::DimensionMismatch { level, weight, expected, found: dim });
            }
        }

        // pi maps a free generator to quotient coordinates: basis
        // generators map to themselves, each pivot column to minus the
        // tail of its reduced relation row.
        let mut pi = Mat::<QQ>::zero(&qq, free_rank, dim);
        for (bi, &j) in basis_gens.iter().enumerate() {
            *pi.at_mut(j, bi) = BigRational::one();
        }
        for (r, &c) in pivots.iter().enumerate() {
            for (bi, &j) in basis_gens.iter().enumerate() {
                *pi.at_mut(c, bi) = -rel_mat.at(r, j).clone();
            }
        }

        Ok(SymbolSpace { level, weight, p, prec, p1, free_rank, basis_gens, pi, relation_rank })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Degree of the coefficient forms, weight - 2.
    pub fn degree(&self) -> usize {
        (self.weight - 2) as usize
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn dimension(&self) -> usize {
        self.basis_gens.len()
    }

    pub fn relation_rank(&self) -> usize {
        self.relation_rank
    }

    pub fn p1(&self) -> &P1 {
        &self.p1
    }

    pub fn gen_index(&self, class: usize, d: usize) -> usize {
        debug_assert!(d <= self.degree());
        class * (self.degree() + 1) + d
    }

    pub fn decode_gen(&self, g: usize) -> (usize, usize) {
        (g / (self.degree() + 1), g % (self.degree() + 1))
    }

    /// Quotient coordinates of a sparse free-module vector.
    pub fn project(&self, sparse: &[(usize, BigRational)]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.dimension()];
        for (idx, c) in sparse {
            if c.is_zero() {
                continue;
            }
            for (bi, e) in self.pi.row(*idx).iter().enumerate() {
                if !e.is_zero() {
                    out[bi] += c * e;
                }
            }
        }
        out
    }

    /// Extends a functional given on quotient coordinates to a row
    /// over the free generators; the row kills every relation.
    pub fn functional_from_quotient(&self, f: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(f.len(), self.dimension());
        self.pi.mul_vec(&QQ, f)
    }

    /// The free-module decomposition of the path from one cusp to
    /// another carrying a coefficient form, as index/coefficient
    /// pairs. Cusps are projective pairs with (1, 0) = infinity.
    pub fn path_free(
        &self,
        form: &[BigRational],
        from: (i64, i64),
        to: (i64, i64),
    ) -> Vec<(usize, BigRational)> {
        assert_eq!(form.len(), self.degree() + 1);
        let mut out = Vec::new();
        self.push_chain(form, to, false, &mut out);
        self.push_chain(form, from, true, &mut out);
        out
    }

    fn push_chain(
        &self,
        form: &[BigRational],
        cusp: (i64, i64),
        negate: bool,
        out: &mut Vec<(usize, BigRational)>,
    ) {
        let cusp = normalize_cusp(cusp);
        if cusp.1 == 0 {
            return;
        }
        for g in unimodular_chain(cusp) {
            let class = self.p1.index_of(g[1][0], g[1][1]);
            let moved = act(form, g);
            for (d, c) in moved.into_iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                out.push((self.gen_index(class, d), if negate { -c } else { c }));
            }
        }
    }

    /// The path presentation of a free generator: a form and two cusps
    /// whose decomposition projects back to the generator itself.
    pub fn generator_path(&self, g: usize) -> (Vec<BigRational>, (i64, i64), (i64, i64)) {
        let (class, d) = self.decode_gen(g);
        let gamma = self.p1.lift(class);
        let form = act(&monomial(self.degree(), d), adjugate(gamma));
        let from = normalize_cusp((gamma[0][1], gamma[1][1]));
        let to = normalize_cusp((gamma[0][0], gamma[1][0]));
        (form, from, to)
    }

    fn coset_reps(&self, ell: u64) -> Vec<Mat2> {
        let l = ell as i64;
        let mut reps: Vec<Mat2> = (0..l).map(|a| [[1, a], [0, l]]).collect();
        if self.level % ell != 0 {
            reps.push([[l, 0], [0, 1]]);
        }
        reps
    }

    /// Image of a free generator under the Hecke sum as a sparse free
    /// vector; the decomposition choice is immaterial after projection
    /// or under any functional that kills the relations.
    pub fn hecke_image_free(&self, ell: u64, g: usize) -> Vec<(usize, BigRational)> {
        let (form, from, to) = self.generator_path(g);
        let mut out = Vec::new();
        for m in self.coset_reps(ell) {
            let moved = act(&form, adjugate(m));
            let f2 = apply_to_cusp(m, from);
            let t2 = apply_to_cusp(m, to);
            out.extend(self.path_free(&moved, f2, t2));
        }
        out
    }

    /// Matrix of T_ell (or U_ell when ell divides the level) on the
    /// quotient, columns indexed by basis generators.
    pub fn hecke_matrix(&self, ell: u64) -> Result<Mat<QQ>, Gl2Error> {
        if !is_prime(ell) {
            return Err(Gl2Error::NotPrime { p: ell });
        }
        let qq = QQ;
        let mut out = Mat::<QQ>::zero(&qq, self.dimension(), self.dimension());
        for (col, &g) in self.basis_gens.iter().enumerate() {
            let image = self.project(&self.hecke_image_free(ell, g));
            for (row, v) in image.into_iter().enumerate() {
                *out.at_mut(row, col) = v;
            }
        }
        Ok(out)
    }

    /// The involution (P, (c : d)) -> (P|eta, (-c : d)) on the
    /// quotient; it commutes with every Hecke operator and splits the
    /// space into plus and minus parts.
    pub fn eta_matrix(&self) -> Mat<QQ> {
        let qq = QQ;
        let deg = self.degree();
        let mut out = Mat::<QQ>::zero(&qq, self.dimension(), self.dimension());
        for (col, &g) in self.basis_gens.iter().enumerate() {
            let (class, d) = self.decode_gen(g);
            let target = self.p1.act(class, ETA);
            let coeffs = act(&monomial(deg, d), ETA);
            let sparse: Vec<(usize, BigRational)> = coeffs
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (self.gen_index(target, e), c))
                .collect();
            let image = self.project(&sparse);
            for (row, v) in image.into_iter().enumerate() {
                *out.at_mut(row, col) = v;
            }
        }
        out
    }
}

fn accumulate(
    row: &mut [BigRational],
    gen_index: impl Fn(usize, usize) -> usize,
    class: usize,
    coeffs: &[BigRational],
) {
    for (d, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            row[gen_index(class, d)] += c;
        }
    }
}

/// Row vector times matrix, the action of an operator on functionals.
pub fn row_times(v: &[BigRational], m: &Mat<QQ>) -> Vec<BigRational> {
    assert_eq!(v.len(), m.rows);
    let mut out = vec![BigRational::zero(); m.cols];
    for (r, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (j, e) in m.row(r).iter().enumerate() {
            if !e.is_zero() {
                out[j] += c * e;
            }
        }
    }
    out
}
