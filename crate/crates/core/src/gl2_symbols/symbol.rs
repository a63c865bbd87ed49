//! Eigenvectors of the Hecke action viewed as functionals, and their
//! p-stabilization to the level divisible by p.
//!
//! A functional phi at level N prime to p produces two functionals at
//! level Np: phi itself reinterpreted (paths decomposed at the bigger
//! level evaluate the same), and phi twisted through w = (p,0;0,1).
//! The combination p^h (phi - alpha^{-1} phi_w), with alpha the
//! slope-h root of X^2 - a_p X + p^(k-1) and h its valuation, is a
//! U_p eigenfunctional with eigenvalue alpha; the construction checks
//! that identity on every free generator before returning.

use super::p1::{adjugate, apply_to_cusp, Mat2};
use super::poly::act;
use super::space::{checked_prime_power, row_times, SymbolSpace};
use super::Gl2Error;
use crate::exactnum::padic::bigint_valuation;
use crate::exactnum::{rational_trunc, PadicTrunc};
use crate::linalg::Mat;
use crate::ring::QQ;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct EigenSymbol {
    space: Arc<SymbolSpace>,
    sign: i8,
    phi_quot: Vec<BigRational>,
    phi_free: Vec<BigRational>,
    cuts: BTreeMap<u64, i64>,
}

/// Cuts out the one-dimensional joint eigenspace for the listed
/// (prime, eigenvalue) pairs and the sign of the eta involution, and
/// returns it as a functional row over the free generators, scaled to
/// a primitive integer vector.
pub fn eigen_symbol(
    space: &Arc<SymbolSpace>,
    cuts: &[(u64, i64)],
    sign: i8,
) -> Result<EigenSymbol, Gl2Error> {
    assert!(sign == 1 || sign == -1, "sign must be a unit");
    let qq = QQ;
    let dim = space.dimension();
    let mut stacked: Vec<Vec<BigRational>> = Vec::with_capacity(dim * (cuts.len() + 1));
    let mut push_constraint = |m: &Mat<QQ>, lambda: i64| {
        let t = m.transpose(&qq);
        for r in 0..dim {
            let mut row = t.row(r).to_vec();
            row[r] -= BigRational::from(BigInt::from(lambda));
            stacked.push(row);
        }
    };
    for &(ell, a) in cuts {
        push_constraint(&space.hecke_matrix(ell)?, a);
    }
    push_constraint(&space.eta_matrix(), sign as i64);

    let stacked = Mat::<QQ>::from_rows(stacked);
    let kernel = stacked.nullspace(&qq);
    if kernel.len() != 1 {
        return Err(Gl2Error::AmbiguousEigenspace { dim: kernel.len() });
    }
    let phi_quot = kernel.into_iter().next().expect("one basis vector");
    let phi_free = space.functional_from_quotient(&phi_quot);
    let scale = primitive_scale(&phi_free);
    let phi_quot = phi_quot.iter().map(|c| c * &scale).collect();
    let phi_free = phi_free.iter().map(|c| c * &scale).collect();
    Ok(EigenSymbol {
        space: Arc::clone(space),
        sign,
        phi_quot,
        phi_free,
        cuts: cuts.iter().copied().collect(),
    })
}

/// The factor turning a nonzero rational vector into a primitive
/// integer vector with positive leading entry.
fn primitive_scale(v: &[BigRational]) -> BigRational {
    let mut denom_lcm = BigInt::one();
    let mut numer_gcd = BigInt::zero();
    let mut leading_negative = false;
    let mut seen = false;
    for c in v {
        if c.is_zero() {
            continue;
        }
        if !seen {
            leading_negative = c.is_negative();
            seen = true;
        }
        denom_lcm = denom_lcm.lcm(c.denom());
        numer_gcd = numer_gcd.gcd(c.numer());
    }
    assert!(seen, "eigenvector must be nonzero");
    let sign = if leading_negative { -BigInt::one() } else { BigInt::one() };
    BigRational::new(sign * denom_lcm, numer_gcd)
}

impl EigenSymbol {
    pub fn space(&self) -> &Arc<SymbolSpace> {
        &self.space
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn cuts(&self) -> &BTreeMap<u64, i64> {
        &self.cuts
    }

    pub fn functional(&self) -> &[BigRational] {
        &self.phi_free
    }

    /// Value on the path between two cusps carrying a coefficient
    /// form.
    pub fn evaluate(
        &self,
        form: &[BigRational],
        from: (i64, i64),
        to: (i64, i64),
    ) -> BigRational {
        let mut out = BigRational::zero();
        for (idx, c) in self.space.path_free(form, from, to) {
            out += c * &self.phi_free[idx];
        }
        out
    }

    /// Eigenvalue of T_ell (or U_ell) on this symbol; fails if the
    /// operator does not act as a scalar on it.
    pub fn eigenvalue(&self, ell: u64) -> Result<BigRational, Gl2Error> {
        let image = row_times(&self.phi_quot, &self.space.hecke_matrix(ell)?);
        let lead = self
            .phi_quot
            .iter()
            .position(|c| !c.is_zero())
            .expect("eigenvector is nonzero");
        let lambda = &image[lead] / &self.phi_quot[lead];
        for (a, b) in image.iter().zip(&self.phi_quot) {
            if *a != b * &lambda {
                return Err(Gl2Error::NotAnEigenvector { ell });
            }
        }
        Ok(lambda)
    }
}

#[derive(Debug, Clone)]
pub struct StabilizedSymbol {
    space: Arc<SymbolSpace>,
    sign: i8,
    a_p: BigInt,
    slope: u32,
    alpha_unit: PadicTrunc,
    rows: Vec<PadicTrunc>,
}

/// Stabilizes an eigenfunctional from level N to level Np using the
/// finite-slope root of its p-th Hecke polynomial. Requires a_p != 0;
/// slope zero is the ordinary case, and a positive slope is carried as
/// an explicit power of p scaling the whole functional (so entries
/// stay integral and the eigenvalue is alpha = alpha_unit p^slope).
pub fn ordinary_stabilize(eigen: &EigenSymbol) -> Result<StabilizedSymbol, Gl2Error> {
    let base = eigen.space();
    let (p, prec, weight) = (base.p(), base.prec(), base.weight());
    let a_p = eigen.eigenvalue(p)?;
    if !a_p.is_integer() {
        return Err(Gl2Error::NonIntegralEigenvalue { p });
    }
    let a_p = a_p.to_integer();
    if a_p.is_zero() {
        return Err(Gl2Error::NotOrdinary { p });
    }
    let slope = bigint_valuation(&a_p, p).expect("nonzero integer") as u32;
    if 2 * slope >= weight - 1 {
        return Err(Gl2Error::SlopeOutOfRange { slope, weight });
    }
    let modulus = checked_prime_power(p, prec).ok_or(Gl2Error::PrecisionOverflow { p, prec })?;

    // Unit root of X^2 - (a_p / p^h) X + p^(k-1-2h) by Newton from the
    // residue of the linear coefficient.
    let b_int = &a_p / BigInt::from(p).pow(slope);
    let b = (&b_int % BigInt::from(modulus)).mod_floor(&BigInt::from(modulus));
    let b = u64::try_from(&b).expect("reduced below the modulus");
    let c_exp = weight - 1 - 2 * slope;
    let c = if c_exp >= prec { 0 } else { checked_prime_power(p, c_exp).expect("below prec") % modulus };
    let alpha = unit_quadratic_root(modulus, p, b, c);
    let alpha_unit = PadicTrunc::from_u64(p, prec, alpha);

    let stab_space = Arc::new(SymbolSpace::present_internal(base.level() * p, weight, p, prec)?);
    let w: Mat2 = [[p as i64, 0], [0, 1]];
    let w_adj = adjugate(w);
    let p_pow_slope = BigRational::from(BigInt::from(p).pow(slope));
    let alpha_unit_inv = alpha_unit.inv()?;

    let mut rows = Vec::with_capacity(stab_space.free_rank());
    for g in 0..stab_space.free_rank() {
        let (form, from, to) = stab_space.generator_path(g);
        let direct = eigen.evaluate(&form, from, to);
        let twisted =
            eigen.evaluate(&act(&form, w_adj), apply_to_cusp(w, from), apply_to_cusp(w, to));
        let direct = rational_trunc(&(direct * &p_pow_slope), p, prec)?;
        let twisted = rational_trunc(&twisted, p, prec)?;
        rows.push(direct.sub(&alpha_unit_inv.mul(&twisted)));
    }

    let stab = StabilizedSymbol {
        space: stab_space,
        sign: eigen.sign(),
        a_p,
        slope,
        alpha_unit,
        rows,
    };
    stab.verify_up_eigen()?;
    Ok(stab)
}

/// Newton iteration for the unit root of X^2 - bX + c modulo p^prec,
/// where b is a unit and c is divisible by p.
fn unit_quadratic_root(modulus: u64, p: u64, b: u64, c: u64) -> u64 {
    debug_assert!(b % p != 0);
    debug_assert!(c % p == 0);
    let m = modulus as u128;
    let f = |x: u128| -> u128 { (x * x % m + c as u128 + m - (b as u128 * x % m) % m) % m };
    let mut x = (b % p) as u128;
    // Quadratic convergence; the iteration count covers prec digits.
    for _ in 0..64 - (modulus.leading_zeros()) {
        let deriv = (2 * x % m + m - (b as u128) % m) % m;
        let dinv = mod_inverse(deriv as u64, modulus) as u128;
        let step = f(x) * dinv % m;
        x = (x + m - step) % m;
    }
    assert_eq!(f(x), 0, "root must vanish at full precision");
    assert!(x % p as u128 != 0, "root must be a unit");
    x as u64
}

fn mod_inverse(a: u64, modulus: u64) -> u64 {
    let e = i128::extended_gcd(&(a as i128), &(modulus as i128));
    assert_eq!(e.gcd, 1, "inverse of a non-unit");
    e.x.rem_euclid(modulus as i128) as u64
}

impl StabilizedSymbol {
    pub fn space(&self) -> &Arc<SymbolSpace> {
        &self.space
    }

    pub fn p(&self) -> u64 {
        self.space.p()
    }

    pub fn prec(&self) -> u32 {
        self.space.prec()
    }

    pub fn weight(&self) -> u32 {
        self.space.weight()
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn a_p(&self) -> &BigInt {
        &self.a_p
    }

    pub fn slope(&self) -> u32 {
        self.slope
    }

    /// Unit part of the U_p eigenvalue.
    pub fn alpha_unit(&self) -> &PadicTrunc {
        &self.alpha_unit
    }

    /// The full eigenvalue alpha_unit p^slope at working precision.
    pub fn alpha(&self) -> PadicTrunc {
        let p_pow = PadicTrunc::from_u64(self.p(), self.prec(), self.p()).pow(self.slope as u64);
        self.alpha_unit.mul(&p_pow)
    }

    pub fn rows(&self) -> &[PadicTrunc] {
        &self.rows
    }

    /// Value on the path between two cusps carrying a form with
    /// p-integral coefficients.
    pub fn evaluate(
        &self,
        form: &[BigRational],
        from: (i64, i64),
        to: (i64, i64),
    ) -> Result<PadicTrunc, Gl2Error> {
        let mut out = PadicTrunc::from_u64(self.p(), self.prec(), 0);
        for (idx, c) in self.space.path_free(form, from, to) {
            let c = rational_trunc(&c, self.p(), self.prec())?;
            out = out.add(&self.rows[idx].mul(&c));
        }
        Ok(out)
    }

    /// Recomputes U_p on every free generator and compares with the
    /// claimed eigenvalue; failure reports the offending generator.
    fn verify_up_eigen(&self) -> Result<(), Gl2Error> {
        let alpha = self.alpha();
        for g in 0..self.space.free_rank() {
            let mut lhs = PadicTrunc::from_u64(self.p(), self.prec(), 0);
            for (idx, c) in self.space.hecke_image_free(self.p(), g) {
                let c = rational_trunc(&c, self.p(), self.prec())?;
                lhs = lhs.add(&self.rows[idx].mul(&c));
            }
            if lhs != alpha.mul(&self.rows[g]) {
                return Err(Gl2Error::StabilizationFailed { generator: g });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl2_symbols::space::build_space;

    fn rational(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn weight_two_eigen(sign: i8) -> EigenSymbol {
        let space = Arc::new(build_space(11, 2, 3, 8).unwrap());
        eigen_symbol(&space, &[(2, -2)], sign).unwrap()
    }

    fn delta_eigen(sign: i8, p: u64, prec: u32) -> EigenSymbol {
        let space = Arc::new(build_space(1, 12, p, prec).unwrap());
        eigen_symbol(&space, &[(2, -24)], sign).unwrap()
    }

    #[test]
    fn weight_two_eigenvalues_match_the_curve() {
        let phi = weight_two_eigen(1);
        for (ell, a) in [(2u64, -2i64), (3, -1), (5, 1), (7, -2), (13, 4), (19, 0)] {
            assert_eq!(phi.eigenvalue(ell).unwrap(), rational(a), "a_{ell}");
        }
    }

    #[test]
    fn ramanujan_eigenvalues_from_the_symbol() {
        let phi = delta_eigen(1, 11, 6);
        for (ell, a) in [(2u64, -24i64), (3, 252), (5, 4830), (7, -16744), (11, 534612)] {
            assert_eq!(phi.eigenvalue(ell).unwrap(), rational(a), "tau({ell})");
        }
    }

    #[test]
    fn both_signs_exist_and_differ() {
        let plus = weight_two_eigen(1);
        let minus = weight_two_eigen(-1);
        assert_ne!(plus.functional(), minus.functional());
        // Without the sign cut the a_2 eigenspace is two dimensional.
        let space = Arc::new(build_space(11, 2, 3, 8).unwrap());
        let qq = QQ;
        let t2 = space.hecke_matrix(2).unwrap().transpose(&qq);
        let shifted = t2.sub(&qq, &Mat::<QQ>::identity(&qq, 3).scale(&qq, &rational(-2)));
        assert_eq!(shifted.nullspace(&qq).len(), 2);
    }

    #[test]
    fn functional_is_primitive_integral() {
        let phi = delta_eigen(1, 11, 6);
        let mut content = BigInt::zero();
        for c in phi.functional() {
            assert!(c.is_integer());
            content = content.gcd(&c.to_integer());
        }
        assert_eq!(content, BigInt::one());
    }

    #[test]
    fn stabilization_of_the_curve_at_three() {
        // alpha is the unit root of X^2 + X + 3.
        let stab = ordinary_stabilize(&weight_two_eigen(1)).unwrap();
        assert_eq!(stab.slope(), 0);
        assert_eq!(stab.a_p(), &BigInt::from(-1));
        let alpha = stab.alpha();
        let lhs = alpha.mul(&alpha).add(&alpha).add(&PadicTrunc::from_u64(3, 8, 3));
        assert_eq!(lhs, PadicTrunc::from_u64(3, 8, 0));
        assert_eq!(alpha.value % 3, 2, "unit root is -1 mod 3");
    }

    #[test]
    fn stabilization_of_delta_at_eleven() {
        let stab = ordinary_stabilize(&delta_eigen(1, 11, 6)).unwrap();
        assert_eq!(stab.slope(), 0);
        // tau(11) = 534612 = 1 mod 11, so alpha = 1 mod 11.
        assert_eq!(stab.alpha().value % 11, 1);
        // alpha^2 - tau(11) alpha + 11^11 = 0 at working precision.
        let a = stab.alpha();
        let tau11 = PadicTrunc::from_u64(11, 6, 534612);
        let pk = PadicTrunc::from_u64(11, 6, 0); // 11^11 vanishes mod 11^6
        let lhs = a.mul(&a).sub(&tau11.mul(&a)).add(&pk);
        assert_eq!(lhs.value, 0);
    }

    #[test]
    fn supersingular_prime_is_rejected() {
        let space = Arc::new(build_space(11, 2, 19, 4).unwrap());
        let phi = eigen_symbol(&space, &[(2, -2)], 1).unwrap();
        assert!(matches!(
            ordinary_stabilize(&phi),
            Err(Gl2Error::NotOrdinary { p: 19 })
        ));
    }

    #[test]
    fn positive_slope_within_range_is_rejected_at_weight_two() {
        // a_2 = -2 at weight 2 has slope 1 >= (k-1)/2.
        let space = Arc::new(build_space(11, 2, 2, 8).unwrap());
        let phi = eigen_symbol(&space, &[(3, -1)], 1).unwrap();
        assert!(matches!(
            ordinary_stabilize(&phi),
            Err(Gl2Error::SlopeOutOfRange { slope: 1, .. })
        ));
    }
}
