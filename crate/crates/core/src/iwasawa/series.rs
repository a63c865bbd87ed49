//! Iwasawa power series attached to measures on the rational tower.
//!
//! For odd p the units mod p^beta split as mu_{p-1} x (1 + p)-part.
//! The omega^{m0}-component of a measure is the function nu_{m0}(c) =
//! (p-1)^{-1} sum over the class <a> = c of omega(a)^{-m0} mu([a]),
//! pushed into O[[T]] by (1 + p) -> 1 + T, so that the finite level
//! realizes O[[T]] / ((1+T)^{p^(beta-1)} - 1). Under this convention
//! the pairing integral of omega^{-m0} chi_w against mu equals
//! (p - 1) f_{m0}(chi_w(1+p) - 1), which the tests check exactly.
//!
//! Weierstrass data is certified only when the minimal coefficient
//! valuation is visible at the working precision and first attained
//! with margin at least one below the truncation degree; vanishing
//! data alone never certifies anything.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::measure::{p_power_exponent, MeasureTower};
use super::IwasawaError;
use crate::exactnum::{
    smallest_primitive_root, teichmuller, FiniteCharacter, PadicCyclotomic, PadicTrunc,
};

/// Polynomial truncation of an element of O[[T]]: coefficients of
/// T^0 .. T^M at working precision p^prec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeriesTrunc {
    pub p: u64,
    pub prec: u32,
    pub coeffs: Vec<PadicTrunc>,
}

impl PowerSeriesTrunc {
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.value == 0)
    }

    pub fn coefficient(&self, i: usize) -> Option<&PadicTrunc> {
        self.coeffs.get(i)
    }

    pub fn reduce(&self, prec: u32) -> Self {
        PowerSeriesTrunc {
            p: self.p,
            prec,
            coeffs: self.coeffs.iter().map(|c| c.reduce(prec.min(c.prec))).collect(),
        }
    }

    /// Horner evaluation at a truncated cyclotomic point, used to pair
    /// series against wild characters via T = chi_w(1+p) - 1.
    pub fn eval(&self, t: &PadicCyclotomic) -> PadicCyclotomic {
        let mut acc = PadicCyclotomic::zero(self.p, self.prec, t.wild());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(t).add(&PadicCyclotomic::scalar(*c));
        }
        acc
    }
}

/// Component index m0 pairing with a character of p-power modulus:
/// chi = omega^t * chi_w lands in component m0 = -t mod (p - 1).
pub fn omega_component_of(chi: &FiniteCharacter, p: u64) -> Result<u32, IwasawaError> {
    if p == 2 {
        return Err(IwasawaError::Unsupported("omega components need p odd".into()));
    }
    let m = chi.modulus();
    let c = p_power_exponent(m, p).ok_or(IwasawaError::TwistModulus { modulus: m })?;
    if c == 0 {
        return Err(IwasawaError::TwistModulus { modulus: m });
    }
    let g0 = smallest_primitive_root(p)?;
    let tau = teichmuller(&BigInt::from(g0), p, c)?;
    let v = chi.value_exponent(tau.value).expect("Teichmueller lifts are units");
    let e_grp = chi.group().exponent();
    let step = e_grp / (p - 1);
    debug_assert_eq!(v % step, 0, "tame values are (p-1)-th roots");
    let t = (v / step) % (p - 1);
    Ok(((p - 1 - t) % (p - 1)) as u32)
}

/// Omega^{m0}-isotypic component of a measure as a series truncation
/// of degree max_deg, bounded by the finite-level relation
/// (1+T)^{p^(beta_max - 1)} = 1.
pub fn omega_split_to_series(
    m: &MeasureTower,
    m0: u32,
    max_deg: usize,
) -> Result<PowerSeriesTrunc, IwasawaError> {
    let p = m.p();
    if p == 2 {
        return Err(IwasawaError::Unsupported("the omega splitting needs p odd".into()));
    }
    if !m.tower().is_rational() {
        return Err(IwasawaError::NotRational);
    }
    if u64::from(m0) >= p - 1 {
        return Err(IwasawaError::OmegaComponent { m0, p });
    }
    let beta = m.beta_max();
    let prec = m.prec();
    let mut wild_card = 1u64;
    for _ in 0..beta - 1 {
        wild_card *= p;
    }
    let bound = (wild_card - 1) as usize;
    if max_deg > bound {
        return Err(IwasawaError::BadTruncation { requested: max_deg, bound });
    }
    let modulus = wild_card * p;
    // dlog table for the (1 + p)-part at level beta_max.
    let mut dlog: HashMap<u64, u64> = HashMap::new();
    let mut pow = 1u64;
    for e in 0..wild_card {
        dlog.insert(pow, e);
        pow = (pow as u128 * (1 + p) as u128 % modulus as u128) as u64;
    }
    let labels = &m.tower().level(beta)?.labels;
    let coeffs = &m.level(beta)?.coeffs;
    let mut nu = vec![PadicTrunc::from_u64(p, prec, 0); wild_card as usize];
    for (&a, c) in labels.iter().zip(coeffs) {
        let tau_level = teichmuller(&BigInt::from(a), p, beta)?;
        let one_unit = PadicTrunc::from_u64(p, beta, a).mul(&tau_level.inv()?);
        let e = dlog[&one_unit.value];
        let term = if m0 == 0 {
            *c
        } else {
            let tau = teichmuller(&BigInt::from(a), p, prec)?;
            c.mul(&tau.inv()?.pow(u64::from(m0)))
        };
        nu[e as usize] = nu[e as usize].add(&term);
    }
    let scale = PadicTrunc::from_u64(p, prec, p - 1).inv()?;
    for v in &mut nu {
        *v = v.mul(&scale);
    }
    // c_i = sum_e nu[e] * binomial(e, i) from (1 + T)^e.
    let coeffs = (0..=max_deg)
        .map(|i| {
            let mut acc = PadicTrunc::from_u64(p, prec, 0);
            for (e, v) in nu.iter().enumerate() {
                if v.value == 0 || e < i {
                    continue;
                }
                let b = num_integer::binomial(BigInt::from(e), BigInt::from(i));
                acc = acc.add(&v.mul(&PadicTrunc::new(p, prec, &b)));
            }
            acc
        })
        .collect();
    Ok(PowerSeriesTrunc { p, prec, coeffs })
}

/// Weierstrass data of a certified truncation: mu_inv the minimal
/// coefficient valuation, lambda_inv the first index attaining it,
/// zero_bound = lambda_inv a bound on zeros in the open unit disk.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WeierstrassOutcome {
    Certified { mu_inv: u32, lambda_inv: usize, zero_bound: usize },
    Inconclusive { reason: String },
}

impl WeierstrassOutcome {
    pub fn zero_bound(&self) -> Option<usize> {
        match self {
            WeierstrassOutcome::Certified { zero_bound, .. } => Some(*zero_bound),
            WeierstrassOutcome::Inconclusive { .. } => None,
        }
    }
}

/// Certifies (mu, lambda) from a truncation when the minimum valuation
/// is visible below working precision and attained with margin at
/// least one below the truncation degree.
pub fn weierstrass_invariants(f: &PowerSeriesTrunc) -> WeierstrassOutcome {
    let vals: Vec<u32> = f.coeffs.iter().map(|c| c.valuation()).collect();
    let mu = vals.iter().copied().min().unwrap_or(f.prec);
    if mu >= f.prec {
        return WeierstrassOutcome::Inconclusive {
            reason: "every coefficient vanishes to working precision; raise precision".into(),
        };
    }
    let lambda = vals.iter().position(|&v| v == mu).expect("minimum is attained");
    if lambda + 1 >= f.coeffs.len() {
        return WeierstrassOutcome::Inconclusive {
            reason: "minimal valuation first attained at the truncation boundary; \
                     extend the series"
                .into(),
        };
    }
    WeierstrassOutcome::Certified { mu_inv: mu, lambda_inv: lambda, zero_bound: lambda }
}

#[cfg(test)]
mod tests {
    use super::super::measure::random_ordinary;
    use super::super::tower::ClassGroupTower;
    use super::*;
    use crate::exactnum::embed_cyclotomic;
    use std::sync::Arc;

    fn series(p: u64, prec: u32, coeffs: &[i64]) -> PowerSeriesTrunc {
        PowerSeriesTrunc {
            p,
            prec,
            coeffs: coeffs.iter().map(|&c| PadicTrunc::new(p, prec, &BigInt::from(c))).collect(),
        }
    }

    #[test]
    fn dirac_at_identity_splits_into_constants() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = super::super::measure::MeasureTower::dirac(
            tower.clone(),
            4,
            tower.index_of(2, 1).unwrap(),
        )
        .unwrap();
        let quarter = PadicTrunc::from_u64(5, 4, 4).inv().unwrap();
        for m0 in 0..4 {
            let f = omega_split_to_series(&m, m0, 3).unwrap();
            assert_eq!(f.coeffs[0], quarter, "component {m0} is the constant 1/(p-1)");
            assert!(f.coeffs[1..].iter().all(|c| c.value == 0));
        }
    }

    #[test]
    fn teichmueller_measure_concentrates_in_component_one() {
        let p = 5u64;
        let prec = 4u32;
        let tower = Arc::new(ClassGroupTower::rational(p, 2).unwrap());
        let raw: Vec<Vec<PadicTrunc>> = tower
            .levels()
            .iter()
            .map(|lvl| {
                lvl.labels
                    .iter()
                    .map(|&a| teichmuller(&BigInt::from(a), p, prec).unwrap())
                    .collect()
            })
            .collect();
        let one = PadicTrunc::from_u64(p, prec, 1);
        let m = super::super::measure::MeasureTower::from_raw(tower, raw, &one, 1, None).unwrap();
        for m0 in 0..4 {
            let f = omega_split_to_series(&m, m0, 4).unwrap();
            assert_eq!(m0 == 1, !f.is_zero(), "only component 1 survives");
        }
    }

    #[test]
    fn weierstrass_worked_examples() {
        // T^2 * unit.
        assert_eq!(
            weierstrass_invariants(&series(3, 5, &[0, 0, 1, 1])),
            WeierstrassOutcome::Certified { mu_inv: 0, lambda_inv: 2, zero_bound: 2 }
        );
        // p * unit.
        assert_eq!(
            weierstrass_invariants(&series(3, 5, &[3, 3, 6, 3])),
            WeierstrassOutcome::Certified { mu_inv: 1, lambda_inv: 0, zero_bound: 0 }
        );
        // (T - p)(1 + T) truncated far beyond its degree.
        let mut coeffs = vec![-3i64, -2, 1];
        coeffs.extend(std::iter::repeat(0).take(8));
        assert_eq!(
            weierstrass_invariants(&series(3, 5, &coeffs)),
            WeierstrassOutcome::Certified { mu_inv: 0, lambda_inv: 1, zero_bound: 1 }
        );
        // Vanishing data never certifies.
        assert!(matches!(
            weierstrass_invariants(&series(3, 2, &[9, 18, 9])),
            WeierstrassOutcome::Inconclusive { .. }
        ));
        // Minimum only at the boundary: no margin, no certificate.
        assert!(matches!(
            weierstrass_invariants(&series(3, 5, &[3, 3, 1])),
            WeierstrassOutcome::Inconclusive { .. }
        ));
    }

    #[test]
    fn zero_bound_is_stable_under_precision_refinement() {
        let exact = [9i64, 6, 3, 27];
        let low = weierstrass_invariants(&series(3, 2, &exact));
        let high = weierstrass_invariants(&series(3, 6, &exact));
        let (bl, bh) = (low.zero_bound().unwrap(), high.zero_bound().unwrap());
        assert!(bh <= bl);
        assert_eq!(bh, 1);
    }

    #[test]
    fn split_rejects_out_of_range_requests() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = random_ordinary(&tower, 4, 3);
        assert!(matches!(
            omega_split_to_series(&m, 4, 2),
            Err(IwasawaError::OmegaComponent { m0: 4, p: 5 })
        ));
        assert!(matches!(
            omega_split_to_series(&m, 0, 5),
            Err(IwasawaError::BadTruncation { requested: 5, bound: 4 })
        ));
    }

    /// Exact pairing at full truncation degree: for every character
    /// chi mod p^2, the integral of chi equals (p - 1) times the
    /// chi-component series evaluated at chi(1 + p) - 1. This pins the
    /// sign and normalization of the splitting against the direct
    /// finite sums.
    #[test]
    fn series_pairing_matches_direct_integrals() {
        let p = 5u64;
        let prec = 6u32;
        let tower = Arc::new(ClassGroupTower::rational(p, 2).unwrap());
        let m = random_ordinary(&tower, prec, 77);
        let full: Vec<PowerSeriesTrunc> = (0..(p - 1) as u32)
            .map(|m0| omega_split_to_series(&m, m0, (p - 1) as usize).unwrap())
            .collect();
        let pm1 = PadicTrunc::from_u64(p, prec, p - 1);
        let one = PadicCyclotomic::one(p, prec);
        for chi in FiniteCharacter::all_characters(p * p) {
            let lhs = m.integrate_character(&chi).unwrap().value;
            let m0 = omega_component_of(&chi, p).unwrap();
            let zeta = embed_cyclotomic(&chi.value(1 + p).unwrap(), p, prec).unwrap();
            let rhs = full[m0 as usize].eval(&zeta.sub(&one)).scale(&pm1);
            assert!(lhs.equals(&rhs), "pairing fails for a character in component {m0}");
        }
    }
}
