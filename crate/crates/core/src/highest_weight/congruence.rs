//! Bullet action of the scaling semigroup and congruences between functionals.
//!
//! Elements q t^beta u of the semigroup act through the rational action with
//! the t part rescaled by the dual weight, so that the lowest weight vector is
//! fixed and the admissible lattice is preserved.  On the image of the lattice
//! under xi t^beta, the normalized functionals at two critical indices agree
//! modulo p^beta; the check samples lattice vectors with seeded coefficients
//! and verifies the congruence exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kappa::{kappa_j, KappaFunctional};
use super::rep::HighestWeightLattice;
use super::HighestWeightError;
use crate::linalg::Mat;
use crate::par;
use crate::ring::{Ring, QQ};

/// Semigroup element q t_p^beta u, with q integral of unit determinant and u
/// block lower unipotent of positive depth.
pub struct ParahoricFactorization {
    pub q: Mat<QQ>,
    pub beta: u32,
    pub u_minus: Mat<QQ>,
}

/// Result of a bullet action: the exact vector, and its reduction when a
/// precision was requested.
pub struct BulletResult {
    pub exact: Vec<BigRational>,
    pub reduced: Option<Vec<u64>>,
}

fn p_valuation_ok(x: &BigRational, p: &BigInt) -> bool {
    !(x.denom() % p).is_zero()
}

fn validate_factorization(
    rep: &HighestWeightLattice,
    g: &ParahoricFactorization,
) -> Result<(), HighestWeightError> {
    let two_n = rep.two_n();
    let n = rep.half_rank();
    let p = BigInt::from(rep.p());
    if g.q.rows != two_n || g.q.cols != two_n || g.u_minus.rows != two_n || g.u_minus.cols != two_n {
        return Err(HighestWeightError::NotInParahoric("wrong matrix size".into()));
    }
    for i in 0..two_n {
        for j in 0..two_n {
            if !p_valuation_ok(g.q.at(i, j), &p) {
                return Err(HighestWeightError::NotInParahoric(
                    "q has a p in a denominator".into(),
                ));
            }
        }
    }
    let det = g.q.det();
    if det.is_zero() || !p_valuation_ok(&det, &p) || (det.numer() % &p).is_zero() {
        return Err(HighestWeightError::NotInParahoric(
            "q must have determinant a p-unit".into(),
        ));
    }
    for i in 0..two_n {
        for j in 0..two_n {
            let x = g.u_minus.at(i, j);
            let expect_delta = i == j;
            if i < n || j >= n {
                let ok = if expect_delta { x.is_one() } else { x.is_zero() };
                if !ok {
                    return Err(HighestWeightError::NotInParahoric(
                        "u is not block lower unipotent".into(),
                    ));
                }
            } else {
                // Lower left block: entries divisible by p.
                if !x.denom().is_one() || !(x.numer() % &p).is_zero() {
                    return Err(HighestWeightError::NotInParahoric(
                        "lower block of u must be divisible by p".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Applies t_p^beta with the dual weight normalization to an ambient vector.
pub(super) fn bullet_scale(rep: &HighestWeightLattice, beta: u32, v: &[BigRational]) -> Vec<BigRational> {
    let p = BigInt::from(rep.p());
    v.iter()
        .enumerate()
        .map(|(a, x)| {
            if x.is_zero() {
                return BigRational::zero();
            }
            let e = rep.bullet_exponents[a] * i64::from(beta);
            if e >= 0 {
                x * BigRational::from_integer(p.pow(e as u32))
            } else {
                x / BigRational::from_integer(p.pow(e.unsigned_abs() as u32))
            }
        })
        .collect()
}

/// g bullet v for g = q t^beta u, on an ambient vector of the lattice.
/// The vector must be p-integral; the optional precision reduces the result
/// coordinatewise modulo p^N.
pub fn bullet_action(
    rep: &HighestWeightLattice,
    g: &ParahoricFactorization,
    v: &[BigRational],
    precision: Option<u32>,
) -> Result<BulletResult, HighestWeightError> {
    if v.len() != rep.ambient_dim() {
        return Err(HighestWeightError::VectorDimension {
            expected: rep.ambient_dim(),
            found: v.len(),
        });
    }
    validate_factorization(rep, g)?;
    if !rep.lattice_contains(v) {
        return Err(HighestWeightError::VectorNotIntegral);
    }
    let step1 = rep.act_group(&g.u_minus, v)?;
    let step2 = bullet_scale(rep, g.beta, &step1);
    let exact = rep.act_group(&g.q, &step2)?;
    let reduced = match precision {
        None => None,
        Some(nn) => {
            let ctx = crate::ring::ZModPN::new(rep.p(), nn);
            let mut out = Vec::with_capacity(exact.len());
            for x in &exact {
                let num = ctx.reduce_bigint(x.numer());
                let den = ctx.reduce_bigint(x.denom());
                let den_inv = ctx
                    .inv(&den)
                    .ok_or(HighestWeightError::VectorNotIntegral)?;
                out.push(ctx.mul(&num, &den_inv));
            }
            Some(out)
        }
    };
    Ok(BulletResult { exact, reduced })
}

/// One failed sample: the two functional values and the valuation of their
/// difference.
#[derive(Debug, Clone, Serialize)]
pub struct CongruenceWitness {
    pub sample: usize,
    pub kappa_j: String,
    pub kappa_jp: String,
    pub difference_valuation: Option<i64>,
}

/// Outcome of a congruence run between two critical indices.
#[derive(Debug, Clone, Serialize)]
pub struct CongruenceReport {
    pub j: i64,
    pub jp: i64,
    pub beta: u32,
    pub samples: usize,
    pub pass: bool,
    pub failures: Vec<CongruenceWitness>,
}

/// Congruence over all critical pairs, or the report that there is nothing
/// to compare.
#[derive(Debug, Clone, Serialize)]
pub enum ManinOutcome {
    Checked(Vec<CongruenceReport>),
    NothingToCompare { critical_count: usize },
}

fn valuation_at_least(x: &BigRational, p: &BigInt, beta: u32) -> bool {
    if x.is_zero() {
        return true;
    }
    if (x.denom() % p).is_zero() {
        return false;
    }
    let mut num = x.numer().clone();
    for _ in 0..beta {
        let (q, r) = num_integer::Integer::div_rem(&num, p);
        if !r.is_zero() {
            return false;
        }
        num = q;
    }
    true
}

fn valuation_of(x: &BigRational, p: &BigInt) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let mut v: i64 = 0;
    let mut num = x.numer().abs();
    while (&num % p).is_zero() {
        num /= p;
        v += 1;
    }
    let mut den = x.denom().clone();
    while (&den % p).is_zero() {
        den /= p;
        v -= 1;
    }
    Some(v)
}

/// Checks kappa_j = kappa_jp mod p^beta on the image of the lattice under
/// xi t^beta, over seeded random lattice vectors.
pub fn manin_congruence_check(
    rep: &HighestWeightLattice,
    j: i64,
    jp: i64,
    beta: u32,
    num_samples: usize,
    seed: u64,
) -> Result<CongruenceReport, HighestWeightError> {
    if !rep.crit().contains(j) {
        return Err(HighestWeightError::NotCritical { j });
    }
    if !rep.crit().contains(jp) {
        return Err(HighestWeightError::NotCritical { j: jp });
    }
    let kf = solved(rep, j)?;
    let kfp = solved(rep, jp)?;

    let p = BigInt::from(rep.p());
    let bound = i64::try_from(rep.p().pow(beta)).expect("p^beta fits i64");
    let rows = rep.lattice_rank();

    // Coefficients are drawn sequentially so the run is reproducible
    // independently of the parallel schedule.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<Vec<i64>> = Vec::with_capacity(num_samples);
    for _ in 0..num_samples {
        draws.push((0..rows).map(|_| rng.gen_range(-bound..=bound)).collect());
    }

    let checks = par::map_items(draws.into_iter().enumerate().collect(), |(idx, coeffs)| {
        let mut v = vec![BigRational::zero(); rep.ambient_dim()];
        for (r, &c) in coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let cq = BigRational::from_integer(BigInt::from(c));
            for (a, x) in rep.lattice_row(r).iter().enumerate() {
                if !x.is_zero() {
                    v[a] += &cq * BigRational::from_integer(x.clone());
                }
            }
        }
        let scaled = bullet_scale(rep, beta, &v);
        let a = kf.eval_after_xi(&scaled);
        let b = kfp.eval_after_xi(&scaled);
        let diff = &a - &b;
        let integral = p_valuation_ok(&a, &p) && p_valuation_ok(&b, &p);
        let ok = integral && valuation_at_least(&diff, &p, beta);
        if ok {
            None
        } else {
            Some(CongruenceWitness {
                sample: idx,
                kappa_j: a.to_string(),
                kappa_jp: b.to_string(),
                difference_valuation: valuation_of(&diff, &p),
            })
        }
    });

    let failures: Vec<CongruenceWitness> = checks.into_iter().flatten().collect();
    Ok(CongruenceReport {
        j,
        jp,
        beta,
        samples: num_samples,
        pass: failures.is_empty(),
        failures,
    })
}

fn solved(rep: &HighestWeightLattice, j: i64) -> Result<KappaFunctional, HighestWeightError> {
    let solve = kappa_j(rep, j)?;
    match solve.functional {
        Some(f) => Ok(f),
        None => Err(HighestWeightError::KappaDimension { j, dim: solve.space_dim }),
    }
}

/// Runs the congruence over every unordered pair of critical indices.
pub fn manin_congruence_auto(
    rep: &HighestWeightLattice,
    beta: u32,
    num_samples: usize,
    seed: u64,
) -> Result<ManinOutcome, HighestWeightError> {
    let crit: Vec<i64> = rep.crit().iter().collect();
    if crit.len() < 2 {
        return Ok(ManinOutcome::NothingToCompare { critical_count: crit.len() });
    }
    let mut reports = Vec::new();
    for (a, &j) in crit.iter().enumerate() {
        for &jp in &crit[a + 1..] {
            reports.push(manin_congruence_check(rep, j, jp, beta, num_samples, seed)?);
        }
    }
    Ok(ManinOutcome::Checked(reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highest_weight::rep::HighestWeightLattice;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn identity_factor(rep: &HighestWeightLattice, beta: u32) -> ParahoricFactorization {
        let two_n = rep.two_n();
        ParahoricFactorization {
            q: Mat::<QQ>::identity(&QQ, two_n),
            beta,
            u_minus: Mat::<QQ>::identity(&QQ, two_n),
        }
    }

    #[test]
    fn scaling_fixes_lowest_vector_and_stretches_highest() {
        // Standard module, mu = (1,0): t fixes e2 = v0 and multiplies e1 by p.
        let rep = HighestWeightLattice::build(&[1, 0], 5).unwrap();
        let g = identity_factor(&rep, 1);
        let v0 = rep.v0_ambient().to_vec();
        let out = bullet_action(&rep, &g, &v0, None).unwrap();
        assert_eq!(out.exact, v0);

        let mut e1 = vec![BigRational::zero(); rep.ambient_dim()];
        let idx = (0..rep.ambient_dim())
            .find(|&a| rep.v0_ambient()[a].is_zero())
            .unwrap();
        e1[idx] = rat(1);
        let out = bullet_action(&rep, &g, &e1, None).unwrap();
        let expect: Vec<BigRational> = e1.iter().map(|x| x * rat(5)).collect();
        assert_eq!(out.exact, expect);
    }

    #[test]
    fn rejects_vectors_outside_the_lattice() {
        let rep = HighestWeightLattice::build(&[1, 0], 5).unwrap();
        let g = identity_factor(&rep, 1);
        let v: Vec<BigRational> = rep
            .v0_ambient()
            .iter()
            .map(|x| x / rat(5))
            .collect();
        assert!(matches!(
            bullet_action(&rep, &g, &v, None),
            Err(HighestWeightError::VectorNotIntegral)
        ));
    }

    #[test]
    fn rejects_shallow_lower_unipotent() {
        let rep = HighestWeightLattice::build(&[1, 0], 5).unwrap();
        let mut u = Mat::<QQ>::identity(&QQ, 2);
        *u.at_mut(1, 0) = rat(1);
        let g = ParahoricFactorization { q: Mat::<QQ>::identity(&QQ, 2), beta: 0, u_minus: u };
        assert!(matches!(
            bullet_action(&rep, &g, &rep.v0_ambient().to_vec(), None),
            Err(HighestWeightError::NotInParahoric(_))
        ));
    }

    #[test]
    fn bullet_reduction_matches_exact_values() {
        let rep = HighestWeightLattice::build(&[10, 0], 3).unwrap();
        let mut u = Mat::<QQ>::identity(&QQ, 2);
        *u.at_mut(1, 0) = rat(6);
        let mut q = Mat::<QQ>::identity(&QQ, 2);
        *q.at_mut(0, 1) = rat(2);
        let g = ParahoricFactorization { q, beta: 2, u_minus: u };
        let v = rep.lattice_row(4).to_vec();
        let vq: Vec<BigRational> = v.iter().cloned().map(BigRational::from_integer).collect();
        let out = bullet_action(&rep, &g, &vq, Some(4)).unwrap();
        let reduced = out.reduced.unwrap();
        let ctx = crate::ring::ZModPN::new(3, 4);
        for (x, r) in out.exact.iter().zip(reduced) {
            assert!(x.denom().is_one());
            assert_eq!(ctx.reduce_bigint(x.numer()), r);
        }
    }

    #[test]
    fn congruence_on_xi_v0_gives_exactly_one() {
        let rep = HighestWeightLattice::build(&[10, 0], 5).unwrap();
        for beta in [0u32, 1, 2] {
            for j in [0i64, 4, 10] {
                let f = kappa_j(&rep, j).unwrap().functional.unwrap();
                let scaled = bullet_scale(&rep, beta, rep.v0_ambient());
                assert!(f.eval_after_xi(&scaled).is_one());
            }
        }
    }

    #[test]
    fn symmetric_power_congruence_holds_and_is_reproducible() {
        let rep = HighestWeightLattice::build(&[10, 0], 3).unwrap();
        for beta in [0u32, 1, 2] {
            let r1 = manin_congruence_check(&rep, 2, 7, beta, 40, 99).unwrap();
            assert!(r1.pass, "beta = {beta}: {:?}", r1.failures.first());
            let r2 = manin_congruence_check(&rep, 2, 7, beta, 40, 99).unwrap();
            assert_eq!(
                serde_json::to_string(&r1).unwrap(),
                serde_json::to_string(&r2).unwrap()
            );
        }
    }

    #[test]
    fn single_critical_index_has_nothing_to_compare() {
        let rep = HighestWeightLattice::build(&[1, 0, 0, -1], 5).unwrap();
        match manin_congruence_auto(&rep, 1, 10, 1).unwrap() {
            ManinOutcome::NothingToCompare { critical_count } => assert_eq!(critical_count, 1),
            ManinOutcome::Checked(_) => panic!("expected nothing to compare"),
        }
    }

    #[test]
    fn non_critical_index_is_rejected() {
        let rep = HighestWeightLattice::build(&[10, 0], 3).unwrap();
        assert!(matches!(
            manin_congruence_check(&rep, 0, 11, 1, 5, 1),
            Err(HighestWeightError::NotCritical { j: 11 })
        ));
    }
}
