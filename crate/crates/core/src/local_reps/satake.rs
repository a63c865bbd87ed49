//! Satake parameters of an unramified principal series of GL(2n) and the
//! characteristic polynomial of the block-parahoric Hecke operator.
//!
//! Each parameter carries an exact integer valuation and optionally an
//! exact rational value; valuation-only data suffices for the ordinarity
//! tests, while polynomial identities require values. The characteristic
//! polynomial on parahoric invariants is the product of X minus
//! q^{n(1-n)/2} alpha^tau over the n-element subsets tau of {1..2n};
//! n(n-1) is even, so the q-power is an integer and no square root of q
//! is ever needed here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use super::LocalRepsError;
use crate::exactnum::padic::padic_valuation;

/// One Hecke parameter: its p-adic valuation, and its exact value when
/// the application needs more than valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatakeAlpha {
    pub valuation: i64,
    pub value: Option<BigRational>,
}

impl SatakeAlpha {
    pub fn from_valuation(valuation: i64) -> Self {
        SatakeAlpha { valuation, value: None }
    }

    pub fn from_value(p: u64, value: BigRational) -> Result<Self, LocalRepsError> {
        if value.is_zero() {
            return Err(LocalRepsError::ZeroAlpha);
        }
        let valuation = padic_valuation(&value, p).expect("nonzero rational has a valuation");
        Ok(SatakeAlpha { valuation, value: Some(value) })
    }
}

/// Hecke parameters of an unramified principal series of GL(2n) over a
/// local field with residue cardinality q = p^f.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatakeParams {
    n: usize,
    q: u64,
    p: u64,
    f: u32,
    alphas: Vec<SatakeAlpha>,
}

/// Splits a prime power into base and exponent.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let mut rest = q;
    let mut f = 0;
    while rest % p == 0 {
        rest /= p;
        f += 1;
    }
    (rest == 1).then_some((p, f))
}

impl SatakeParams {
    pub fn new(n: usize, q: u64, alphas: Vec<SatakeAlpha>) -> Result<Self, LocalRepsError> {
        let (p, f) = prime_power(q).ok_or(LocalRepsError::NotPrimePower { q })?;
        if n == 0 || alphas.len() != 2 * n {
            return Err(LocalRepsError::WrongAlphaCount { expected: 2 * n, found: alphas.len() });
        }
        for (i, a) in alphas.iter().enumerate() {
            if let Some(v) = &a.value {
                if v.is_zero() {
                    return Err(LocalRepsError::ZeroAlpha);
                }
                let actual = padic_valuation(v, p).expect("nonzero");
                if actual != a.valuation {
                    return Err(LocalRepsError::ValuationMismatch {
                        index: i,
                        declared: a.valuation,
                        actual,
                    });
                }
            }
        }
        Ok(SatakeParams { n, q, p, f, alphas })
    }

    /// Parameters from exact rational values; valuations are derived.
    pub fn from_values(n: usize, q: u64, values: Vec<BigRational>) -> Result<Self, LocalRepsError> {
        let (p, _) = prime_power(q).ok_or(LocalRepsError::NotPrimePower { q })?;
        let alphas = values
            .into_iter()
            .map(|v| SatakeAlpha::from_value(p, v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, q, alphas)
    }

    /// Parameters from valuations alone.
    pub fn from_valuations(n: usize, q: u64, vals: Vec<i64>) -> Result<Self, LocalRepsError> {
        Self::new(n, q, vals.into_iter().map(SatakeAlpha::from_valuation).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Residue degree f with q = p^f.
    pub fn residue_degree(&self) -> u32 {
        self.f
    }

    pub fn alphas(&self) -> &[SatakeAlpha] {
        &self.alphas
    }

    pub fn valuations(&self) -> Vec<i64> {
        self.alphas.iter().map(|a| a.valuation).collect()
    }

    /// Exact values of all parameters; errors when any entry is
    /// valuation-only.
    pub fn values(&self) -> Result<Vec<BigRational>, LocalRepsError> {
        self.alphas
            .iter()
            .map(|a| a.value.clone().ok_or(LocalRepsError::ValuesRequired))
            .collect()
    }
}

/// An n-element subset of {1..2n} indexing a block-parahoric refinement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauSubset {
    n: usize,
    members: Vec<usize>,
}

impl TauSubset {
    pub fn new(n: usize, mut members: Vec<usize>) -> Result<Self, LocalRepsError> {
        members.sort_unstable();
        members.dedup();
        let in_range = members.iter().all(|&i| 1 <= i && i <= 2 * n);
        if members.len() != n || !in_range {
            return Err(LocalRepsError::BadSubset { n, members });
        }
        Ok(TauSubset { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted members, 1-indexed.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> TauSubset {
        let members = (1..=2 * self.n).filter(|i| !self.contains(*i)).collect();
        TauSubset { n: self.n, members }
    }
}

/// All k-element subsets of {0..m-1} in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// x^e for a nonzero rational and a possibly negative integer exponent.
pub fn rat_pow(x: &BigRational, e: i64) -> BigRational {
    assert!(!x.is_zero() || e >= 0, "negative power of zero");
    let abs = num_traits::Pow::pow(x, e.unsigned_abs() as u32);
    if e >= 0 {
        abs
    } else {
        abs.recip()
    }
}

/// Product of the parameter values over a subset, scaled by
/// q^{n(1-n)/2}: the Hecke eigenvalue attached to tau.
pub fn tau_eigenvalue(params: &SatakeParams, tau: &TauSubset) -> Result<BigRational, LocalRepsError> {
    let values = params.values()?;
    let n = params.n() as i64;
    let q = BigRational::from(BigInt::from(params.q()));
    let mut out = rat_pow(&q, n * (1 - n) / 2);
    for &i in tau.members() {
        out *= &values[i - 1];
    }
    Ok(out)
}

/// Little-endian product of (X - r) over the given roots.
pub fn poly_from_roots(roots: &[BigRational]) -> Vec<BigRational> {
    let mut poly = vec![BigRational::one()];
    for r in roots {
        let mut next = vec![BigRational::zero(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] -= c * r;
            next[i + 1] += c;
        }
        poly = next;
    }
    poly
}

/// Characteristic polynomial of the block-parahoric Hecke operator on
/// parahoric invariants: the product over all n-element subsets tau of
/// (X - q^{n(1-n)/2} alpha^tau), little-endian coefficients, degree
/// C(2n, n).
pub fn up_charpoly(params: &SatakeParams) -> Result<Vec<BigRational>, LocalRepsError> {
    let roots = tau_eigenvalues(params)?;
    Ok(poly_from_roots(&roots))
}

/// The eigenvalue multiset in lexicographic subset order.
pub fn tau_eigenvalues(params: &SatakeParams) -> Result<Vec<BigRational>, LocalRepsError> {
    let values = params.values()?;
    let n = params.n();
    let q = BigRational::from(BigInt::from(params.q()));
    let scale = rat_pow(&q, (n as i64) * (1 - n as i64) / 2);
    Ok(subsets(2 * n, n)
        .into_iter()
        .map(|s| {
            let mut prod = scale.clone();
            for i in s {
                prod *= &values[i];
            }
            prod
        })
        .collect())
}

/// Serialized form: {n, q, entries of (valuation, rational value?)},
/// rationals as "a/b" strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SatakeFile {
    pub n: usize,
    pub q: u64,
    pub entries: Vec<(i64, Option<String>)>,
}

impl SatakeFile {
    pub fn from_params(params: &SatakeParams) -> Self {
        SatakeFile {
            n: params.n(),
            q: params.q(),
            entries: params
                .alphas()
                .iter()
                .map(|a| (a.valuation, a.value.as_ref().map(|v| v.to_string())))
                .collect(),
        }
    }

    pub fn into_params(self) -> Result<SatakeParams, LocalRepsError> {
        let alphas = self
            .entries
            .into_iter()
            .map(|(valuation, value)| {
                let value = value
                    .map(|s| {
                        BigRational::from_str(&s)
                            .map_err(|e| LocalRepsError::BadFile(format!("bad rational {s:?}: {e}")))
                    })
                    .transpose()?;
                Ok(SatakeAlpha { valuation, value })
            })
            .collect::<Result<Vec<_>, LocalRepsError>>()?;
        SatakeParams::new(self.n, self.q, alphas)
    }
}

/// Binomial coefficient as exact integer.
pub fn binomial(m: u64, k: u64) -> BigInt {
    if k > m {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k.min(m - k) {
        num *= BigInt::from(m - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Integer n(1-n)/2 exponent used throughout; n(n-1) is always even.
pub fn half_shift_exponent(n: usize) -> i64 {
    let n = n as i64;
    n * (1 - n) / 2
}

pub fn rational(x: i64) -> BigRational {
    BigRational::from(BigInt::from(x))
}

pub fn rational_frac(num: i64, den: i64) -> BigRational {
    assert!(den != 0);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn params_from_i64(n: usize, q: u64, vals: &[i64]) -> SatakeParams {
        SatakeParams::from_values(n, q, vals.iter().map(|&v| rational(v)).collect()).unwrap()
    }

    #[test]
    fn prime_power_split() {
        assert_eq!(prime_power(2), Some((2, 1)));
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(25), Some((5, 2)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            SatakeParams::from_valuations(1, 6, vec![0, 0]),
            Err(LocalRepsError::NotPrimePower { q: 6 })
        ));
        assert!(matches!(
            SatakeParams::from_valuations(2, 2, vec![0, 0]),
            Err(LocalRepsError::WrongAlphaCount { expected: 4, found: 2 })
        ));
        assert!(matches!(
            SatakeParams::from_values(1, 2, vec![rational(0), rational(1)]),
            Err(LocalRepsError::ZeroAlpha)
        ));
        let bad = SatakeParams::new(
            1,
            2,
            vec![
                SatakeAlpha { valuation: 3, value: Some(rational(2)) },
                SatakeAlpha::from_valuation(0),
            ],
        );
        assert!(matches!(
            bad,
            Err(LocalRepsError::ValuationMismatch { index: 0, declared: 3, actual: 1 })
        ));
    }

    #[test]
    fn tau_subset_validation() {
        let tau = TauSubset::new(2, vec![4, 3]).unwrap();
        assert_eq!(tau.members(), &[3, 4]);
        assert_eq!(tau.complement().members(), &[1, 2]);
        assert!(TauSubset::new(2, vec![1, 5]).is_err());
        assert!(TauSubset::new(2, vec![2, 2]).is_err());
    }

    #[test]
    fn charpoly_n1_splits_into_linear_factors() {
        // Degree C(2,1) = 2 and roots are the parameters themselves.
        let p = params_from_i64(1, 3, &[2, 5]);
        let poly = up_charpoly(&p).unwrap();
        assert_eq!(poly, vec![rational(10), rational(-7), rational(1)]);
    }

    #[test]
    fn charpoly_n2_subset_products() {
        // Subset products of (1,2,3,4) are {2,3,4,6,8,12}; each root is
        // the product divided by q = 2.
        let p = params_from_i64(2, 2, &[1, 2, 3, 4]);
        let eig = tau_eigenvalues(&p).unwrap();
        let mut products: Vec<BigRational> = eig.iter().map(|e| e * rational(2)).collect();
        products.sort();
        let expected: Vec<BigRational> = [2, 3, 4, 6, 8, 12].iter().map(|&v| rational(v)).collect();
        assert_eq!(products, expected);
        let poly = up_charpoly(&p).unwrap();
        assert_eq!(poly.len(), 7);
        let half: Vec<BigRational> = [2, 3, 4, 6, 8, 12].iter().map(|&v| rational_frac(v, 2)).collect();
        assert_eq!(poly, poly_from_roots(&half));
    }

    #[test]
    fn charpoly_symmetric_under_shuffles() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut vals: Vec<BigRational> = Vec::new();
            for _ in 0..4 {
                let num = 1 + (rand::Rng::gen_range(&mut rng, 0..40i64));
                let den = 1 + (rand::Rng::gen_range(&mut rng, 0..10i64));
                vals.push(rational_frac(num, den));
            }
            let base = SatakeParams::from_values(2, 3, vals.clone()).unwrap();
            let reference = up_charpoly(&base).unwrap();
            for _ in 0..5 {
                vals.shuffle(&mut rng);
                let shuffled = SatakeParams::from_values(2, 3, vals.clone()).unwrap();
                assert_eq!(up_charpoly(&shuffled).unwrap(), reference);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let p = SatakeParams::new(
            2,
            2,
            vec![
                SatakeAlpha::from_value(2, rational_frac(3, 5)).unwrap(),
                SatakeAlpha::from_valuation(2),
                SatakeAlpha::from_value(2, rational(4)).unwrap(),
                SatakeAlpha::from_valuation(0),
            ],
        )
        .unwrap();
        let file = SatakeFile::from_params(&p);
        let text = serde_json::to_string(&file).unwrap();
        let back: SatakeFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_params().unwrap(), p);
    }

    #[test]
    fn valuation_only_data_refuses_value_operations() {
        let p = SatakeParams::from_valuations(1, 2, vec![1, 0]).unwrap();
        assert!(matches!(up_charpoly(&p), Err(LocalRepsError::ValuesRequired)));
        assert_eq!(p.valuations(), vec![1, 0]);
    }

    #[test]
    fn binomial_and_shift() {
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(half_shift_exponent(1), 0);
        assert_eq!(half_shift_exponent(2), -1);
        assert_eq!(half_shift_exponent(3), -3);
    }

    #[test]
    fn rat_pow_handles_negative_exponents() {
        let x = rational_frac(2, 3);
        assert_eq!(rat_pow(&x, -2), rational_frac(9, 4));
        assert_eq!(rat_pow(&x, 0), rational(1));
        assert!(rat_pow(&x, 3).is_positive());
    }
}
