//! Truncated elements of Z_p[zeta_{p^r}]: cyclotomic integers whose
//! prime-to-p root-of-unity content has been embedded into Z_p via a
//! Teichmuller convention, leaving only the wild p-power roots formal.
//!
//! Coordinates are held in the power basis 1, zeta, ..., zeta^{phi-1}
//! of zeta = zeta_{p^r} with every coordinate a `PadicTrunc`. Mixed
//! wild conductors promote to the larger one; mixed precisions
//! truncate to the smaller, matching the scalar conventions.

use super::cyclotomic::{euler_phi, CyclotomicElement};
use super::padic::{is_prime, rational_trunc, teichmuller, PadicTrunc};
use super::ExactNumError;
use crate::ring::{Ring, ZModPN};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// Element of Z_p[zeta_{wild}] modulo p^prec, wild a power of p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicCyclotomic {
    p: u64,
    prec: u32,
    wild: u64,
    coords: Vec<PadicTrunc>,
}

fn wild_exponent(wild: u64, p: u64) -> u32 {
    assert_ne!(wild, 0, "wild conductor must be a power of p, got 0");
    let mut r = 0;
    let mut m = wild;
    while m % p == 0 {
        m /= p;
        r += 1;
    }
    assert_eq!(m, 1, "wild conductor must be a power of p");
    r
}

/// Reduces group-algebra coordinates (indexed by exponents mod wild)
/// to the power basis: for wild = p^r the relation is
/// zeta^{phi + t} = -sum_{i<p-1} zeta^{i p^{r-1} + t}, t < p^{r-1}.
fn reduce_to_power_basis(ctx: &ZModPN, p: u64, wild: u64, mut acc: Vec<u64>) -> Vec<u64> {
    let phi = euler_phi(wild) as usize;
    if wild == 1 {
        return acc;
    }
    let step = (wild / p) as usize;
    for e in phi..wild as usize {
        let c = acc[e];
        if c == 0 {
            continue;
        }
        acc[e] = 0;
        let t = e - phi;
        for i in 0..(p as usize - 1) {
            let idx = t + i * step;
            acc[idx] = ctx.sub(&acc[idx], &c);
        }
    }
    acc.truncate(phi);
    acc
}

impl PadicCyclotomic {
    pub fn zero(p: u64, prec: u32, wild: u64) -> Self {
        wild_exponent(wild, p);
        let phi = euler_phi(wild) as usize;
        PadicCyclotomic {
            p,
            prec,
            wild,
            coords: vec![PadicTrunc::from_u64(p, prec, 0); phi],
        }
    }

    pub fn scalar(value: PadicTrunc) -> Self {
        PadicCyclotomic { p: value.p, prec: value.prec, wild: 1, coords: vec![value] }
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::scalar(PadicTrunc::from_u64(p, prec, 1))
    }

    /// zeta_{wild}^exponent as a power-basis element.
    pub fn root_of_unity(p: u64, prec: u32, wild: u64, exponent: i64) -> Self {
        wild_exponent(wild, p);
        let ctx = ZModPN::new(p, prec);
        let e = exponent.rem_euclid(wild as i64) as usize;
        let mut acc = vec![0u64; wild as usize];
        acc[e] = ctx.one();
        let coords = reduce_to_power_basis(&ctx, p, wild, acc)
            .into_iter()
            .map(|v| PadicTrunc { p, prec, value: v })
            .collect();
        PadicCyclotomic { p, prec, wild, coords }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn wild(&self) -> u64 {
        self.wild
    }

    pub fn coords(&self) -> &[PadicTrunc] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.value == 0)
    }

    /// Minimum coordinate valuation, capped at the precision; the
    /// precision itself for the zero element.
    pub fn min_valuation(&self) -> u32 {
        self.coords.iter().map(|c| c.valuation()).min().unwrap_or(self.prec)
    }

    pub fn is_unit(&self) -> bool {
        self.min_valuation() == 0
    }

    /// Re-expresses the element over a larger wild conductor via
    /// zeta_{p^r} = zeta_{p^s}^{p^{s-r}}.
    pub fn promote(&self, wild: u64) -> Self {
        let r = wild_exponent(self.wild, self.p);
        let s = wild_exponent(wild, self.p);
        assert!(s >= r, "promotion cannot shrink the conductor");
        if s == r {
            return self.clone();
        }
        let ctx = ZModPN::new(self.p, self.prec);
        let stretch = (wild / self.wild) as usize;
        let mut acc = vec![0u64; wild as usize];
        for (i, c) in self.coords.iter().enumerate() {
            acc[i * stretch] = c.value;
        }
        let coords = reduce_to_power_basis(&ctx, self.p, wild, acc)
            .into_iter()
            .map(|v| PadicTrunc { p: self.p, prec: self.prec, value: v })
            .collect();
        PadicCyclotomic { p: self.p, prec: self.prec, wild, coords }
    }

    fn align(&self, other: &Self) -> (Self, Self) {
        assert_eq!(self.p, other.p, "mixed residue characteristics");
        let wild = self.wild.max(other.wild);
        let prec = self.prec.min(other.prec);
        (self.promote(wild).reduce(prec), other.promote(wild).reduce(prec))
    }

    /// Forget digits beyond `prec` in every coordinate.
    pub fn reduce(&self, prec: u32) -> Self {
        if prec == self.prec {
            return self.clone();
        }
        PadicCyclotomic {
            p: self.p,
            prec,
            wild: self.wild,
            coords: self.coords.iter().map(|c| c.reduce(prec)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = self.align(other);
        for (x, y) in a.coords.iter_mut().zip(&b.coords) {
            *x = x.add(y);
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (mut a, b) = self.align(other);
        for (x, y) in a.coords.iter_mut().zip(&b.coords) {
            *x = x.sub(y);
        }
        a
    }

    pub fn neg(&self) -> Self {
        let ctx = ZModPN::new(self.p, self.prec);
        PadicCyclotomic {
            p: self.p,
            prec: self.prec,
            wild: self.wild,
            coords: self
                .coords
                .iter()
                .map(|c| PadicTrunc { p: c.p, prec: c.prec, value: ctx.neg(&c.value) })
                .collect(),
        }
    }

    pub fn scale(&self, s: &PadicTrunc) -> Self {
        assert_eq!(self.p, s.p, "mixed residue characteristics");
        let prec = self.prec.min(s.prec);
        let scaled = self.reduce(prec);
        PadicCyclotomic {
            p: self.p,
            prec,
            wild: self.wild,
            coords: scaled.coords.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let ctx = ZModPN::new(a.p, a.prec);
        let wild = a.wild as usize;
        let mut acc = vec![0u64; wild.max(a.coords.len() + b.coords.len())];
        for (i, x) in a.coords.iter().enumerate() {
            if x.value == 0 {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                let term = ctx.mul(&x.value, &y.value);
                let idx = (i + j) % wild;
                acc[idx] = ctx.add(&acc[idx], &term);
            }
        }
        acc.truncate(wild);
        let coords = reduce_to_power_basis(&ctx, a.p, a.wild, acc)
            .into_iter()
            .map(|v| PadicTrunc { p: a.p, prec: a.prec, value: v })
            .collect();
        PadicCyclotomic { p: a.p, prec: a.prec, wild: a.wild, coords }
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut out = PadicCyclotomic::one(self.p, self.prec);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Equality after conductor promotion, at the smaller precision.
    pub fn equals(&self, other: &Self) -> bool {
        let (a, b) = self.align(other);
        a.coords == b.coords
    }
}

/// Smallest primitive root mod p, the anchor of the embedding
/// convention for prime-to-p roots of unity.
pub fn smallest_primitive_root(p: u64) -> Result<u64, ExactNumError> {
    if !is_prime(p) {
        return Err(ExactNumError::NotPrime(p));
    }
    if p == 2 {
        return Ok(1);
    }
    let order = |g: u64| -> u64 {
        let mut x = g % p;
        let mut k = 1;
        while x != 1 {
            x = x * g % p;
            k += 1;
        }
        k
    };
    (2..p).find(|&g| order(g) == p - 1).ok_or(ExactNumError::NotPrime(p))
}

/// The recorded convention for the non-canonical embedding of
/// prime-to-p roots of unity into Z_p.
pub fn embedding_convention(p: u64) -> String {
    let g0 = smallest_primitive_root(p).map(|g| g.to_string()).unwrap_or_else(|_| "?".into());
    format!(
        "zeta_(p-1) -> Teichmuller(g0) with g0 = {g0} the smallest primitive root mod {p}; \
         p-power roots kept formal in the power basis of zeta_(p^r)"
    )
}

/// Embeds an exact cyclotomic element into Z_p[zeta_{p^r}] mod p^prec:
/// the conductor splits as d' * p^r with d' prime to p; zeta_{d'} maps
/// to the Teichmuller root omega(g0)^{(p-1)/d'} and the p-part stays
/// formal. Requires d' | p - 1, odd p, no formal square root, and
/// p-integral coordinates.
pub fn embed_cyclotomic(
    x: &CyclotomicElement,
    p: u64,
    prec: u32,
) -> Result<PadicCyclotomic, ExactNumError> {
    if x.radicand().is_some() {
        return Err(ExactNumError::Invalid(
            "formal square roots have no canonical p-adic embedding here".into(),
        ));
    }
    let d = x.conductor();
    let mut wild = 1u64;
    let mut tame = d;
    while tame % p == 0 {
        tame /= p;
        wild *= p;
    }
    if tame != 1 && (p - 1) % tame != 0 {
        return Err(ExactNumError::Invalid(format!(
            "prime-to-p conductor {tame} does not divide p - 1 = {}",
            p - 1
        )));
    }
    let g0 = smallest_primitive_root(p)?;
    let omega = teichmuller(&BigInt::from(g0), p, prec)?;
    // CRT split of zeta_d^k: tame exponent k * inv(wild) mod tame,
    // wild exponent k * inv(tame) mod wild.
    let inv_mod = |a: u64, m: u64| -> u64 {
        if m == 1 {
            return 0;
        }
        (1..m).find(|t| t * (a % m) % m == 1).expect("coprime inverse")
    };
    let inv_wild = inv_mod(wild, tame.max(1));
    let inv_tame = inv_mod(tame, wild);
    let mut out = PadicCyclotomic::zero(p, prec, wild);
    for (k, c) in x.coeffs().iter().enumerate() {
        if num_traits::Zero::is_zero(c) {
            continue;
        }
        let scalar = rational_trunc(c, p, prec)?;
        let term = if tame == 1 {
            PadicCyclotomic::root_of_unity(p, prec, wild, (k as u64 % wild) as i64)
        } else {
            let te = k as u64 * inv_wild % tame;
            let we = k as u64 * inv_tame % wild;
            let tame_scalar = omega.pow((p - 1) / tame * te);
            PadicCyclotomic::root_of_unity(p, prec, wild, we as i64).scale(&tame_scalar)
        };
        out = out.add(&term.scale(&scalar));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::character::{gauss_sum, FiniteCharacter};
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roots_multiply_by_exponent_addition() {
        for (p, wild) in [(3u64, 9u64), (5, 5), (11, 11), (5, 25)] {
            for e1 in 0..wild.min(12) {
                for e2 in 0..wild.min(12) {
                    let a = PadicCyclotomic::root_of_unity(p, 4, wild, e1 as i64);
                    let b = PadicCyclotomic::root_of_unity(p, 4, wild, e2 as i64);
                    let prod = a.mul(&b);
                    let direct = PadicCyclotomic::root_of_unity(p, 4, wild, (e1 + e2) as i64);
                    assert!(prod.equals(&direct), "p={p} wild={wild} {e1}+{e2}");
                }
            }
        }
    }

    #[test]
    fn cyclotomic_relation_sums_to_zero() {
        for (p, wild) in [(3u64, 3u64), (3, 9), (5, 25), (11, 11)] {
            let step = (wild / p) as i64;
            let mut acc = PadicCyclotomic::zero(p, 5, wild);
            for i in 0..p as i64 {
                acc = acc.add(&PadicCyclotomic::root_of_unity(p, 5, wild, i * step));
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn one_minus_zeta_product_is_p() {
        for p in [3u64, 5, 7, 11] {
            let one = PadicCyclotomic::one(p, 4);
            let mut prod = one.clone();
            for i in 1..p {
                prod = prod.mul(&one.sub(&PadicCyclotomic::root_of_unity(p, 4, p, i as i64)));
            }
            let expected = PadicCyclotomic::scalar(PadicTrunc::from_u64(p, 4, p));
            assert!(prod.equals(&expected), "p={p}");
        }
    }

    #[test]
    fn promotion_and_precision_alignment() {
        let z = PadicCyclotomic::root_of_unity(5, 6, 5, 2);
        let promoted = z.promote(25);
        // zeta_5^2 = zeta_25^10.
        assert!(promoted.equals(&PadicCyclotomic::root_of_unity(5, 6, 25, 10)));
        let low = PadicCyclotomic::root_of_unity(5, 2, 25, 10);
        assert!(z.equals(&low));
        assert_eq!(z.add(&low).prec(), 2);
    }

    #[test]
    fn random_products_associate_and_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let p = 3u64;
            let wild = 9u64;
            let rand_elt = |rng: &mut ChaCha8Rng| {
                let mut x = PadicCyclotomic::zero(p, 4, wild);
                for _ in 0..3 {
                    let e = rng.gen_range(0..9);
                    let s = PadicTrunc::from_u64(p, 4, rng.gen_range(0..81));
                    x = x.add(&PadicCyclotomic::root_of_unity(p, 4, wild, e).scale(&s));
                }
                x
            };
            let (a, b, c) = (rand_elt(&mut rng), rand_elt(&mut rng), rand_elt(&mut rng));
            assert!(a.mul(&b).equals(&b.mul(&a)));
            assert!(a.mul(&b).mul(&c).equals(&a.mul(&b.mul(&c))));
            assert!(a.mul(&b.add(&c)).equals(&a.mul(&b).add(&a.mul(&c))));
        }
    }

    #[test]
    fn embedding_is_multiplicative_and_respects_gauss_squares() {
        // Quadratic character mod 5 is even: its Gauss sum squares to 5.
        let chi = FiniteCharacter::all_characters(5)
            .into_iter()
            .find(|c| c.order() == 2)
            .unwrap();
        let g = gauss_sum(&chi, 1).unwrap();
        let embedded = embed_cyclotomic(&g, 5, 5).unwrap();
        let five = PadicCyclotomic::scalar(PadicTrunc::from_u64(5, 5, 5));
        assert!(embedded.mul(&embedded).equals(&five));

        // Multiplicativity on random elements of Q(zeta_20) at p = 5.
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let rand_elt = |rng: &mut ChaCha8Rng| {
                let mut x = CyclotomicElement::zero(20);
                for _ in 0..3 {
                    let e = rng.gen_range(0..20i64);
                    let s = BigRational::from(BigInt::from(rng.gen_range(-9i64..=9)));
                    x = x
                        .add(&CyclotomicElement::root_of_unity(20, e).scale(&s))
                        .unwrap();
                }
                x
            };
            let a = rand_elt(&mut rng);
            let b = rand_elt(&mut rng);
            let lhs = embed_cyclotomic(&a.mul(&b).unwrap(), 5, 4).unwrap();
            let rhs = embed_cyclotomic(&a, 5, 4)
                .unwrap()
                .mul(&embed_cyclotomic(&b, 5, 4).unwrap());
            assert!(lhs.equals(&rhs));
        }
    }

    #[test]
    fn embedding_rejects_bad_inputs() {
        assert!(embed_cyclotomic(&CyclotomicElement::sqrt(5), 5, 4).is_err());
        // Conductor 7 is prime to 5 but 7 does not divide 4.
        let z7 = CyclotomicElement::root_of_unity(7, 1);
        assert!(embed_cyclotomic(&z7, 5, 4).is_err());
        assert!(rational_trunc(&BigRational::new(BigInt::from(1), BigInt::from(5)), 5, 3).is_err());
    }

    #[test]
    fn primitive_roots_are_smallest() {
        assert_eq!(smallest_primitive_root(3).unwrap(), 2);
        assert_eq!(smallest_primitive_root(5).unwrap(), 2);
        assert_eq!(smallest_primitive_root(7).unwrap(), 3);
        assert_eq!(smallest_primitive_root(11).unwrap(), 2);
        assert!(smallest_primitive_root(8).is_err());
    }
}
