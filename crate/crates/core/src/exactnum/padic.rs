//! p-adic valuations of rationals and truncated p-adic arithmetic.

use super::ExactNumError;
use crate::ring::{Ring, ZModPN};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// Deterministic primality test by trial division; adequate for the small
/// residue characteristics used throughout (p well below 2^32).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map_or(false, |sq| sq <= n) {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Exact p-adic valuation of a nonzero integer. Returns `None` for zero.
pub fn bigint_valuation(n: &BigInt, p: u64) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let p_big = BigInt::from(p);
    let mut v = 0u64;
    let mut m = n.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p_big);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return Some(v);
        }
    }
}

/// p-adic valuation of a nonzero rational; errors on zero input or
/// composite p.
pub fn padic_valuation(x: &BigRational, p: u64) -> Result<i64, ExactNumError> {
    if !is_prime(p) {
        return Err(ExactNumError::NotPrime(p));
    }
    if x.is_zero() {
        return Err(ExactNumError::ZeroValuation);
    }
    let vn = bigint_valuation(x.numer(), p).expect("nonzero numerator") as i64;
    let vd = bigint_valuation(x.denom(), p).expect("nonzero denominator") as i64;
    Ok(vn - vd)
}

/// Truncation of a p-integral rational: numerator times inverse
/// denominator mod p^prec. Errors when p divides the denominator.
pub fn rational_trunc(x: &BigRational, p: u64, prec: u32) -> Result<PadicTrunc, ExactNumError> {
    let ctx = ZModPN::new(p, prec);
    let value = ctx.from_rational(x).ok_or(ExactNumError::NotAUnit(p))?;
    Ok(PadicTrunc { p, prec, value })
}

/// A p-adic integer known modulo p^prec. The precision is part of the
/// value; binary operations truncate to the smaller precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicTrunc {
    pub p: u64,
    pub prec: u32,
    pub value: u64,
}

impl PadicTrunc {
    pub fn new(p: u64, prec: u32, value: &BigInt) -> Self {
        let ctx = ZModPN::new(p, prec);
        PadicTrunc { p, prec, value: ctx.reduce_bigint(value) }
    }

    pub fn from_u64(p: u64, prec: u32, value: u64) -> Self {
        let ctx = ZModPN::new(p, prec);
        PadicTrunc { p, prec, value: value % ctx.modulus() }
    }

    pub fn ctx(&self) -> ZModPN {
        ZModPN::new(self.p, self.prec)
    }

    fn align(&self, other: &Self) -> (ZModPN, u64, u64) {
        assert_eq!(self.p, other.p, "mixed residue characteristics");
        let prec = self.prec.min(other.prec);
        let ctx = ZModPN::new(self.p, prec);
        (ctx, self.value % ctx.modulus(), other.value % ctx.modulus())
    }

    pub fn add(&self, other: &Self) -> Self {
        let (ctx, a, b) = self.align(other);
        PadicTrunc { p: self.p, prec: ctx.prec(), value: ctx.add(&a, &b) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (ctx, a, b) = self.align(other);
        PadicTrunc { p: self.p, prec: ctx.prec(), value: ctx.sub(&a, &b) }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (ctx, a, b) = self.align(other);
        PadicTrunc { p: self.p, prec: ctx.prec(), value: ctx.mul(&a, &b) }
    }

    pub fn inv(&self) -> Result<Self, ExactNumError> {
        let ctx = self.ctx();
        ctx.inv(&self.value)
            .map(|v| PadicTrunc { p: self.p, prec: self.prec, value: v })
            .ok_or(ExactNumError::NotAUnit(self.p))
    }

    pub fn pow(&self, e: u64) -> Self {
        let ctx = self.ctx();
        PadicTrunc { p: self.p, prec: self.prec, value: ctx.pow_u64(&self.value, e) }
    }

    pub fn is_unit(&self) -> bool {
        self.value % self.p != 0
    }

    /// Valuation of the truncation, capped at the precision.
    pub fn valuation(&self) -> u32 {
        self.ctx().valuation(self.value)
    }

    /// Forget digits beyond `prec`.
    pub fn reduce(&self, prec: u32) -> Self {
        assert!(prec <= self.prec, "cannot gain precision");
        let ctx = ZModPN::new(self.p, prec);
        PadicTrunc { p: self.p, prec, value: self.value % ctx.modulus() }
    }
}

/// Teichmuller lift of `a` modulo p^prec for odd prime p: the unique root
/// of unity (or zero) congruent to `a` mod p, computed as the stable limit
/// of iterated p-th powers. Each squaring doubles the correct digits, so
/// `prec` iterations are always enough; we stop early at a fixed point.
pub fn teichmuller(a: &BigInt, p: u64, prec: u32) -> Result<PadicTrunc, ExactNumError> {
    if !is_prime(p) {
        return Err(ExactNumError::NotPrime(p));
    }
    if p == 2 {
        return Err(ExactNumError::EvenPrime(p));
    }
    let ctx = ZModPN::new(p, prec);
    let mut x = ctx.reduce_bigint(a);
    for _ in 0..prec {
        let next = ctx.pow_u64(&x, p);
        if next == x {
            break;
        }
        x = next;
    }
    Ok(PadicTrunc { p, prec, value: x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(padic_valuation(&rat(12, 1), 2).unwrap(), 2);
        assert_eq!(padic_valuation(&rat(1, 1), 7).unwrap(), 0);
        assert_eq!(padic_valuation(&rat(5, 49), 7).unwrap(), -2);
        assert_eq!(padic_valuation(&rat(-18, 4), 3).unwrap(), 2);
    }

    #[test]
    fn valuation_rejects_zero_and_composite() {
        assert_eq!(padic_valuation(&rat(0, 1), 5), Err(ExactNumError::ZeroValuation));
        assert_eq!(padic_valuation(&rat(3, 1), 6), Err(ExactNumError::NotPrime(6)));
    }

    #[test]
    fn valuation_is_multiplicative() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = [2u64, 3, 5, 11][rng.gen_range(0..4)];
            let a = rat(rng.gen_range(1..5_000), rng.gen_range(1..5_000));
            let b = rat(rng.gen_range(1..5_000), rng.gen_range(1..5_000));
            let va = padic_valuation(&a, p).unwrap();
            let vb = padic_valuation(&b, p).unwrap();
            assert_eq!(padic_valuation(&(a * b), p).unwrap(), va + vb);
        }
    }

    #[test]
    fn teichmuller_examples() {
        let one = teichmuller(&BigInt::one(), 5, 4).unwrap();
        assert_eq!(one.value, 1);
        // omega(2) mod 25 is 7: the unique 4th root of unity = 2 mod 5.
        let w2 = teichmuller(&BigInt::from(2), 5, 2).unwrap();
        assert_eq!(w2.value, 7);
        assert_eq!(w2.pow(4).value, 1);
        assert!(teichmuller(&BigInt::from(3), 2, 3).is_err());
    }

    #[test]
    fn teichmuller_is_multiplicative_and_residue_correct() {
        let p = 11u64;
        let prec = 5u32;
        for a in 0..p {
            for b in 0..p {
                let wa = teichmuller(&BigInt::from(a), p, prec).unwrap();
                let wb = teichmuller(&BigInt::from(b), p, prec).unwrap();
                let wab = teichmuller(&BigInt::from(a * b), p, prec).unwrap();
                assert_eq!(wa.mul(&wb), wab);
                assert_eq!(wa.value % p, a % p);
            }
        }
    }

    #[test]
    fn trunc_arithmetic_tracks_minimum_precision() {
        let a = PadicTrunc::from_u64(5, 4, 7);
        let b = PadicTrunc::from_u64(5, 2, 7);
        let s = a.mul(&b);
        assert_eq!(s.prec, 2);
        assert_eq!(s.value, 49 % 25);
        assert_eq!(a.inv().unwrap().mul(&a).value, 1);
        assert!(PadicTrunc::from_u64(5, 4, 10).inv().is_err());
    }
}
