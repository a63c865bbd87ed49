//! Coefficient-ring contexts for the exact linear algebra and the symbol
//! machinery.
//!
//! The heavy pipelines (congruence sampling, evaluation towers) run the
//! same generic code either over the rationals or over Z/p^N, so the ring
//! is passed as an explicit context object rather than baked into the
//! element type.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Ring context: all arithmetic goes through the context so elements can
/// be plain data (`u64` residues, `BigRational`, ...).
pub trait Ring: Clone + Send + Sync {
    type El: Clone + PartialEq + std::fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn sub(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn neg(&self, a: &Self::El) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    fn from_i64(&self, n: i64) -> Self::El;
    fn from_bigint(&self, n: &BigInt) -> Self::El;
    /// Image of a rational; `None` when the denominator is not invertible.
    fn from_rational(&self, r: &BigRational) -> Option<Self::El>;
    /// Multiplicative inverse, when it exists.
    fn inv(&self, a: &Self::El) -> Option<Self::El>;

    fn pow_u64(&self, a: &Self::El, mut e: u64) -> Self::El {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// The rational numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QQ;

impl Ring for QQ {
    type El = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_bigint(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn from_rational(&self, r: &BigRational) -> Option<BigRational> {
        Some(r.clone())
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
}

/// Z/p^N with residues stored in `u64`.
///
/// The modulus must stay below 2^63 so products fit in `u128`; every use
/// in this crate (p up to low double digits, N in single digits) is far
/// inside that bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZModPN {
    p: u64,
    prec: u32,
    modulus: u64,
}

impl ZModPN {
    /// Context for Z/p^prec.  Panics if p < 2, prec = 0 or p^prec >= 2^63.
    pub fn new(p: u64, prec: u32) -> Self {
        assert!(p >= 2, "modulus base must be at least 2");
        assert!(prec >= 1, "precision exponent must be at least 1");
        let mut modulus: u64 = 1;
        for _ in 0..prec {
            modulus = modulus
                .checked_mul(p)
                .filter(|m| *m < (1u64 << 63))
                .expect("p^prec exceeds the 2^63 residue capacity");
        }
        ZModPN { p, prec, modulus }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_bigint(&self, n: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        let mut r = n % &m;
        if r.sign() == Sign::Minus {
            r += &m;
        }
        let (_, digits) = r.to_u64_digits();
        match digits.len() {
            0 => 0,
            1 => digits[0],
            _ => unreachable!("residue below 2^63"),
        }
    }

    /// p-adic valuation of a residue, capped at the working precision.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.prec;
        }
        let mut v = 0;
        let mut a = a;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }
}

impl Ring for ZModPN {
    type El = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.modulus - a
        }
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_i64(&self, n: i64) -> u64 {
        let m = self.modulus as i128;
        let r = ((n as i128 % m) + m) % m;
        r as u64
    }
    fn from_bigint(&self, n: &BigInt) -> u64 {
        self.reduce_bigint(n)
    }
    fn from_rational(&self, r: &BigRational) -> Option<u64> {
        let num = self.reduce_bigint(r.numer());
        let den = self.reduce_bigint(r.denom());
        let den_inv = self.inv(&den)?;
        Some(self.mul(&num, &den_inv))
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        // Extended Euclid; the inverse exists iff a is prime to p.
        if a % self.p == 0 {
            return None;
        }
        let (mut r0, mut r1) = (self.modulus as i128, *a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "unit residue must have gcd 1 with p^N");
        let m = self.modulus as i128;
        Some((((t0 % m) + m) % m) as u64)
    }
}

/// Signed representative in (-p^N/2, p^N/2], handy for display and for
/// recognizing small integers in truncated data.
pub fn symmetric_lift(ctx: &ZModPN, a: u64) -> i64 {
    let m = ctx.modulus();
    if a * 2 > m {
        -((m - a) as i64)
    } else {
        a as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zmod_basic_arithmetic() {
        let r = ZModPN::new(5, 3);
        assert_eq!(r.modulus(), 125);
        assert_eq!(r.add(&100, &50), 25);
        assert_eq!(r.mul(&24, &26), 624 % 125);
        assert_eq!(r.neg(&1), 124);
        assert_eq!(r.from_i64(-1), 124);
    }

    #[test]
    fn zmod_inverse_of_units_only() {
        let r = ZModPN::new(5, 3);
        assert_eq!(r.inv(&25), None);
        let i = r.inv(&7).unwrap();
        assert_eq!(r.mul(&7, &i), 1);
    }

    #[test]
    fn zmod_rational_reduction() {
        let r = ZModPN::new(7, 2);
        let x = BigRational::new(BigInt::from(3), BigInt::from(4));
        let red = r.from_rational(&x).unwrap();
        assert_eq!(r.mul(&red, &4), 3);
        let bad = BigRational::new(BigInt::from(1), BigInt::from(7));
        assert_eq!(r.from_rational(&bad), None);
    }

    #[test]
    fn valuation_caps_at_precision() {
        let r = ZModPN::new(3, 4);
        assert_eq!(r.valuation(0), 4);
        assert_eq!(r.valuation(27), 3);
        assert_eq!(r.valuation(5), 0);
    }

    #[test]
    fn symmetric_lift_halves() {
        let r = ZModPN::new(11, 2);
        assert_eq!(symmetric_lift(&r, 120), -1);
        assert_eq!(symmetric_lift(&r, 40), 40);
    }
}
