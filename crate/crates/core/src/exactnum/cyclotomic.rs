//! Cyclotomic integers in the power basis, with an optional formal square
//! root of a prime power adjoined.
//!
//! An element of conductor m is a rational vector of length phi(m) in the
//! basis 1, z, ..., z^{phi(m)-1} where z is a primitive m-th root of unity,
//! optionally extended by a second block of phi(m) coordinates multiplying
//! a formal sqrt(q). Elements of different conductors combine by promotion
//! to the least common conductor; distinct radicands refuse to mix. All
//! arithmetic is exact; a complex embedding is provided for diagnostics
//! only and never feeds a certified value.

use super::ExactNumError;
use crate::ring::{Ring, ZModPN};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.checked_mul(d).map_or(false, |sq| sq <= n) {
        if n % d == 0 {
            let mut e = 0u32;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .map(|(p, e)| p.pow(e - 1) * (p - 1))
        .product::<u64>()
        .max(u64::from(n == 1))
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor_u64(n) {
        let prev = ds.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            ds.extend(prev.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

/// Exact division of integer polynomials, requiring a monic divisor and
/// zero remainder. Coefficient vectors are little-endian.
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    assert!(den.last().map_or(false, |c| c.is_one()), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let dd = den.len() - 1;
    assert!(rem.len() > dd);
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if !c.is_zero() {
            for (j, dc) in den.iter().enumerate() {
                let t = &c * dc;
                rem[i + j] -= t;
            }
        }
        quot[i] = c;
    }
    assert!(rem.iter().all(|c| c.is_zero()), "division not exact");
    quot
}

/// The m-th cyclotomic polynomial as a little-endian integer vector,
/// computed by dividing x^m - 1 by the cyclotomic polynomials of the
/// proper divisors of m. Results are cached process-wide.
pub fn cyclotomic_polynomial(m: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&m) {
        return Arc::clone(hit);
    }
    let result = if m == 1 {
        vec![-BigInt::one(), BigInt::one()]
    } else {
        let mut num = vec![BigInt::zero(); (m + 1) as usize];
        num[0] = -BigInt::one();
        num[m as usize] = BigInt::one();
        let mut quot = num;
        for d in divisors(m) {
            if d < m {
                let phi_d = cyclotomic_polynomial(d);
                quot = poly_div_exact(&quot, &phi_d);
            }
        }
        quot
    };
    let arc = Arc::new(result);
    cache.lock().unwrap().insert(m, Arc::clone(&arc));
    arc
}

/// Cached reduction data for one conductor: the cyclotomic polynomial and
/// lazily computed power-basis expansions of z^e for arbitrary exponents.
struct CycTables {
    m: u64,
    phi: usize,
    poly: Arc<Vec<BigInt>>,
    xpow: Mutex<Vec<Option<Arc<Vec<BigInt>>>>>,
}

impl CycTables {
    fn new(m: u64) -> Self {
        let poly = cyclotomic_polynomial(m);
        let phi = poly.len() - 1;
        CycTables { m, phi, poly, xpow: Mutex::new(vec![None; m as usize]) }
    }

    /// Power-basis coordinates of z^e. Fills the cache incrementally: one
    /// multiply-by-z step costs phi multiplications against the reduction
    /// row, so a full fill is m * phi small-integer operations.
    fn pow_vec(&self, e: u64) -> Arc<Vec<BigInt>> {
        let e = (e % self.m) as usize;
        let mut cache = self.xpow.lock().unwrap();
        if let Some(hit) = &cache[e] {
            return Arc::clone(hit);
        }
        let mut k = e;
        while cache[k].is_none() && k > 0 {
            k -= 1;
        }
        let mut cur: Vec<BigInt> = match &cache[k] {
            Some(v) => v.as_ref().clone(),
            None => {
                let mut v = vec![BigInt::zero(); self.phi];
                v[0] = BigInt::one();
                cache[0] = Some(Arc::new(v.clone()));
                v
            }
        };
        for step in k..e {
            // Multiply by z: shift up, then eliminate the z^phi overflow
            // using z^phi = -(lower coefficients of the cyclotomic poly).
            let top = cur[self.phi - 1].clone();
            for i in (1..self.phi).rev() {
                cur[i] = cur[i - 1].clone();
            }
            cur[0] = BigInt::zero();
            if !top.is_zero() {
                for i in 0..self.phi {
                    let t = &top * &self.poly[i];
                    cur[i] -= t;
                }
            }
            cache[step + 1] = Some(Arc::new(cur.clone()));
        }
        Arc::clone(cache[e].as_ref().unwrap())
    }
}

fn tables(m: u64) -> Arc<CycTables> {
    static REGISTRY: OnceLock<Mutex<HashMap<u64, Arc<CycTables>>>> = OnceLock::new();
    let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = reg.lock().unwrap();
    Arc::clone(guard.entry(m).or_insert_with(|| Arc::new(CycTables::new(m))))
}

/// An exact element of Q(zeta_m), or of Q(zeta_m, sqrt(q)) when a radicand
/// is attached. `coeffs` has length phi(m) without a radicand and 2 phi(m)
/// with one (second block = coordinates of the sqrt(q) part).
#[derive(Debug, Clone)]
pub struct CyclotomicElement {
    m: u64,
    sqrt_q: Option<u64>,
    coeffs: Vec<BigRational>,
}

impl CyclotomicElement {
    pub fn conductor(&self) -> u64 {
        self.m
    }

    pub fn radicand(&self) -> Option<u64> {
        self.sqrt_q
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn zero(m: u64) -> Self {
        let phi = euler_phi(m) as usize;
        CyclotomicElement { m, sqrt_q: None, coeffs: vec![BigRational::zero(); phi] }
    }

    pub fn one(m: u64) -> Self {
        Self::from_rational_at(m, BigRational::one())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::from_rational_at(1, r)
    }

    pub fn from_rational_at(m: u64, r: BigRational) -> Self {
        let mut el = Self::zero(m);
        el.coeffs[0] = r;
        el
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from(BigInt::from(n)))
    }

    /// zeta_m^k, reduced into the power basis.
    pub fn root_of_unity(m: u64, k: i64) -> Self {
        let t = tables(m);
        let e = k.rem_euclid(m as i64) as u64;
        let vec = t.pow_vec(e);
        CyclotomicElement {
            m,
            sqrt_q: None,
            coeffs: vec.iter().map(|c| BigRational::from(c.clone())).collect(),
        }
    }

    /// The formal square root of q as an element of conductor 1.
    pub fn sqrt(q: u64) -> Self {
        CyclotomicElement {
            m: 1,
            sqrt_q: Some(q),
            coeffs: vec![BigRational::zero(), BigRational::one()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn phi(&self) -> usize {
        euler_phi(self.m) as usize
    }

    /// Drop an all-zero radicand block and shrink the conductor when the
    /// element is supported on powers of a smaller-order root.
    fn normalize(mut self) -> Self {
        if self.sqrt_q.is_some() {
            let phi = self.phi();
            if self.coeffs[phi..].iter().all(|c| c.is_zero()) {
                self.coeffs.truncate(phi);
                self.sqrt_q = None;
            }
        }
        self
    }

    /// Re-express at a larger conductor m2 (m | m2 required).
    pub fn promote(&self, m2: u64) -> Result<Self, ExactNumError> {
        if m2 % self.m != 0 {
            return Err(ExactNumError::ConductorMismatch { small: self.m, large: m2 });
        }
        if m2 == self.m {
            return Ok(self.clone());
        }
        let step = m2 / self.m;
        let t = tables(m2);
        let phi_old = self.phi();
        let phi_new = t.phi;
        let blocks = if self.sqrt_q.is_some() { 2 } else { 1 };
        let mut out = vec![BigRational::zero(); blocks * phi_new];
        for b in 0..blocks {
            for i in 0..phi_old {
                let c = &self.coeffs[b * phi_old + i];
                if c.is_zero() {
                    continue;
                }
                let vec = t.pow_vec(i as u64 * step);
                for (j, base) in vec.iter().enumerate() {
                    if !base.is_zero() {
                        out[b * phi_new + j] += c * BigRational::from(base.clone());
                    }
                }
            }
        }
        Ok(CyclotomicElement { m: m2, sqrt_q: self.sqrt_q, coeffs: out })
    }

    fn unify(a: &Self, b: &Self) -> Result<(Self, Self), ExactNumError> {
        let m = a.m.lcm(&b.m);
        let mut x = a.promote(m)?;
        let mut y = b.promote(m)?;
        let q = match (x.sqrt_q, y.sqrt_q) {
            (Some(q1), Some(q2)) if q1 != q2 => {
                return Err(ExactNumError::MixedRadicands(q1, q2))
            }
            (q1, q2) => q1.or(q2),
        };
        if q.is_some() {
            let phi = x.phi();
            if x.sqrt_q.is_none() {
                x.coeffs.extend(std::iter::repeat(BigRational::zero()).take(phi));
                x.sqrt_q = q;
            }
            if y.sqrt_q.is_none() {
                y.coeffs.extend(std::iter::repeat(BigRational::zero()).take(phi));
                y.sqrt_q = q;
            }
        }
        Ok((x, y))
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExactNumError> {
        let (mut x, y) = Self::unify(self, other)?;
        for (c, d) in x.coeffs.iter_mut().zip(y.coeffs.iter()) {
            *c += d;
        }
        Ok(x.normalize())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ExactNumError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= r;
        }
        out
    }

    /// Product of two plain (no-radicand) coordinate blocks, reduced into
    /// the power basis.
    fn block_mul(t: &CycTables, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let phi = t.phi;
        let mut conv = vec![BigRational::zero(); 2 * phi - 1];
        for (i, ca) in a.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.iter().enumerate() {
                if !cb.is_zero() {
                    conv[i + j] += ca * cb;
                }
            }
        }
        let mut out: Vec<BigRational> = conv[..phi].to_vec();
        for (k, c) in conv.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            let vec = t.pow_vec(k as u64);
            for (j, base) in vec.iter().enumerate() {
                if !base.is_zero() {
                    out[j] += c * BigRational::from(base.clone());
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ExactNumError> {
        let (x, y) = Self::unify(self, other)?;
        let t = tables(x.m);
        let phi = t.phi;
        let out = match x.sqrt_q {
            None => CyclotomicElement {
                m: x.m,
                sqrt_q: None,
                coeffs: Self::block_mul(&t, &x.coeffs, &y.coeffs),
            },
            Some(q) => {
                let (a, b) = x.coeffs.split_at(phi);
                let (c, d) = y.coeffs.split_at(phi);
                let ac = Self::block_mul(&t, a, c);
                let bd = Self::block_mul(&t, b, d);
                let ad = Self::block_mul(&t, a, d);
                let bc = Self::block_mul(&t, b, c);
                let qr = BigRational::from(BigInt::from(q));
                let mut coeffs = Vec::with_capacity(2 * phi);
                for i in 0..phi {
                    coeffs.push(&ac[i] + &qr * &bd[i]);
                }
                for i in 0..phi {
                    coeffs.push(&ad[i] + &bc[i]);
                }
                CyclotomicElement { m: x.m, sqrt_q: Some(q), coeffs }
            }
        };
        Ok(out.normalize())
    }

    pub fn pow(&self, e: u64) -> Result<Self, ExactNumError> {
        let mut acc = Self::one(1);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn equals(&self, other: &Self) -> Result<bool, ExactNumError> {
        let (x, y) = Self::unify(self, other)?;
        Ok(x.coeffs == y.coeffs)
    }

    /// Coefficient vector reduced modulo p^prec; requires no radicand and
    /// p-integral coordinates. The power basis is a basis of the ring of
    /// integers localized away from ramification issues in coefficients,
    /// so coordinate-wise reduction is faithful for congruence checks.
    pub fn reduce_mod(&self, ctx: &ZModPN) -> Result<Vec<u64>, ExactNumError> {
        if self.sqrt_q.is_some() {
            return Err(ExactNumError::Invalid(
                "cannot reduce a radicand extension modulo p^N".into(),
            ));
        }
        self.coeffs
            .iter()
            .map(|c| {
                ctx.from_rational(c).ok_or(ExactNumError::NotAUnit(ctx.p()))
            })
            .collect()
    }

    /// Complex embedding sending zeta_m to exp(2 pi i k / m); diagnostics
    /// only.
    pub fn embed_complex(&self, k: u64) -> (f64, f64) {
        let phi = self.phi();
        let (mut re, mut im) = (0f64, 0f64);
        let sq = self.sqrt_q.map(|q| (q as f64).sqrt()).unwrap_or(0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cf = rational_to_f64(c);
            let block = i / phi;
            let expo = (i % phi) as u64;
            let ang = 2.0 * std::f64::consts::PI * ((expo * k % self.m) as f64) / (self.m as f64);
            let w = if block == 0 { cf } else { cf * sq };
            re += w * ang.cos();
            im += w * ang.sin();
        }
        (re, im)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    let v = nf / df;
    if r.is_negative() && v > 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        let as_i64 = |m: u64| -> Vec<i64> {
            cyclotomic_polynomial(m)
                .iter()
                .map(|c| i64::try_from(c.clone()).unwrap())
                .collect()
        };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(2), vec![1, 1]);
        assert_eq!(as_i64(4), vec![1, 0, 1]);
        assert_eq!(as_i64(5), vec![1, 1, 1, 1, 1]);
        assert_eq!(as_i64(12), vec![1, 0, -1, 0, 1]);
        // Degree phi(m) for a composite with several prime factors.
        assert_eq!(cyclotomic_polynomial(110).len() as u64, euler_phi(110) + 1);
    }

    #[test]
    fn roots_of_unity_multiply_by_exponent_addition() {
        for m in [3u64, 4, 5, 8, 12, 45] {
            for a in 0..m.min(9) {
                for b in 0..m.min(9) {
                    let za = CyclotomicElement::root_of_unity(m, a as i64);
                    let zb = CyclotomicElement::root_of_unity(m, b as i64);
                    let prod = za.mul(&zb).unwrap();
                    let expect = CyclotomicElement::root_of_unity(m, (a + b) as i64);
                    assert!(prod.equals(&expect).unwrap(), "m={m} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn primitive_root_power_sums_vanish() {
        // 1 + z + ... + z^{m-1} = 0 for every conductor > 1.
        for m in [2u64, 3, 7, 12, 110] {
            let mut s = CyclotomicElement::zero(1);
            for k in 0..m {
                s = s.add(&CyclotomicElement::root_of_unity(m, k as i64)).unwrap();
            }
            assert!(s.is_zero(), "m={m}");
        }
    }

    #[test]
    fn cross_conductor_arithmetic() {
        // zeta_4 * zeta_3 = zeta_12^(4+3) since zeta_4 = zeta_12^3,
        // zeta_3 = zeta_12^4.
        let z4 = CyclotomicElement::root_of_unity(4, 1);
        let z3 = CyclotomicElement::root_of_unity(3, 1);
        let prod = z4.mul(&z3).unwrap();
        assert!(prod.equals(&CyclotomicElement::root_of_unity(12, 7)).unwrap());
        // zeta_2 equals -1 written at conductor 1.
        let z2 = CyclotomicElement::root_of_unity(2, 1);
        assert!(z2.equals(&CyclotomicElement::from_integer(-1)).unwrap());
    }

    #[test]
    fn formal_square_roots() {
        let s5 = CyclotomicElement::sqrt(5);
        let sq = s5.mul(&s5).unwrap();
        assert!(sq.equals(&CyclotomicElement::from_integer(5)).unwrap());
        assert!(sq.radicand().is_none(), "radicand block must drop when zero");
        let s3 = CyclotomicElement::sqrt(3);
        assert!(matches!(
            s5.mul(&s3),
            Err(ExactNumError::MixedRadicands(5, 3))
        ));
        // Mixing with roots of unity keeps both parts exact.
        let z3 = CyclotomicElement::root_of_unity(3, 1);
        let x = s5.add(&z3).unwrap();
        let y = x.mul(&x).unwrap();
        // (sqrt5 + z)^2 = 5 + z^2 + 2 z sqrt5.
        let expect = CyclotomicElement::from_integer(5)
            .add(&CyclotomicElement::root_of_unity(3, 2))
            .unwrap()
            .add(&z3.scale(&BigRational::from(BigInt::from(2))).mul(&s5).unwrap())
            .unwrap();
        assert!(y.equals(&expect).unwrap());
    }

    #[test]
    fn reduce_mod_requires_integrality() {
        let ctx = ZModPN::new(5, 3);
        let half = CyclotomicElement::from_rational(BigRational::new(
            BigInt::from(1),
            BigInt::from(2),
        ));
        assert_eq!(half.reduce_mod(&ctx).unwrap(), vec![63]); // 1/2 = 63 mod 125
        let fifth = CyclotomicElement::from_rational(BigRational::new(
            BigInt::from(1),
            BigInt::from(5),
        ));
        assert!(fifth.reduce_mod(&ctx).is_err());
    }

    #[test]
    fn complex_embedding_matches_known_values() {
        let z8 = CyclotomicElement::root_of_unity(8, 1);
        let (re, im) = z8.embed_complex(1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((re - s).abs() < 1e-12 && (im - s).abs() < 1e-12);
    }
}
