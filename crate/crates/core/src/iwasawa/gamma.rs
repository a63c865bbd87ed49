//! The volume constant attached to a prime-to-p level ideal: class
//! number times the orders of GL_n and PGL_n over O/m, times the local
//! index q^(-n^2) * #GL_n(O/P) at each prime above p.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::IwasawaError;
use crate::weights::PrimePartition;

/// Level data for a prime-to-p ideal m: the class number of the base
/// field and, per prime factor of m, the residue field cardinality and
/// the exponent.
#[derive(Debug, Clone)]
pub struct IdealFactorization {
    pub class_number: u64,
    pub factors: Vec<(u64, u32)>,
}

/// #GL_n(F_q) = prod_{i < n} (q^n - q^i).
pub fn gl_order(n: u32, q: u64) -> BigInt {
    let q = BigInt::from(q);
    let qn = q.pow(n);
    (0..n).map(|i| &qn - q.pow(i)).product()
}

/// #GL_n(O/P^e) = q^((e-1) n^2) * #GL_n(F_q): the reduction to the
/// residue field is surjective with kernel of that order.
fn gl_order_power(n: u32, q: u64, e: u32) -> BigInt {
    BigInt::from(q).pow((e - 1) * n * n) * gl_order(n, q)
}

/// #PGL_n(O/P^e): GL mod its scalar center of order q^(e-1) (q - 1).
fn pgl_order_power(n: u32, q: u64, e: u32) -> BigInt {
    let center = BigInt::from(q).pow(e - 1) * BigInt::from(q - 1);
    let gl = gl_order_power(n, q, e);
    debug_assert_eq!(&gl % &center, BigInt::from(0));
    gl / center
}

/// gamma = h * #GL_n(O/m) * #PGL_n(O/m) * prod over P | p of
/// q_P^(-n^2) #GL_n(F_{q_P}), with q_P read off the partition's
/// residue degrees. Requires m coprime to p.
pub fn gamma_constant(
    data: &IdealFactorization,
    partition: &PrimePartition,
    n: u32,
) -> Result<BigRational, IwasawaError> {
    if n == 0 {
        return Err(IwasawaError::Unsupported("gamma needs n >= 1".into()));
    }
    if data.class_number == 0 {
        return Err(IwasawaError::Unsupported("class number must be positive".into()));
    }
    let p = partition.p;
    let mut level = BigInt::one();
    for &(q, e) in &data.factors {
        if q < 2 || e == 0 {
            return Err(IwasawaError::Unsupported(format!(
                "prime factor needs residue cardinality >= 2 and exponent >= 1, got ({q}, {e})"
            )));
        }
        if q % p == 0 {
            return Err(IwasawaError::Unsupported(format!(
                "level must be coprime to p: residue cardinality {q} is a power of {p}"
            )));
        }
        level *= gl_order_power(n, q, e) * pgl_order_power(n, q, e);
    }
    let mut local = BigRational::one();
    for block in &partition.blocks {
        let f = block.embedding_rows.len() as u32;
        let mut q = 1u64;
        for _ in 0..f {
            q = q.checked_mul(p).expect("residue cardinality overflows u64");
        }
        local *= BigRational::new(gl_order(n, q), BigInt::from(p).pow(f * n * n));
    }
    Ok(BigRational::from(BigInt::from(data.class_number) * level) * local)
}
