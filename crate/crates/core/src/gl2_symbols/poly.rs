//! Homogeneous two-variable forms of fixed degree with the right
//! substitution action (P|g)(X, Y) = P(aX + bY, cX + dY).
//!
//! A form of degree m is a dense coefficient vector indexed by the
//! exponent of X: coeffs[d] multiplies X^d Y^(m-d).

use super::p1::Mat2;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn zero_form(degree: usize) -> Vec<BigRational> {
    vec![BigRational::zero(); degree + 1]
}

/// The monomial X^d Y^(degree-d).
pub fn monomial(degree: usize, d: usize) -> Vec<BigRational> {
    assert!(d <= degree);
    let mut v = zero_form(degree);
    v[d] = BigRational::one();
    v
}

/// Binomial expansion of (a X + b Y)^n as a degree-n form.
fn linear_power(a: &BigInt, b: &BigInt, n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = vec![BigInt::zero(); out.len() + 1];
        for (d, c) in out.iter().enumerate() {
            // multiply X^d Y^(len-1-d) term by (a X + b Y)
            next[d + 1] += c * a;
            next[d] += c * b;
        }
        out = next;
    }
    out
}

fn convolve(u: &[BigInt], v: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); u.len() + v.len() - 1];
    for (i, a) in u.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in v.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// (P|g)(X, Y) = P(aX + bY, cX + dY) on coefficient vectors.
pub fn act(coeffs: &[BigRational], g: Mat2) -> Vec<BigRational> {
    let deg = coeffs.len() - 1;
    let (a, b) = (BigInt::from(g[0][0]), BigInt::from(g[0][1]));
    let (c, d) = (BigInt::from(g[1][0]), BigInt::from(g[1][1]));
    // Precompute (aX+bY)^i and (cX+dY)^i up to deg.
    let mut top = Vec::with_capacity(deg + 1);
    let mut bot = Vec::with_capacity(deg + 1);
    for i in 0..=deg {
        top.push(linear_power(&a, &b, i));
        bot.push(linear_power(&c, &d, i));
    }
    let mut out = zero_form(deg);
    for (d_exp, coeff) in coeffs.iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let prod = convolve(&top[d_exp], &bot[deg - d_exp]);
        for (e, term) in prod.iter().enumerate() {
            if !term.is_zero() {
                out[e] += coeff * BigRational::from(term.clone());
            }
        }
    }
    out
}

/// The twisted-cycle kernel (aY - hX)^j Y^(degree-j) used to pair a
/// symbol against the cusp a/h; its image under the adjugate of
/// (1, c; 0, p) is the kernel for (a + c h) / (h p), which is what
/// makes level-by-level compatibility an exact identity.
pub fn cusp_kernel(degree: usize, a: i64, h: i64, j: usize) -> Vec<BigRational> {
    assert!(j <= degree);
    let lin = linear_power(&BigInt::from(-h), &BigInt::from(a), j);
    let mut out = zero_form(degree);
    for (d, c) in lin.iter().enumerate() {
        // lin is a degree-j form; padding with Y^(degree-j) keeps the
        // X-exponent.
        out[d] = BigRational::from(c.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn as_i64(v: &[BigRational]) -> Vec<i64> {
        v.iter().map(|c| c.to_integer().to_i64().unwrap()).collect()
    }

    #[test]
    fn substitution_matches_hand_expansion() {
        // P = X^2, g = (1,2;3,4): (X+2Y)^2 = X^2 + 4XY + 4Y^2.
        let p = monomial(2, 2);
        assert_eq!(as_i64(&act(&p, [[1, 2], [3, 4]])), vec![4, 4, 1]);
        // P = XY, same g: (X+2Y)(3X+4Y) = 3X^2 + 10XY + 8Y^2.
        let p = monomial(2, 1);
        assert_eq!(as_i64(&act(&p, [[1, 2], [3, 4]])), vec![8, 10, 3]);
    }

    #[test]
    fn action_is_multiplicative() {
        let g = [[2, 1], [1, 1]];
        let h = [[1, -3], [0, 1]];
        let p: Vec<BigRational> =
            [3i64, -1, 4, 1].iter().map(|&c| BigRational::from(BigInt::from(c))).collect();
        let lhs = act(&act(&p, g), h);
        let rhs = act(&p, super::super::p1::mat_mul(g, h));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn kernel_transform_steps_down_the_tower() {
        // K(a, h)|adj(1,c;0,p) = K(a + c h, h p) with adj = (p, -c; 0, 1).
        let (a, h, j, deg) = (2i64, 5i64, 3usize, 6usize);
        for c in 0..5i64 {
            let k = cusp_kernel(deg, a, h, j);
            let moved = act(&k, [[5, -c], [0, 1]]);
            assert_eq!(moved, cusp_kernel(deg, a + c * h, h * 5, j));
        }
    }

    #[test]
    fn kernel_at_weight_two_is_constant() {
        assert_eq!(as_i64(&cusp_kernel(0, 7, 25, 0)), vec![1]);
    }
}
