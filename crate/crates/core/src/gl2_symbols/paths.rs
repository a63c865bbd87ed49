//! Decomposition of a geodesic path between cusps into determinant-one
//! pieces via continued-fraction convergents.
//!
//! With convergents p_i/q_i of a/b (p_{-1}/q_{-1} = 1/0), the matrices
//! g_i = (p_i, (-1)^(i-1) p_{i-1}; q_i, (-1)^(i-1) q_{i-1}) have
//! determinant one and g_i maps (0, infinity) to the consecutive pair
//! (p_{i-1}/q_{i-1}, p_i/q_i), so the path from infinity to a/b is the
//! sum over i of the g_i-translates of the path from 0 to infinity.

use super::p1::{det, normalize_cusp, Mat2};

/// Determinant-one matrices whose (0 -> infinity) translates
/// concatenate to the path from infinity to num/den. The cusp must be
/// finite (den != 0); the empty chain is the zero path.
pub fn unimodular_chain(cusp: (i64, i64)) -> Vec<Mat2> {
    let (num, den) = normalize_cusp(cusp);
    assert!(den != 0, "chain endpoint must be a finite cusp");
    // Continued fraction of num/den with floor division keeps all
    // partial quotients after the first positive.
    let (mut a, mut b) = (num, den);
    let mut quotients = Vec::new();
    while b != 0 {
        let q = a.div_euclid(b);
        quotients.push(q);
        let r = a - q * b;
        a = b;
        b = r;
    }
    // Convergents with seeds p_{-2}/q_{-2} = 0/1, p_{-1}/q_{-1} = 1/0.
    let (mut p_prev, mut q_prev) = (1i64, 0i64);
    let (mut p_pp, mut q_pp) = (0i64, 1i64);
    let mut chain = Vec::with_capacity(quotients.len());
    for (i, &q) in quotients.iter().enumerate() {
        let p_cur = q * p_prev + p_pp;
        let q_cur = q * q_prev + q_pp;
        let sign = if i % 2 == 0 { -1 } else { 1 };
        let g = [[p_cur, sign * p_prev], [q_cur, sign * q_prev]];
        debug_assert_eq!(det(g), 1);
        chain.push(g);
        p_pp = p_prev;
        q_pp = q_prev;
        p_prev = p_cur;
        q_prev = q_cur;
    }
    debug_assert_eq!(normalize_cusp((p_prev, q_prev)), (num, den));
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl2_symbols::p1::apply_to_cusp;

    fn endpoints(chain: &[Mat2]) -> Vec<((i64, i64), (i64, i64))> {
        chain.iter().map(|&g| (apply_to_cusp(g, (0, 1)), apply_to_cusp(g, (1, 0)))).collect()
    }

    #[test]
    fn chain_concatenates_from_infinity_to_target() {
        for cusp in [(3, 7), (-5, 8), (22, 7), (0, 1), (-1, 3), (534, 1331)] {
            let chain = unimodular_chain(cusp);
            let ends = endpoints(&chain);
            assert!(!ends.is_empty());
            assert_eq!(ends[0].0, (1, 0), "chain starts at infinity");
            assert_eq!(ends.last().unwrap().1, normalize_cusp(cusp));
            for w in ends.windows(2) {
                assert_eq!(w[0].1, w[1].0, "consecutive pieces share an endpoint");
            }
        }
    }

    #[test]
    fn integer_cusp_is_a_single_piece() {
        let chain = unimodular_chain((4, 1));
        assert_eq!(chain.len(), 1);
        assert_eq!(chain[0], [[4, -1], [1, 0]]);
    }
}
