//! The projective line over Z/M with canonical representatives and
//! lifts to integral matrices of determinant one.
//!
//! A class (c : d) is stored as the lexicographically least unit
//! multiple (uc mod M, ud mod M); two pairs are identified exactly
//! when they generate the same cyclic submodule, which is the coset
//! datum a Manin symbol carries.

use num_integer::Integer;
use std::collections::HashMap;

/// 2x2 integer matrix, row major.
pub type Mat2 = [[i64; 2]; 2];

pub const SIGMA: Mat2 = [[0, -1], [1, 0]];
pub const TAU: Mat2 = [[0, -1], [1, -1]];
pub const ETA: Mat2 = [[-1, 0], [0, 1]];

pub fn mat_mul(a: Mat2, b: Mat2) -> Mat2 {
    let mut out = [[0i64; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn det(g: Mat2) -> i64 {
    g[0][0] * g[1][1] - g[0][1] * g[1][0]
}

/// The adjugate: g * adj(g) = det(g) * I. For determinant one this is
/// the inverse; for Hecke matrices it is the polynomial-side companion
/// of the Moebius action.
pub fn adjugate(g: Mat2) -> Mat2 {
    [[g[1][1], -g[0][1]], [-g[1][0], g[0][0]]]
}

/// Moebius image of a cusp held as a projective pair (num, den),
/// infinity = (1, 0). Output is reduced with nonnegative denominator.
pub fn apply_to_cusp(g: Mat2, c: (i64, i64)) -> (i64, i64) {
    let num = g[0][0] * c.0 + g[0][1] * c.1;
    let den = g[1][0] * c.0 + g[1][1] * c.1;
    normalize_cusp((num, den))
}

pub fn normalize_cusp((num, den): (i64, i64)) -> (i64, i64) {
    assert!((num, den) != (0, 0), "not a point of P^1(Q)");
    let g = num.gcd(&den);
    let (mut n, mut d) = (num / g, den / g);
    if d < 0 || (d == 0 && n < 0) {
        n = -n;
        d = -d;
    }
    (n, d)
}

#[derive(Debug, Clone)]
pub struct P1 {
    modulus: u64,
    reps: Vec<(u64, u64)>,
    index: HashMap<(u64, u64), usize>,
    units: Vec<u64>,
}

impl P1 {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 1);
        let m = modulus;
        let units: Vec<u64> = (1..=m).filter(|&u| u.gcd(&m) == 1 && u <= m).map(|u| u % m).collect();
        let mut index = HashMap::new();
        let mut reps = Vec::new();
        let mut p1 = P1 { modulus: m, reps: Vec::new(), index: HashMap::new(), units };
        for c in 0..m.max(1) {
            for d in 0..m.max(1) {
                if m > 1 && c.gcd(&d).gcd(&m) != 1 {
                    continue;
                }
                let canon = p1.canonical(c, d);
                if !index.contains_key(&canon) {
                    index.insert(canon, reps.len());
                    reps.push(canon);
                }
            }
        }
        p1.reps = reps;
        p1.index = index;
        p1
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn reps(&self) -> &[(u64, u64)] {
        &self.reps
    }

    fn canonical(&self, c: u64, d: u64) -> (u64, u64) {
        let m = self.modulus;
        if m == 1 {
            return (0, 0);
        }
        self.units
            .iter()
            .map(|&u| ((u * c) % m, (u * d) % m))
            .min()
            .expect("unit group is nonempty")
    }

    /// Index of the class of an integer row (c, d).
    pub fn index_of(&self, c: i64, d: i64) -> usize {
        let m = self.modulus as i64;
        let cc = c.rem_euclid(m.max(1)) as u64;
        let dd = d.rem_euclid(m.max(1)) as u64;
        let canon = self.canonical(cc % self.modulus.max(1), dd % self.modulus.max(1));
        self.index[&canon]
    }

    /// Right action by an integral matrix on the class of a row vector.
    pub fn act(&self, i: usize, g: Mat2) -> usize {
        let (c, d) = self.reps[i];
        let (c, d) = (c as i64, d as i64);
        self.index_of(c * g[0][0] + d * g[1][0], c * g[0][1] + d * g[1][1])
    }

    /// A determinant-one integral lift with bottom row congruent to a
    /// representative of the class mod M.
    pub fn lift(&self, i: usize) -> Mat2 {
        let m = self.modulus as i64;
        let (c0, d0) = self.reps[i];
        if self.modulus == 1 {
            return [[1, 0], [0, 1]];
        }
        let (c, d0) = (c0 as i64, d0 as i64);
        if c == 0 {
            // (0 : d) with d a unit: the class of (0 : 1).
            let g = [[1, 0], [0, 1]];
            debug_assert_eq!(self.index_of(g[1][0], g[1][1]), i);
            return g;
        }
        // Adjust d within its residue class until gcd(c, d) = 1.
        let mut d = d0;
        let mut t = 0;
        while c.gcd(&d) != 1 {
            d += m;
            t += 1;
            assert!(t <= c.abs() + 1, "lift search must terminate");
        }
        // Bezout: x d - y c = 1 gives the top row.
        let ext = i64::extended_gcd(&d, &(-c));
        debug_assert_eq!(ext.gcd, 1);
        let g = [[ext.x, ext.y], [c, d]];
        debug_assert_eq!(det(g), 1);
        debug_assert_eq!(self.index_of(g[1][0], g[1][1]), i);
        g
    }
}
