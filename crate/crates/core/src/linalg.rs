//! Exact dense linear algebra over a coefficient context, plus an echelon
//! structure for finitely generated modules over the localization Z_(p).
//!
//! Row reduction only ever divides by invertible pivots, so the same code
//! serves the rationals and residue fields. Over Z/p^N with N > 1 a column
//! whose entries are all non-units is skipped; callers that need genuine
//! field behaviour use precision 1.

use crate::exactnum::padic::{bigint_valuation, padic_valuation};
use crate::ring::{Ring, QQ};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<R: Ring> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<R::El>,
}

impl<R: Ring> Mat<R> {
    pub fn zero(ctx: &R, rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(ctx: &R, n: usize) -> Self {
        let mut m = Self::zero(ctx, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = ctx.one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R::El>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn at(&self, i: usize, j: usize) -> &R::El {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut R::El {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[R::El] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self, ctx: &R) -> Self {
        let mut t = Self::zero(ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, ctx: &R, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zero(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if ctx.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let t = ctx.mul(a, other.at(k, j));
                    *out.at_mut(i, j) = ctx.add(out.at(i, j), &t);
                }
            }
        }
        out
    }

    pub fn add(&self, ctx: &R, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a = ctx.add(a, b);
        }
        out
    }

    pub fn sub(&self, ctx: &R, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a = ctx.sub(a, b);
        }
        out
    }

    pub fn scale(&self, ctx: &R, c: &R::El) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = ctx.mul(a, c);
        }
        out
    }

    pub fn mul_vec(&self, ctx: &R, v: &[R::El]) -> Vec<R::El> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = ctx.zero();
                for j in 0..self.cols {
                    let t = ctx.mul(self.at(i, j), &v[j]);
                    acc = ctx.add(&acc, &t);
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self, ctx: &R) -> bool {
        self.data.iter().all(|a| ctx.is_zero(a))
    }

    /// In-place reduced row echelon form using only invertible pivots.
    /// Returns the pivot columns; the rank is their count.
    pub fn rref(&mut self, ctx: &R) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| ctx.inv(self.at(i, c)).is_some())
            else {
                continue;
            };
            for j in 0..self.cols {
                self.data.swap(r * self.cols + j, pr * self.cols + j);
            }
            let inv = ctx.inv(self.at(r, c)).expect("pivot is invertible");
            for j in 0..self.cols {
                *self.at_mut(r, j) = ctx.mul(self.at(r, j), &inv);
            }
            for i in 0..self.rows {
                if i != r && !ctx.is_zero(self.at(i, c)) {
                    let f = self.at(i, c).clone();
                    for j in 0..self.cols {
                        let t = ctx.mul(&f, self.at(r, j));
                        *self.at_mut(i, j) = ctx.sub(self.at(i, j), &t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, ctx: &R) -> usize {
        let mut m = self.clone();
        m.rref(ctx).len()
    }

    /// Basis of the right null space, assuming field-like coefficients.
    pub fn nullspace(&self, ctx: &R) -> Vec<Vec<R::El>> {
        let mut m = self.clone();
        let pivots = m.rref(ctx);
        let mut basis = Vec::new();
        let mut pivot_of_col = vec![None; self.cols];
        for (row, &c) in pivots.iter().enumerate() {
            pivot_of_col[c] = Some(row);
        }
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = vec![ctx.zero(); self.cols];
            v[free] = ctx.one();
            for (c, slot) in pivot_of_col.iter().enumerate() {
                if let Some(row) = slot {
                    v[c] = ctx.neg(m.at(*row, free));
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solve self * x = b over field-like coefficients; None when
    /// inconsistent. Free variables are set to zero.
    pub fn solve(&self, ctx: &R, b: &[R::El]) -> Option<Vec<R::El>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zero(ctx, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, self.cols) = b[i].clone();
        }
        let pivots = aug.rref(ctx);
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![ctx.zero(); self.cols];
        for (row, &c) in pivots.iter().enumerate() {
            x[c] = aug.at(row, self.cols).clone();
        }
        Some(x)
    }
}

impl Mat<QQ> {
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from(BigInt::from(x))).collect())
                .collect(),
        )
    }

    pub fn det(&self) -> BigRational {
        assert_eq!(self.rows, self.cols);
        let ctx = QQ;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = BigRational::one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.at(i, c).is_zero()) else {
                return BigRational::zero();
            };
            if pr != c {
                for j in 0..n {
                    m.data.swap(c * n + j, pr * n + j);
                }
                det = -det;
            }
            let pv = m.at(c, c).clone();
            det *= &pv;
            for i in (c + 1)..n {
                if !m.at(i, c).is_zero() {
                    let f = m.at(i, c) / &pv;
                    for j in c..n {
                        let t = &f * m.at(c, j);
                        *m.at_mut(i, j) = ctx.sub(m.at(i, j), &t);
                    }
                }
            }
        }
        det
    }

    /// Coefficients of det(x I - A), little-endian and monic, recovered by
    /// evaluating exact determinants at n+1 integer points and
    /// interpolating.
    pub fn charpoly(&self) -> Vec<BigRational> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let points: Vec<BigRational> =
            (0..=n as i64).map(|k| BigRational::from(BigInt::from(k))).collect();
        let values: Vec<BigRational> = points
            .iter()
            .map(|x| {
                let mut m = self.clone();
                for i in 0..n {
                    *m.at_mut(i, i) = x - self.at(i, i);
                    for j in 0..n {
                        if i != j {
                            *m.at_mut(i, j) = -self.at(i, j).clone();
                        }
                    }
                }
                m.det()
            })
            .collect();
        lagrange_interpolate(&points, &values)
    }
}

/// Exact Lagrange interpolation; returns little-endian coefficients.
pub fn lagrange_interpolate(xs: &[BigRational], ys: &[BigRational]) -> Vec<BigRational> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut acc = vec![BigRational::zero(); n];
    for i in 0..n {
        // Build prod_{j != i} (x - x_j) / (x_i - x_j), scaled by y_i.
        let mut num = vec![BigRational::one()];
        let mut den = BigRational::one();
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut next = vec![BigRational::zero(); num.len() + 1];
            for (k, c) in num.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &xs[j];
            }
            num = next;
            den *= &xs[i] - &xs[j];
        }
        let w = &ys[i] / den;
        for (k, c) in num.iter().enumerate() {
            acc[k] += c * &w;
        }
    }
    acc
}

#[derive(Debug, Clone)]
struct LatticeRow {
    pivot_col: usize,
    pivot_val: i64,
    vec: Vec<BigRational>,
}

/// A finitely generated Z_(p)-submodule of Q^dim held in echelon form:
/// each row has a pivot column where its entry is an exact power of p and
/// below-minimal valuation among stored rows. Insertion keeps the span
/// and reduction expresses membership with p-integral coefficients.
#[derive(Debug, Clone)]
pub struct PAdicLattice {
    p: u64,
    dim: usize,
    rows: Vec<LatticeRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    Grew,
    Contained,
}

fn rat_pow_p(p: u64, e: i64) -> BigRational {
    let pe = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from(pe)
    } else {
        BigRational::new(BigInt::one(), pe)
    }
}

impl PAdicLattice {
    pub fn new(p: u64, dim: usize) -> Self {
        PAdicLattice { p, dim, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Pivot profile (column, valuation), sorted by column. Two lattices
    /// with equal profiles and equal spans coincide; a stabilizing profile
    /// is the saturation certificate used by iterative closures.
    pub fn profile(&self) -> Vec<(usize, i64)> {
        let mut p: Vec<(usize, i64)> =
            self.rows.iter().map(|r| (r.pivot_col, r.pivot_val)).collect();
        p.sort_unstable();
        p
    }

    pub fn basis(&self) -> Vec<&[BigRational]> {
        self.rows.iter().map(|r| r.vec.as_slice()).collect()
    }

    fn val(&self, x: &BigRational) -> i64 {
        padic_valuation(x, self.p).expect("nonzero entry")
    }

    pub fn insert(&mut self, mut v: Vec<BigRational>) -> Insertion {
        assert_eq!(v.len(), self.dim);
        let mut grew = false;
        loop {
            let Some(c) = v.iter().position(|x| !x.is_zero()) else {
                return if grew { Insertion::Grew } else { Insertion::Contained };
            };
            let val = self.val(&v[c]);
            match self.rows.iter_mut().find(|r| r.pivot_col == c) {
                None => {
                    let unit = rat_pow_p(self.p, val) / &v[c];
                    for x in v.iter_mut() {
                        *x *= &unit;
                    }
                    self.rows.push(LatticeRow { pivot_col: c, pivot_val: val, vec: v });
                    self.rows.sort_by_key(|r| r.pivot_col);
                    return Insertion::Grew;
                }
                Some(row) => {
                    if val >= row.pivot_val {
                        let f = &v[c] / rat_pow_p(self.p, row.pivot_val);
                        for (x, b) in v.iter_mut().zip(row.vec.iter()) {
                            *x -= &f * b;
                        }
                        debug_assert!(v[c].is_zero());
                    } else {
                        // Strictly smaller valuation: the incoming vector
                        // becomes the new pivot row and the old row goes
                        // back through reduction. Total pivot valuation
                        // drops, so this terminates.
                        let unit = rat_pow_p(self.p, val) / &v[c];
                        for x in v.iter_mut() {
                            *x *= &unit;
                        }
                        std::mem::swap(&mut row.vec, &mut v);
                        row.pivot_val = val;
                        grew = true;
                    }
                }
            }
        }
    }

    /// Reduce v against the echelon basis; the remainder is zero exactly
    /// when v lies in the lattice. Coefficients returned alongside are
    /// p-integral by the pivot-valuation invariant.
    pub fn reduce(&self, v: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        assert_eq!(v.len(), self.dim);
        let mut rem = v.to_vec();
        let mut coeffs = vec![BigRational::zero(); self.rows.len()];
        for (idx, row) in self.rows.iter().enumerate() {
            let c = row.pivot_col;
            if rem[c].is_zero() {
                continue;
            }
            let val = self.val(&rem[c]);
            if val < row.pivot_val {
                continue;
            }
            let f = &rem[c] / rat_pow_p(self.p, row.pivot_val);
            for (x, b) in rem.iter_mut().zip(row.vec.iter()) {
                *x -= &f * b;
            }
            coeffs[idx] = f;
        }
        (rem, coeffs)
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        self.reduce(v).0.iter().all(|x| x.is_zero())
    }

    /// Sum of pivot valuations: the index valuation of the lattice inside
    /// its p-saturation within the same column span.
    pub fn index_valuation(&self) -> i64 {
        self.rows.iter().map(|r| r.pivot_val).sum()
    }

    /// True when every basis vector has integer entries whose pivot
    /// valuations are nonnegative (an honest Z_(p)-lattice of a Z-module).
    pub fn is_integral(&self) -> bool {
        self.rows.iter().all(|r| {
            r.pivot_val >= 0
                && r.vec.iter().all(|x| {
                    x.is_zero()
                        || bigint_valuation(x.denom(), self.p).map_or(false, |v| v == 0)
                })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::ZModPN;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rref_rank_nullspace_over_rationals() {
        let a = Mat::<QQ>::from_i64(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[1, 1, 1, 1]]);
        assert_eq!(a.rank(&QQ), 2);
        let ns = a.nullspace(&QQ);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(a.mul_vec(&QQ, v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_and_inconsistency() {
        let a = Mat::<QQ>::from_i64(&[&[2, 1], &[1, 3]]);
        let b = vec![rat(5, 1), rat(10, 1)];
        let x = a.solve(&QQ, &b).unwrap();
        assert_eq!(a.mul_vec(&QQ, &x), b);
        let sing = Mat::<QQ>::from_i64(&[&[1, 1], &[2, 2]]);
        assert!(sing.solve(&QQ, &[rat(1, 1), rat(3, 1)]).is_none());
    }

    #[test]
    fn rank_over_prime_field() {
        let ctx = ZModPN::new(2, 1);
        let m = Mat::from_rows(vec![vec![1u64, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        // Rows sum to zero mod 2.
        assert_eq!(m.rank(&ctx), 2);
    }

    #[test]
    fn determinant_and_charpoly() {
        let a = Mat::<QQ>::from_i64(&[&[2, 1], &[1, 2]]);
        assert_eq!(a.det(), rat(3, 1));
        // char(A) = x^2 - 4x + 3.
        assert_eq!(a.charpoly(), vec![rat(3, 1), rat(-4, 1), rat(1, 1)]);
        let c = Mat::<QQ>::from_i64(&[&[0, 0, 2], &[1, 0, -5], &[0, 1, 4]]);
        // Companion matrix of x^3 - 4x^2 + 5x - 2.
        assert_eq!(c.charpoly(), vec![rat(-2, 1), rat(5, 1), rat(-4, 1), rat(1, 1)]);
    }

    #[test]
    fn lattice_membership_and_growth() {
        let mut lat = PAdicLattice::new(5, 2);
        assert_eq!(lat.insert(vec![rat(1, 1), rat(0, 1)]), Insertion::Grew);
        assert_eq!(lat.insert(vec![rat(0, 1), rat(5, 1)]), Insertion::Grew);
        assert!(lat.contains(&[rat(3, 1), rat(10, 1)]));
        assert!(!lat.contains(&[rat(0, 1), rat(1, 1)]));
        assert!(!lat.contains(&[rat(1, 5), rat(0, 1)]));
        // A 1/5 multiple strictly enlarges the lattice via a pivot swap.
        assert_eq!(lat.insert(vec![rat(1, 5), rat(0, 1)]), Insertion::Grew);
        assert!(lat.contains(&[rat(1, 5), rat(0, 1)]));
        assert_eq!(lat.insert(vec![rat(25, 1), rat(0, 1)]), Insertion::Contained);
        assert_eq!(lat.profile(), vec![(0, -1), (1, 1)]);
        assert_eq!(lat.index_valuation(), 0);
    }

    #[test]
    fn lattice_coefficients_are_p_integral() {
        let mut lat = PAdicLattice::new(3, 3);
        lat.insert(vec![rat(3, 1), rat(1, 1), rat(0, 1)]);
        lat.insert(vec![rat(0, 1), rat(9, 1), rat(1, 1)]);
        let v = [rat(9, 1), rat(21, 1), rat(2, 1)];
        let (rem, coeffs) = lat.reduce(&v);
        assert!(rem.iter().all(|x| x.is_zero()));
        for c in &coeffs {
            assert!(bigint_valuation(c.denom(), 3) == Some(0));
        }
        // Reconstruct v from the returned coefficients.
        let basis = lat.basis();
        for j in 0..3 {
            let mut acc = BigRational::zero();
            for (c, row) in coeffs.iter().zip(basis.iter()) {
                acc += c * &row[j];
            }
            assert_eq!(acc, v[j]);
        }
    }

    #[test]
    fn lattice_closed_under_random_combinations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut lat = PAdicLattice::new(5, 4);
        let mut gens: Vec<Vec<BigRational>> = Vec::new();
        for _ in 0..6 {
            let v: Vec<BigRational> =
                (0..4).map(|_| rat(rng.gen_range(-20..20), 1)).collect();
            gens.push(v.clone());
            lat.insert(v);
        }
        for _ in 0..50 {
            let mut comb = vec![BigRational::zero(); 4];
            for g in &gens {
                let c = rat(rng.gen_range(-10..10), 1);
                for (x, y) in comb.iter_mut().zip(g.iter()) {
                    *x += &c * y;
                }
            }
            assert!(lat.contains(&comb));
        }
    }
}
