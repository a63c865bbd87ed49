//! Ambient tensor model: a product of exterior powers of the standard module.
//!
//! A slot with label k carries the k-th exterior power of the rank 2n standard
//! module, with basis indexed by sorted k-subsets.  The full ambient space is
//! the tensor product over all slots; a basis index is the mixed-radix tuple of
//! per-slot subset indices.  Lie generators act as derivations across slots,
//! group elements act through minor matrices slot by slot.  The determinant
//! twist is handled by the caller: every action here is the untwisted one.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::HighestWeightError;
use crate::linalg::Mat;
use crate::ring::QQ;

/// Sorted k-subsets of 0..2n with an index lookup.
pub(crate) struct SubsetTable {
    pub sets: Vec<Vec<u8>>,
    pub index: HashMap<Vec<u8>, usize>,
}

impl SubsetTable {
    fn new(two_n: usize, k: usize) -> Self {
        let mut sets = Vec::new();
        let mut cur: Vec<u8> = Vec::new();
        enumerate_subsets(two_n, k, 0, &mut cur, &mut sets);
        let index = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        SubsetTable { sets, index }
    }
}

fn enumerate_subsets(two_n: usize, k: usize, start: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for x in start..two_n {
        cur.push(x as u8);
        enumerate_subsets(two_n, k, x + 1, cur, out);
        cur.pop();
    }
}

/// Tensor product of exterior power slots.
pub(crate) struct TensorModel {
    pub two_n: usize,
    pub slots: Vec<usize>,
    tables: Vec<Arc<SubsetTable>>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    pub dim: usize,
}

impl TensorModel {
    pub fn new(two_n: usize, slots: Vec<usize>, ambient_bound: u64) -> Result<Self, HighestWeightError> {
        let mut shared: HashMap<usize, Arc<SubsetTable>> = HashMap::new();
        let mut tables = Vec::new();
        let mut dims = Vec::new();
        let mut dim: u64 = 1;
        for &k in &slots {
            let table = shared
                .entry(k)
                .or_insert_with(|| Arc::new(SubsetTable::new(two_n, k)))
                .clone();
            dims.push(table.sets.len());
            dim = dim.saturating_mul(table.sets.len() as u64);
            if dim > ambient_bound {
                return Err(HighestWeightError::AmbientTooLarge(dim));
            }
            tables.push(table);
        }
        let mut strides = vec![1usize; slots.len()];
        for s in (0..slots.len().saturating_sub(1)).rev() {
            strides[s] = strides[s + 1] * dims[s + 1];
        }
        Ok(TensorModel { two_n, slots, tables, dims, strides, dim: dim as usize })
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut tuple = vec![0usize; self.slots.len()];
        for s in 0..self.slots.len() {
            tuple[s] = idx / self.strides[s];
            idx %= self.strides[s];
        }
        tuple
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.strides).map(|(t, s)| t * s).sum()
    }

    /// Letter multiplicities across slots: the untwisted torus weight.
    pub fn weight_of(&self, idx: usize) -> Vec<i64> {
        let tuple = self.decode(idx);
        let mut w = vec![0i64; self.two_n];
        for (s, &t) in tuple.iter().enumerate() {
            for &x in &self.tables[s].sets[t] {
                w[x as usize] += 1;
            }
        }
        w
    }

    /// E_ij on one slot: replaces letter j by i with the wedge reordering sign.
    /// Returns the target subset index and sign, or None when the image is zero.
    fn slot_eij(&self, slot: usize, i: u8, j: u8, subset_idx: usize) -> Option<(usize, i64)> {
        let table = &self.tables[slot];
        let s = &table.sets[subset_idx];
        if !s.contains(&j) || (i != j && s.contains(&i)) {
            return None;
        }
        if i == j {
            return Some((subset_idx, 1));
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let between = s.iter().filter(|&&x| x > lo && x < hi).count();
        let sign = if between % 2 == 0 { 1 } else { -1 };
        let mut t: Vec<u8> = s.iter().cloned().filter(|&x| x != j).collect();
        let pos = t.binary_search(&i).unwrap_err();
        t.insert(pos, i);
        Some((table.index[&t], sign))
    }

    /// Derivation action of E_ij across all slots.
    pub fn apply_eij(&self, i: usize, j: usize, v: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.dim];
        for (a, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let tuple = self.decode(a);
            for s in 0..self.slots.len() {
                if let Some((t, sign)) = self.slot_eij(s, i as u8, j as u8, tuple[s]) {
                    let mut nt = tuple.clone();
                    nt[s] = t;
                    let b = self.encode(&nt);
                    out[b] += c * BigRational::from_integer(BigInt::from(sign));
                }
            }
        }
        out
    }

    /// Divided power E_ij^m / m! for i != j: the sum over m-subsets of slots of
    /// the product of single-slot actions.  Integer matrix on the subset basis.
    pub fn apply_divided_eij(&self, i: usize, j: usize, m: usize, v: &[BigRational]) -> Vec<BigRational> {
        assert_ne!(i, j);
        if m == 0 {
            return v.to_vec();
        }
        if m > self.slots.len() {
            return vec![BigRational::zero(); self.dim];
        }
        let mut out = vec![BigRational::zero(); self.dim];
        self.divided_rec(i as u8, j as u8, 0, m, v, &mut out);
        out
    }

    fn divided_rec(&self, i: u8, j: u8, slot: usize, rem: usize, cur: &[BigRational], out: &mut Vec<BigRational>) {
        if rem == 0 {
            for (a, c) in cur.iter().enumerate() {
                if !c.is_zero() {
                    out[a] += c;
                }
            }
            return;
        }
        if self.slots.len() - slot < rem {
            return;
        }
        self.divided_rec(i, j, slot + 1, rem, cur, out);
        let mut next = vec![BigRational::zero(); self.dim];
        let mut any = false;
        for (a, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let tuple = self.decode(a);
            if let Some((t, sign)) = self.slot_eij(slot, i, j, tuple[slot]) {
                let mut nt = tuple.clone();
                nt[slot] = t;
                let b = self.encode(&nt);
                next[b] += c * BigRational::from_integer(BigInt::from(sign));
                any = true;
            }
        }
        if any {
            self.divided_rec(i, j, slot + 1, rem - 1, &next, out);
        }
    }

    /// Matrix of the k-th exterior power of g on sorted subsets.
    fn minors(&self, g: &Mat<QQ>, k: usize) -> Vec<Vec<BigRational>> {
        let table = SubsetTable::new(self.two_n, k);
        let n = table.sets.len();
        let mut m = vec![vec![BigRational::zero(); n]; n];
        for (si, s) in table.sets.iter().enumerate() {
            for (ti, t) in table.sets.iter().enumerate() {
                let rows: Vec<Vec<BigRational>> = s
                    .iter()
                    .map(|&r| t.iter().map(|&c| g.at(r as usize, c as usize).clone()).collect())
                    .collect();
                m[si][ti] = Mat::<QQ>::from_rows(rows).det();
            }
        }
        m
    }

    /// Untwisted action of an invertible group element, slot by slot.
    pub fn apply_group(&self, g: &Mat<QQ>, v: &[BigRational]) -> Result<Vec<BigRational>, HighestWeightError> {
        if g.det().is_zero() {
            return Err(HighestWeightError::DegenerateGroupElement);
        }
        let mut cache: HashMap<usize, Vec<Vec<BigRational>>> = HashMap::new();
        let mut cur = v.to_vec();
        for s in 0..self.slots.len() {
            let k = self.slots[s];
            let m = cache.entry(k).or_insert_with(|| self.minors(g, k));
            let d = self.dims[s];
            let stride = self.strides[s];
            let outer = self.dim / (d * stride);
            let mut next = vec![BigRational::zero(); self.dim];
            for pre in 0..outer {
                for post in 0..stride {
                    let base = pre * d * stride + post;
                    for si in 0..d {
                        let mut acc = BigRational::zero();
                        for ti in 0..d {
                            let x = &cur[base + ti * stride];
                            if !x.is_zero() && !m[si][ti].is_zero() {
                                acc += &m[si][ti] * x;
                            }
                        }
                        next[base + si * stride] = acc;
                    }
                }
            }
            cur = next;
        }
        Ok(cur)
    }
}

/// det(g)^m as an exact rational; errors when g is singular and m < 0.
pub(crate) fn det_power(g: &Mat<QQ>, m: i64) -> Result<BigRational, HighestWeightError> {
    let d = g.det();
    if d.is_zero() {
        return Err(HighestWeightError::DegenerateGroupElement);
    }
    let mut out = BigRational::one();
    let base = if m >= 0 { d } else { d.recip() };
    for _ in 0..m.unsigned_abs() {
        out *= &base;
    }
    Ok(out)
}

/// True when every coordinate is an integer.
pub(crate) fn integral_vec(v: &[BigRational]) -> Option<Vec<BigInt>> {
    let mut out = Vec::with_capacity(v.len());
    for x in v {
        if !x.denom().is_one() {
            return None;
        }
        out.push(x.numer().clone());
    }
    Some(out)
}

/// Divides by the content and makes the first nonzero coordinate positive.
pub(crate) fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let mut denom_lcm = BigInt::one();
    for x in v {
        denom_lcm = num_integer::lcm(denom_lcm, x.denom().clone());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&denom_lcm / x.denom()))
        .collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = num_integer::gcd(g, x.clone());
    }
    if g.is_zero() {
        return ints;
    }
    let mut out: Vec<BigInt> = ints.iter().map(|x| x / &g).collect();
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in &mut out {
                *x = -x.clone();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn subset_tables_count_binomials() {
        let t = SubsetTable::new(4, 2);
        assert_eq!(t.sets.len(), 6);
        assert_eq!(t.index[&vec![1u8, 3u8]], t.sets.iter().position(|s| s == &vec![1, 3]).unwrap());
    }

    #[test]
    fn derivation_on_wedge_carries_sort_sign() {
        // Lambda^2 of rank 4, single slot.  E_20 maps e0^e1 to e2^e1 = -e1^e2.
        let model = TensorModel::new(4, vec![2], 1000).unwrap();
        let idx01 = model.tables[0].index[&vec![0u8, 1u8]];
        let idx12 = model.tables[0].index[&vec![1u8, 2u8]];
        let mut v = vec![BigRational::zero(); model.dim];
        v[idx01] = rat(1);
        let out = model.apply_eij(2, 0, &v);
        assert_eq!(out[idx12], rat(-1));
    }

    #[test]
    fn derivation_acts_across_slots() {
        // Two copies of the standard module: E_10 (e0 x e0) = e1 x e0 + e0 x e1.
        let model = TensorModel::new(2, vec![1, 1], 1000).unwrap();
        let mut v = vec![BigRational::zero(); model.dim];
        v[model.encode(&[0, 0])] = rat(1);
        let out = model.apply_eij(1, 0, &v);
        assert_eq!(out[model.encode(&[1, 0])], rat(1));
        assert_eq!(out[model.encode(&[0, 1])], rat(1));
        assert_eq!(out[model.encode(&[0, 0])], rat(0));
    }

    #[test]
    fn divided_power_matches_iterated_action() {
        // On three standard slots, E^2/2 equals applying E twice then halving.
        let model = TensorModel::new(2, vec![1, 1, 1], 1000).unwrap();
        let mut v = vec![BigRational::zero(); model.dim];
        v[model.encode(&[0, 0, 0])] = rat(3);
        let once = model.apply_eij(1, 0, &v);
        let twice = model.apply_eij(1, 0, &once);
        let divided = model.apply_divided_eij(1, 0, 2, &v);
        for a in 0..model.dim {
            assert_eq!(&twice[a] / rat(2), divided[a]);
        }
        // Divided powers of integer vectors stay integral.
        assert!(integral_vec(&divided).is_some());
    }

    #[test]
    fn group_action_is_multiplicative() {
        let model = TensorModel::new(4, vec![1, 2], 1000).unwrap();
        let g = Mat::<QQ>::from_i64(&[&[1, 2, 0, 1], &[0, 1, 1, 0], &[3, 0, 1, 0], &[0, 0, 2, 1]]);
        let h = Mat::<QQ>::from_i64(&[&[1, 0, 0, 1], &[1, 1, 0, 0], &[0, 0, 1, 1], &[0, 2, 0, 1]]);
        let ctx = QQ;
        let gh = g.mul(&ctx, &h);
        let mut v = vec![BigRational::zero(); model.dim];
        v[model.encode(&[2, 3])] = rat(1);
        v[model.encode(&[1, 0])] = rat(-2);
        let lhs = model.apply_group(&gh, &v).unwrap();
        let rhs = model.apply_group(&g, &model.apply_group(&h, &v).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn group_and_derivation_agree_on_torus() {
        // diag(2,1) on Lambda^1 x Lambda^1 scales by 2^(weight at slot 0).
        let model = TensorModel::new(2, vec![1, 1], 1000).unwrap();
        let g = Mat::<QQ>::from_i64(&[&[2, 0], &[0, 1]]);
        let mut v = vec![BigRational::zero(); model.dim];
        let a = model.encode(&[0, 0]);
        v[a] = rat(1);
        let out = model.apply_group(&g, &v).unwrap();
        let w = model.weight_of(a);
        assert_eq!(out[a].to_integer().to_i64().unwrap(), 1 << w[0]);
    }

    #[test]
    fn primitive_normalization_clears_content_and_sign() {
        let v = vec![rat(-4) / rat(6), rat(2) / rat(3), rat(0)];
        let out = primitive_integer(&v);
        assert_eq!(out, vec![BigInt::from(1), BigInt::from(-1), BigInt::from(0)]);
    }
}
