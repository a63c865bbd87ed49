//! Functionals attached to critical indices.
//!
//! For a critical index j the space of functionals annihilated by the derived
//! Levi algebra and transforming under the diagonal torus by the character
//! (j, ..., j, w-j, ..., w-j) is one dimensional.  The generator is normalized
//! to take the value 1 on xi applied to the lowest weight vector.  Such a
//! functional vanishes off a single weight space, so the solve happens inside
//! that block; the result is stored both as coordinates on the representation
//! basis and as an ambient row extended by zero along the echelon complement.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::rep::HighestWeightLattice;
use super::xi::XiMatrix;
use super::HighestWeightError;
use crate::linalg::Mat;
use crate::ring::QQ;

/// Normalized functional for one critical index.
pub struct KappaFunctional {
    pub j: i64,
    /// Coordinates on the representation basis.
    v_row: Vec<BigRational>,
    /// Ambient extension, zero along the echelon complement of each block.
    ambient_row: Vec<BigRational>,
    /// Precomposition with the xi action, as an ambient row.
    xi_row: Vec<BigRational>,
}

impl KappaFunctional {
    /// Value on a vector given in representation coordinates.
    pub fn eval_coords(&self, coords: &[BigRational]) -> BigRational {
        dot(&self.v_row, coords)
    }

    /// Value on an ambient vector lying in the representation subspace.
    pub fn eval_ambient(&self, ambient: &[BigRational]) -> BigRational {
        dot(&self.ambient_row, ambient)
    }

    /// Value on xi applied to an ambient vector of the representation.
    pub fn eval_after_xi(&self, ambient: &[BigRational]) -> BigRational {
        dot(&self.xi_row, ambient)
    }
}

fn dot(row: &[BigRational], v: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (a, b) in row.iter().zip(v) {
        if !a.is_zero() && !b.is_zero() {
            acc += a * b;
        }
    }
    acc
}

/// Outcome of the solve: the dimension found and, when it is one, the
/// normalized functional.
pub struct KappaSolve {
    pub space_dim: usize,
    pub functional: Option<KappaFunctional>,
}

/// Solves for the functional at index j.  Outside the critical range the
/// solution space is empty and the dimension 0 is reported.
pub fn kappa_j(rep: &HighestWeightLattice, j: i64) -> Result<KappaSolve, HighestWeightError> {
    let two_n = rep.two_n();
    let n = rep.half_rank();
    let w = rep.purity_weight();
    let m = rep.det_power();

    // Target weight of the transformation character, in untwisted terms.
    let mut key = vec![0i64; two_n];
    for i in 0..n {
        key[i] = j - m;
        key[n + i] = w - j - m;
    }
    let Some(block) = rep.blocks.get(&key) else {
        return Ok(KappaSolve { space_dim: 0, functional: None });
    };
    let unknowns = block.members.len();

    // Constraints: kappa(X v) = 0 for off diagonal X in the derived Levi and
    // for every basis vector v whose weight is moved onto the target block.
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut gens: Vec<(usize, usize)> = Vec::new();
    for block_base in [0, n] {
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    gens.push((block_base + r, block_base + c));
                }
            }
        }
    }
    for &(r, c) in &gens {
        // X = E_rc raises the source weight by epsilon_r - epsilon_c.
        let mut source = key.clone();
        source[r] -= 1;
        source[c] += 1;
        let Some(src_block) = rep.blocks.get(&source) else {
            continue;
        };
        for &b in &src_block.members {
            let img = rep.act_eij(r, c, &rep.basis[b].ambient);
            let sup = block.to_support(&img);
            let coeffs = block
                .express(&sup)
                .expect("generator image stays in the representation");
            let mut row = vec![BigRational::zero(); unknowns];
            for (idx, c) in coeffs {
                let slot = block.members.iter().position(|&mm| mm == idx).unwrap();
                row[slot] = c;
            }
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }

    let space_dim;
    let u = if rows.is_empty() {
        space_dim = unknowns;
        if unknowns != 1 {
            return Ok(KappaSolve { space_dim, functional: None });
        }
        vec![BigRational::from_integer(BigInt::from(1))]
    } else {
        let mat = Mat::<QQ>::from_rows(rows);
        let null = mat.nullspace(&QQ);
        space_dim = null.len();
        if space_dim != 1 {
            return Ok(KappaSolve { space_dim, functional: None });
        }
        null.into_iter().next().unwrap()
    };

    // Ambient extension: project each supported unit vector onto the block
    // span and pair with the solution.
    let mut ambient_row = vec![BigRational::zero(); rep.ambient_dim()];
    for (slot, &a) in block.support.iter().enumerate() {
        let mut unit = vec![BigRational::zero(); block.support.len()];
        unit[slot] = BigRational::from_integer(BigInt::from(1));
        let mut val = BigRational::zero();
        for (idx, c) in block.project(&unit) {
            let pos = block.members.iter().position(|&mm| mm == idx).unwrap();
            val += &u[pos] * &c;
        }
        ambient_row[a] = val;
    }

    // Precompose with xi; the transpose trick turns the row composition into
    // one vector action.
    let xi = XiMatrix::new(n);
    let xi_t = xi.mat().transpose(&QQ);
    let xi_row = rep.act_group(&xi_t, &ambient_row)?;

    // Normalize against xi applied to the lowest weight vector.
    let norm = dot(&xi_row, rep.v0_ambient());
    if norm.is_zero() {
        return Err(HighestWeightError::KappaDegenerate { j });
    }
    let ambient_row: Vec<BigRational> = ambient_row.iter().map(|x| x / &norm).collect();
    let xi_row: Vec<BigRational> = xi_row.iter().map(|x| x / &norm).collect();
    let mut v_row = vec![BigRational::zero(); rep.dim()];
    for (pos, &member) in block.members.iter().enumerate() {
        v_row[member] = &u[pos] / &norm;
    }

    // The functional is integral on the admissible lattice.
    let pb = BigInt::from(rep.p());
    for r in 0..rep.lattice_rank() {
        let row: Vec<BigRational> = rep
            .lattice_row(r)
            .iter()
            .cloned()
            .map(BigRational::from_integer)
            .collect();
        let val = dot(&ambient_row, &row);
        if (val.denom() % &pb).is_zero() {
            return Err(HighestWeightError::KappaNotIntegral { j });
        }
    }

    Ok(KappaSolve {
        space_dim: 1,
        functional: Some(KappaFunctional { j, v_row, ambient_row, xi_row }),
    })
}
