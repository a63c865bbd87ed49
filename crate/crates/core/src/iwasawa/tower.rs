//! Finite towers of ray class groups: level-indexed finite abelian
//! groups with projections, cyclotomic character data, and an optional
//! norm map to the rational tower.
//!
//! Over the rationals the tower is built internally as the unit groups
//! (Z/p^beta)^x with the identity cyclotomic character. Other base
//! fields are ingested from files as labeled covers; only the data the
//! operations consume is required, and what is checkable from that
//! data (surjectivity, fiber sizes, character compatibility) is
//! checked at construction.

use super::IwasawaError;
use crate::exactnum::padic::is_prime;
use crate::exactnum::UnitGroup;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// One level of the tower: element labels, the projection to the
/// previous level, the cyclotomic character as a unit residue mod
/// p^beta per element, and optionally the norm to the rational tower
/// as a unit residue mod p^beta per element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TowerLevel {
    pub beta: u32,
    pub labels: Vec<u64>,
    pub proj_prev: Vec<usize>,
    pub eps: Vec<u64>,
    pub norm: Option<Vec<u64>>,
}

/// Serialized tower shape for externally supplied class groups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TowerFile {
    pub p: u64,
    pub levels: Vec<TowerLevel>,
}

#[derive(Debug, Clone)]
pub struct ClassGroupTower {
    p: u64,
    levels: Vec<TowerLevel>,
    rational: bool,
}

fn prime_power(p: u64, e: u32) -> u64 {
    let mut m = 1u64;
    for _ in 0..e {
        m = m.checked_mul(p).expect("level modulus overflows u64");
    }
    m
}

impl ClassGroupTower {
    /// The rational tower: level beta is (Z/p^beta)^x with labels the
    /// unit residues, epsilon the identity, and the identity norm.
    pub fn rational(p: u64, beta_max: u32) -> Result<Self, IwasawaError> {
        if !is_prime(p) {
            return Err(IwasawaError::NotPrime { p });
        }
        if beta_max == 0 {
            return Err(IwasawaError::MissingLevels { expected: 1, found: 0 });
        }
        let mut levels: Vec<TowerLevel> = Vec::new();
        for beta in 1..=beta_max {
            let modulus = prime_power(p, beta);
            let group = UnitGroup::new(modulus);
            let mut labels = group.units();
            labels.sort_unstable();
            let proj_prev = if beta == 1 {
                Vec::new()
            } else {
                let prev = &levels[beta as usize - 2];
                let index: HashMap<u64, usize> =
                    prev.labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
                let down = modulus / p;
                labels.iter().map(|&l| index[&(l % down)]).collect()
            };
            levels.push(TowerLevel {
                beta,
                eps: labels.clone(),
                norm: Some(labels.clone()),
                labels,
                proj_prev,
            });
        }
        Ok(ClassGroupTower { p, levels, rational: true })
    }

    /// Ingests an externally presented tower, validating everything
    /// the presentation makes checkable.
    pub fn from_levels(p: u64, levels: Vec<TowerLevel>) -> Result<Self, IwasawaError> {
        if !is_prime(p) {
            return Err(IwasawaError::NotPrime { p });
        }
        if levels.is_empty() {
            return Err(IwasawaError::MissingLevels { expected: 1, found: 0 });
        }
        let norm_present = levels[0].norm.is_some();
        for (i, level) in levels.iter().enumerate() {
            let beta = level.beta;
            if beta as usize != i + 1 {
                return Err(IwasawaError::LevelShape {
                    beta,
                    detail: format!("levels must be consecutive from 1; slot {} holds beta {beta}", i + 1),
                });
            }
            let n = level.labels.len();
            let modulus = prime_power(p, beta);
            let shape = |detail: String| IwasawaError::LevelShape { beta, detail };
            if n == 0 {
                return Err(shape("empty level".into()));
            }
            let mut seen = level.labels.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != n {
                return Err(shape("duplicate element labels".into()));
            }
            if level.eps.len() != n {
                return Err(shape("epsilon data length mismatch".into()));
            }
            if level.eps.iter().any(|&e| e % p == 0 || e >= modulus) {
                return Err(shape("epsilon values must be units below the level modulus".into()));
            }
            if level.norm.is_some() != norm_present {
                return Err(shape("norm data must be present at every level or none".into()));
            }
            if let Some(norm) = &level.norm {
                if norm.len() != n {
                    return Err(shape("norm data length mismatch".into()));
                }
                if norm.iter().any(|&v| v % p == 0 || v >= modulus) {
                    return Err(shape("norm values must be units below the level modulus".into()));
                }
            }
            if i == 0 {
                if !level.proj_prev.is_empty() {
                    return Err(shape("first level carries no projection".into()));
                }
                continue;
            }
            let prev = &levels[i - 1];
            if level.proj_prev.len() != n {
                return Err(shape("projection length mismatch".into()));
            }
            if level.proj_prev.iter().any(|&t| t >= prev.labels.len()) {
                return Err(shape("projection target out of range".into()));
            }
            // Surjective with equal fibers: a transitive cover of finite
            // abelian groups has constant fiber size.
            let mut fiber_sizes = vec![0usize; prev.labels.len()];
            for &t in &level.proj_prev {
                fiber_sizes[t] += 1;
            }
            if fiber_sizes.iter().any(|&s| s == 0) {
                return Err(shape("projection is not surjective".into()));
            }
            if fiber_sizes.iter().any(|&s| s != fiber_sizes[0]) {
                return Err(shape("projection fibers have unequal sizes".into()));
            }
            let down = modulus / p;
            for (x, &t) in level.proj_prev.iter().enumerate() {
                if level.eps[x] % down != prev.eps[t] % down {
                    return Err(shape(format!(
                        "epsilon incompatible with projection at element {x}"
                    )));
                }
                if let (Some(norm), Some(prev_norm)) = (&level.norm, &prev.norm) {
                    if norm[x] % down != prev_norm[t] % down {
                        return Err(shape(format!(
                            "norm incompatible with projection at element {x}"
                        )));
                    }
                }
            }
        }
        Ok(ClassGroupTower { p, levels, rational: false })
    }

    pub fn from_file(file: &TowerFile) -> Result<Self, IwasawaError> {
        Self::from_levels(file.p, file.levels.clone())
    }

    pub fn to_file(&self) -> TowerFile {
        TowerFile { p: self.p, levels: self.levels.clone() }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn beta_max(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn is_rational(&self) -> bool {
        self.rational
    }

    pub fn has_norm(&self) -> bool {
        self.levels[0].norm.is_some()
    }

    pub fn levels(&self) -> &[TowerLevel] {
        &self.levels
    }

    pub fn level(&self, beta: u32) -> Result<&TowerLevel, IwasawaError> {
        self.levels.get(beta as usize - 1).ok_or(IwasawaError::MissingLevels {
            expected: beta as usize,
            found: self.levels.len(),
        })
    }

    /// Indices at level `beta` lying above each index at level
    /// `beta - 1`.
    pub fn fibers(&self, beta: u32) -> Result<Vec<Vec<usize>>, IwasawaError> {
        let upper = self.level(beta)?;
        let lower = self.level(beta - 1)?;
        let mut out = vec![Vec::new(); lower.labels.len()];
        for (x, &t) in upper.proj_prev.iter().enumerate() {
            out[t].push(x);
        }
        Ok(out)
    }

    pub fn index_of(&self, beta: u32, label: u64) -> Result<usize, IwasawaError> {
        let level = self.level(beta)?;
        level
            .labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| IwasawaError::LevelShape {
                beta,
                detail: format!("label {label} is not an element of the level"),
            })
    }

    /// Structural agreement: same prime and identical level data.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.p == other.p
            && self.levels.len() == other.levels.len()
            && self
                .levels
                .iter()
                .zip(&other.levels)
                .all(|(a, b)| a.labels == b.labels && a.proj_prev == b.proj_prev && a.eps == b.eps)
    }
}

/// A synthetic non-rational tower for exercising the general code
/// paths: (Z/p^beta)^x times a cyclic factor of order `extra`, with
/// the norm forgetting the extra factor. Used by tests and examples.
pub fn product_tower(p: u64, beta_max: u32, extra: u64) -> Result<ClassGroupTower, IwasawaError> {
    let rational = ClassGroupTower::rational(p, beta_max)?;
    let mut levels = Vec::new();
    for level in rational.levels() {
        let mut labels = Vec::new();
        let mut proj = Vec::new();
        let mut eps = Vec::new();
        let mut norm = Vec::new();
        for (i, &l) in level.labels.iter().enumerate() {
            for t in 0..extra {
                // Label encodes (unit, torsion) as unit * extra + t.
                labels.push(l * extra + t);
                if level.beta > 1 {
                    proj.push(level.proj_prev[i] * extra as usize + t as usize);
                }
                eps.push(level.eps[i]);
                norm.push(l);
            }
        }
        levels.push(TowerLevel {
            beta: level.beta,
            labels,
            proj_prev: proj,
            eps,
            norm: Some(norm),
        });
    }
    ClassGroupTower::from_levels(p, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_tower_shape() {
        let t = ClassGroupTower::rational(5, 3).unwrap();
        assert_eq!(t.beta_max(), 3);
        assert_eq!(t.level(1).unwrap().labels, vec![1, 2, 3, 4]);
        assert_eq!(t.level(2).unwrap().labels.len(), 20);
        assert_eq!(t.level(3).unwrap().labels.len(), 100);
        let fibers = t.fibers(2).unwrap();
        assert!(fibers.iter().all(|f| f.len() == 5));
        // 7 = 2 mod 5: the fiber over 2 contains the index of 7.
        let idx7 = t.index_of(2, 7).unwrap();
        assert!(fibers[t.index_of(1, 2).unwrap()].contains(&idx7));
        assert!(ClassGroupTower::rational(6, 2).is_err());
    }

    #[test]
    fn product_tower_validates_and_has_norm() {
        let t = product_tower(3, 2, 2).unwrap();
        assert!(!t.is_rational());
        assert!(t.has_norm());
        assert_eq!(t.level(1).unwrap().labels.len(), 4);
        assert_eq!(t.level(2).unwrap().labels.len(), 12);
        let fibers = t.fibers(2).unwrap();
        assert!(fibers.iter().all(|f| f.len() == 3));
    }

    #[test]
    fn malformed_levels_are_rejected() {
        let good = ClassGroupTower::rational(3, 2).unwrap().to_file();
        let mut bad = good.clone();
        bad.levels[1].eps[0] = 3; // divisible by p
        assert!(matches!(
            ClassGroupTower::from_levels(3, bad.levels),
            Err(IwasawaError::LevelShape { beta: 2, .. })
        ));
        let mut bad = good.clone();
        bad.levels[1].proj_prev[0] = bad.levels[1].proj_prev[1]; // kills surjectivity or fiber balance
        assert!(ClassGroupTower::from_levels(3, bad.levels).is_err());
        let mut bad = good.clone();
        bad.levels[1].eps[0] = bad.levels[1].eps[0] % 3 + 3 + 1; // breaks compatibility with level 1
        assert!(ClassGroupTower::from_levels(3, bad.levels).is_err());
        let mut bad = good;
        bad.levels[1].beta = 3;
        assert!(ClassGroupTower::from_levels(3, bad.levels).is_err());
    }

    #[test]
    fn file_round_trip() {
        let t = product_tower(5, 2, 3).unwrap();
        let file = t.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let back: TowerFile = serde_json::from_str(&json).unwrap();
        let t2 = ClassGroupTower::from_file(&back).unwrap();
        assert!(t.same_shape(&t2));
    }
}
