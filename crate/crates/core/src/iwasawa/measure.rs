//! Measures on class group towers: level-indexed coefficient systems
//! satisfying the norm-compatibility relation alpha * E_beta([x]) =
//! sum over the fiber of E_{beta+1}, stored in normalized form
//! mu_beta = alpha_unit^{-beta} * E_beta so every entry is a truncated
//! p-adic integer. Finite-slope systems keep the denominator exponent
//! slope * beta as explicit bookkeeping instead of dividing by p.
//!
//! Cyclotomic twists multiply level beta by the canonical lift of
//! eps([x]), which is only well defined mod p^beta; comparisons that
//! cross levels of a twisted tower are therefore capped at
//! min(beta, working precision), and towers remember whether they
//! have been twisted.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::tower::ClassGroupTower;
use super::IwasawaError;
use crate::exactnum::{
    embed_cyclotomic, embedding_convention, FiniteCharacter, PadicCyclotomic, PadicTrunc,
};

/// Coefficients of a measure at one tower level, indexed like the
/// level's labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLevelMeasure {
    pub beta: u32,
    pub coeffs: Vec<PadicTrunc>,
}

/// Ordinary systems have a unit eigenvalue; finite-slope systems carry
/// the denominator exponent slope * beta per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizationMode {
    Ordinary,
    FiniteSlope { slope: u32 },
}

/// First failing instance of the norm-compatibility relation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionWitness {
    /// Lower level of the failing pair (beta, beta + 1).
    pub beta: u32,
    pub index: usize,
    pub label: u64,
    pub lhs: u64,
    pub rhs: u64,
    pub prec: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionReport {
    pub ok: bool,
    pub witness: Option<DistributionWitness>,
}

/// First coefficient where the twisted tower disagrees with the target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManinWitness {
    pub beta: u32,
    pub index: usize,
    pub label: u64,
    pub twist: i64,
    pub lhs: u64,
    pub rhs: u64,
    pub prec: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManinReport {
    pub ok: bool,
    pub witness: Option<ManinWitness>,
}

/// Value of an integral against a finite-order character, with the
/// embedding convention and denominator bookkeeping it depends on.
#[derive(Debug, Clone)]
pub struct CharacterIntegral {
    pub value: PadicCyclotomic,
    pub level: u32,
    pub denominator_exponent: u32,
    pub convention: String,
}

/// Serialized measure: normalized coefficients per level over the
/// rational tower.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureLevelFile {
    pub beta: u32,
    pub group: Vec<u64>,
    pub coeffs: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureFile {
    pub p: u64,
    #[serde(rename = "N")]
    pub prec: u32,
    pub levels: Vec<MeasureLevelFile>,
    pub mode: String,
    pub alpha_valuations: Vec<u32>,
    #[serde(default)]
    pub exponent: Option<i64>,
}

fn prime_power(p: u64, e: u32) -> u64 {
    let mut m = 1u64;
    for _ in 0..e {
        m = m.checked_mul(p).expect("modulus overflows u64");
    }
    m
}

/// Exact exponent c with m = p^c, if any.
pub(super) fn p_power_exponent(m: u64, p: u64) -> Option<u32> {
    let mut c = 0u32;
    let mut v = m;
    while v > 1 {
        if v % p != 0 {
            return None;
        }
        v /= p;
        c += 1;
    }
    Some(c)
}

fn trunc_sum(p: u64, prec: u32, items: impl Iterator<Item = PadicTrunc>) -> PadicTrunc {
    items.fold(PadicTrunc::from_u64(p, prec, 0), |acc, x| acc.add(&x))
}

/// Equality mod p^min(cap, both precisions).
fn eq_mod(a: &PadicTrunc, b: &PadicTrunc, cap: u32) -> bool {
    let prec = cap.min(a.prec).min(b.prec);
    let m = prime_power(a.p, prec);
    a.value % m == b.value % m
}

fn pow_signed(x: &PadicTrunc, k: i64) -> Result<PadicTrunc, IwasawaError> {
    if k >= 0 {
        Ok(x.pow(k as u64))
    } else {
        Ok(x.inv()?.pow(k.unsigned_abs()))
    }
}

fn validate_raw(
    tower: &ClassGroupTower,
    raw: &[Vec<PadicTrunc>],
) -> Result<(u64, u32), IwasawaError> {
    if raw.len() != tower.beta_max() as usize {
        return Err(IwasawaError::MissingLevels {
            expected: tower.beta_max() as usize,
            found: raw.len(),
        });
    }
    let p = tower.p();
    let mut prec: Option<u32> = None;
    for (i, level) in raw.iter().enumerate() {
        let beta = i as u32 + 1;
        if level.len() != tower.level(beta)?.labels.len() {
            return Err(IwasawaError::LevelShape {
                beta,
                detail: format!(
                    "coefficient count {} does not match group order {}",
                    level.len(),
                    tower.level(beta)?.labels.len()
                ),
            });
        }
        for c in level {
            if c.p != p {
                return Err(IwasawaError::MixedPrime { left: p, right: c.p });
            }
            match prec {
                None => prec = Some(c.prec),
                Some(n) if n != c.prec => {
                    return Err(IwasawaError::PrecisionMismatch { left: n, right: c.prec })
                }
                _ => {}
            }
        }
    }
    Ok((p, prec.expect("tower levels are nonempty")))
}

/// Checks alpha * E_beta([x]) = sum of E_{beta+1} over the fiber of
/// [x], for every consecutive pair of levels of a raw system.
pub fn check_distribution_relation(
    tower: &ClassGroupTower,
    raw: &[Vec<PadicTrunc>],
    alpha: &PadicTrunc,
) -> Result<DistributionReport, IwasawaError> {
    let (p, _) = validate_raw(tower, raw)?;
    if alpha.p != p {
        return Err(IwasawaError::MixedPrime { left: p, right: alpha.p });
    }
    for beta in 1..tower.beta_max() {
        let fibers = tower.fibers(beta + 1)?;
        let lower = &raw[beta as usize - 1];
        let upper = &raw[beta as usize];
        for (i, fiber) in fibers.iter().enumerate() {
            let lhs = alpha.mul(&lower[i]);
            let rhs = trunc_sum(p, lhs.prec, fiber.iter().map(|&x| upper[x].clone()));
            if !eq_mod(&lhs, &rhs, u32::MAX) {
                return Ok(DistributionReport {
                    ok: false,
                    witness: Some(DistributionWitness {
                        beta,
                        index: i,
                        label: tower.level(beta)?.labels[i],
                        lhs: lhs.value,
                        rhs: rhs.value,
                        prec: lhs.prec.min(rhs.prec),
                    }),
                });
            }
        }
    }
    Ok(DistributionReport { ok: true, witness: None })
}

#[derive(Debug, Clone)]
pub struct MeasureTower {
    tower: Arc<ClassGroupTower>,
    prec: u32,
    alpha_unit: Option<PadicTrunc>,
    alpha_val: u32,
    exponent: Option<i64>,
    capped: bool,
    levels: Vec<FiniteLevelMeasure>,
}

impl MeasureTower {
    /// Normalizes a raw system E with eigenvalue alpha_unit * p^alpha_val,
    /// verifying the distribution relation first.
    pub fn from_raw(
        tower: Arc<ClassGroupTower>,
        raw: Vec<Vec<PadicTrunc>>,
        alpha_unit: &PadicTrunc,
        alpha_val: u32,
        exponent: Option<i64>,
    ) -> Result<Self, IwasawaError> {
        let (p, prec) = validate_raw(&tower, &raw)?;
        if alpha_unit.p != p {
            return Err(IwasawaError::MixedPrime { left: p, right: alpha_unit.p });
        }
        if alpha_unit.prec != prec {
            return Err(IwasawaError::PrecisionMismatch { left: prec, right: alpha_unit.prec });
        }
        if !alpha_unit.is_unit() {
            return Err(IwasawaError::Unsupported(
                "eigenvalue unit part is divisible by p; move the valuation into the slope".into(),
            ));
        }
        if alpha_val >= prec {
            return Err(IwasawaError::SlopeExceedsPrecision { slope: alpha_val, prec });
        }
        let alpha = alpha_unit.mul(&PadicTrunc::from_u64(p, prec, prime_power(p, alpha_val)));
        let report = check_distribution_relation(&tower, &raw, &alpha)?;
        if let Some(w) = report.witness {
            return Err(IwasawaError::DistributionFailure { beta: w.beta, index: w.index });
        }
        let inv_unit = alpha_unit.inv()?;
        let levels = raw
            .into_iter()
            .enumerate()
            .map(|(i, coeffs)| {
                let scale = inv_unit.pow(i as u64 + 1);
                FiniteLevelMeasure {
                    beta: i as u32 + 1,
                    coeffs: coeffs.iter().map(|c| c.mul(&scale)).collect(),
                }
            })
            .collect();
        Ok(MeasureTower {
            tower,
            prec,
            alpha_unit: Some(alpha_unit.clone()),
            alpha_val,
            exponent,
            capped: false,
            levels,
        })
    }

    /// Point mass at the compatible chain below the given top-level
    /// index; an ordinary measure with eigenvalue 1.
    pub fn dirac(
        tower: Arc<ClassGroupTower>,
        prec: u32,
        top_index: usize,
    ) -> Result<Self, IwasawaError> {
        let p = tower.p();
        let beta_max = tower.beta_max();
        let top = tower.level(beta_max)?;
        if top_index >= top.labels.len() {
            return Err(IwasawaError::LevelShape {
                beta: beta_max,
                detail: format!("index {top_index} out of range"),
            });
        }
        let mut chain = vec![0usize; beta_max as usize];
        let mut idx = top_index;
        for beta in (1..=beta_max).rev() {
            chain[beta as usize - 1] = idx;
            if beta > 1 {
                idx = tower.level(beta)?.proj_prev[idx];
            }
        }
        let levels = chain
            .iter()
            .enumerate()
            .map(|(i, &at)| {
                let n = tower.levels()[i].labels.len();
                let mut coeffs = vec![PadicTrunc::from_u64(p, prec, 0); n];
                coeffs[at] = PadicTrunc::from_u64(p, prec, 1);
                FiniteLevelMeasure { beta: i as u32 + 1, coeffs }
            })
            .collect();
        Ok(MeasureTower {
            tower,
            prec,
            alpha_unit: Some(PadicTrunc::from_u64(p, prec, 1)),
            alpha_val: 0,
            exponent: None,
            capped: false,
            levels,
        })
    }

    pub fn from_file(file: &MeasureFile) -> Result<Self, IwasawaError> {
        let tower = Arc::new(ClassGroupTower::rational(file.p, file.levels.len() as u32)?);
        if file.prec == 0 {
            return Err(IwasawaError::BadFile("working precision must be positive".into()));
        }
        let alpha_val = match (file.mode.as_str(), file.alpha_valuations.as_slice()) {
            ("ordinary", vals) if vals.iter().all(|&v| v == 0) => 0,
            ("ordinary", _) => {
                return Err(IwasawaError::BadFile(
                    "ordinary mode requires zero slope at every place".into(),
                ))
            }
            ("finite-slope", [v]) if *v > 0 => *v,
            ("finite-slope", _) => {
                return Err(IwasawaError::BadFile(
                    "finite-slope mode requires one positive valuation".into(),
                ))
            }
            (other, _) => {
                return Err(IwasawaError::BadFile(format!("unknown mode {other:?}")))
            }
        };
        if alpha_val >= file.prec {
            return Err(IwasawaError::SlopeExceedsPrecision { slope: alpha_val, prec: file.prec });
        }
        let mut levels = Vec::new();
        for (i, lvl) in file.levels.iter().enumerate() {
            let beta = i as u32 + 1;
            if lvl.beta != beta {
                return Err(IwasawaError::BadFile(format!(
                    "level slot {} holds beta {}",
                    beta, lvl.beta
                )));
            }
            if lvl.group != tower.level(beta)?.labels {
                return Err(IwasawaError::BadFile(format!(
                    "level {beta} group labels must be the unit residues mod p^{beta} in \
                     ascending order"
                )));
            }
            if lvl.coeffs.len() != lvl.group.len() {
                return Err(IwasawaError::BadFile(format!(
                    "level {beta} has {} coefficients for {} elements",
                    lvl.coeffs.len(),
                    lvl.group.len()
                )));
            }
            levels.push(FiniteLevelMeasure {
                beta,
                coeffs: lvl
                    .coeffs
                    .iter()
                    .map(|&v| PadicTrunc::from_u64(file.p, file.prec, v))
                    .collect(),
            });
        }
        let out = MeasureTower {
            tower,
            prec: file.prec,
            alpha_unit: None,
            alpha_val,
            exponent: file.exponent,
            capped: false,
            levels,
        };
        let report = out.verify_compatibility()?;
        if let Some(w) = report.witness {
            return Err(IwasawaError::DistributionFailure { beta: w.beta, index: w.index });
        }
        Ok(out)
    }

    pub fn to_file(&self) -> Result<MeasureFile, IwasawaError> {
        if !self.tower.is_rational() {
            return Err(IwasawaError::NotRational);
        }
        Ok(MeasureFile {
            p: self.p(),
            prec: self.prec,
            levels: self
                .levels
                .iter()
                .map(|lvl| MeasureLevelFile {
                    beta: lvl.beta,
                    group: self.tower.levels()[lvl.beta as usize - 1].labels.clone(),
                    coeffs: lvl.coeffs.iter().map(|c| c.value).collect(),
                })
                .collect(),
            mode: match self.mode() {
                NormalizationMode::Ordinary => "ordinary".into(),
                NormalizationMode::FiniteSlope { .. } => "finite-slope".into(),
            },
            alpha_valuations: if self.alpha_val == 0 { vec![0] } else { vec![self.alpha_val] },
            exponent: self.exponent,
        })
    }

    pub fn p(&self) -> u64 {
        self.tower.p()
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn beta_max(&self) -> u32 {
        self.tower.beta_max()
    }

    pub fn tower(&self) -> &Arc<ClassGroupTower> {
        &self.tower
    }

    pub fn mode(&self) -> NormalizationMode {
        if self.alpha_val == 0 {
            NormalizationMode::Ordinary
        } else {
            NormalizationMode::FiniteSlope { slope: self.alpha_val }
        }
    }

    pub fn alpha_val(&self) -> u32 {
        self.alpha_val
    }

    pub fn alpha_unit(&self) -> Option<&PadicTrunc> {
        self.alpha_unit.as_ref()
    }

    pub fn exponent(&self) -> Option<i64> {
        self.exponent
    }

    pub fn with_exponent(mut self, exponent: Option<i64>) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn is_capped(&self) -> bool {
        self.capped
    }

    /// Denominator exponent of the underlying unnormalized measure at
    /// the given level: slope * beta, zero when ordinary.
    pub fn denominator_exponent(&self, beta: u32) -> u32 {
        self.alpha_val * beta
    }

    pub fn levels(&self) -> &[FiniteLevelMeasure] {
        &self.levels
    }

    pub fn level(&self, beta: u32) -> Result<&FiniteLevelMeasure, IwasawaError> {
        self.levels.get(beta as usize - 1).ok_or(IwasawaError::MissingLevels {
            expected: beta as usize,
            found: self.levels.len(),
        })
    }

    /// Norm compatibility of the normalized coefficients:
    /// p^slope * mu_beta = fiber sums of mu_{beta+1}. Twisted towers
    /// are compared mod p^min(beta, prec), the honest content of the
    /// canonical lift.
    pub fn verify_compatibility(&self) -> Result<DistributionReport, IwasawaError> {
        let p = self.p();
        let scale = PadicTrunc::from_u64(p, self.prec, prime_power(p, self.alpha_val));
        for beta in 1..self.beta_max() {
            let fibers = self.tower.fibers(beta + 1)?;
            let lower = &self.levels[beta as usize - 1].coeffs;
            let upper = &self.levels[beta as usize].coeffs;
            let cap = if self.capped { beta } else { u32::MAX };
            for (i, fiber) in fibers.iter().enumerate() {
                let lhs = scale.mul(&lower[i]);
                let rhs = trunc_sum(p, lhs.prec, fiber.iter().map(|&x| upper[x].clone()));
                if !eq_mod(&lhs, &rhs, cap) {
                    return Ok(DistributionReport {
                        ok: false,
                        witness: Some(DistributionWitness {
                            beta,
                            index: i,
                            label: self.tower.level(beta)?.labels[i],
                            lhs: lhs.value,
                            rhs: rhs.value,
                            prec: cap.min(lhs.prec).min(rhs.prec),
                        }),
                    });
                }
            }
        }
        Ok(DistributionReport { ok: true, witness: None })
    }

    /// Multiplies level beta by the canonical lift of eps^k. The lift
    /// is only determined mod p^beta, so the result is marked capped.
    pub fn eps_cyc_twist(&self, k: i64) -> Result<Self, IwasawaError> {
        let p = self.p();
        let mut levels = Vec::with_capacity(self.levels.len());
        for lvl in &self.levels {
            let eps = &self.tower.level(lvl.beta)?.eps;
            let coeffs = lvl
                .coeffs
                .iter()
                .zip(eps.iter())
                .map(|(c, &e)| {
                    let lift = PadicTrunc::from_u64(p, c.prec, e);
                    Ok(c.mul(&pow_signed(&lift, k)?))
                })
                .collect::<Result<Vec<_>, IwasawaError>>()?;
            levels.push(FiniteLevelMeasure { beta: lvl.beta, coeffs });
        }
        Ok(MeasureTower {
            tower: self.tower.clone(),
            prec: self.prec,
            alpha_unit: self.alpha_unit.clone(),
            alpha_val: self.alpha_val,
            exponent: self.exponent.map(|j| j + k),
            capped: self.capped || k != 0,
            levels,
        })
    }

    /// Coefficientwise linear combination of two measures on the same
    /// tower with the same slope.
    pub fn linear_combination(
        &self,
        other: &Self,
        ca: &PadicTrunc,
        cb: &PadicTrunc,
    ) -> Result<Self, IwasawaError> {
        if !self.tower.same_shape(&other.tower) {
            return Err(IwasawaError::TowerMismatch("different towers".into()));
        }
        if self.alpha_val != other.alpha_val {
            return Err(IwasawaError::TowerMismatch("different slopes".into()));
        }
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(a, b)| FiniteLevelMeasure {
                beta: a.beta,
                coeffs: a
                    .coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(x, y)| x.mul(ca).add(&y.mul(cb)))
                    .collect(),
            })
            .collect();
        Ok(MeasureTower {
            tower: self.tower.clone(),
            prec: self.prec.min(other.prec),
            alpha_unit: match (&self.alpha_unit, &other.alpha_unit) {
                (Some(a), Some(b)) if a == b => Some(a.clone()),
                _ => None,
            },
            alpha_val: self.alpha_val,
            exponent: if self.exponent == other.exponent { self.exponent } else { None },
            capped: self.capped || other.capped,
            levels,
        })
    }

    /// Pushes the measure through the tower's norm map to the rational
    /// tower, optionally twisted by nu composed with the norm. The
    /// twist must have order dividing p - 1: values of p-power order
    /// do not embed in truncated units.
    pub fn pushforward(
        &self,
        nu: Option<&FiniteCharacter>,
    ) -> Result<MeasureTower, IwasawaError> {
        if !self.tower.has_norm() {
            return Err(IwasawaError::NormMissing);
        }
        let p = self.p();
        let beta_max = self.beta_max();
        let mut cond = 0u32;
        let mut table: Option<HashMap<u64, PadicTrunc>> = None;
        if let Some(chi) = nu {
            let m = chi.modulus();
            if m > 1 && chi.order() > 1 {
                let c = p_power_exponent(m, p)
                    .ok_or(IwasawaError::TwistModulus { modulus: m })?;
                if c > beta_max {
                    return Err(IwasawaError::ConductorOverflow { modulus: m, height: beta_max });
                }
                let d = chi.order();
                if (p - 1) % d != 0 {
                    return Err(IwasawaError::WildTwist { order: d });
                }
                if c > 1 && self.alpha_val > 0 {
                    return Err(IwasawaError::Unsupported(
                        "finite-slope pushforward with a ramified twist cannot back-fill \
                         levels below the twist conductor"
                            .into(),
                    ));
                }
                let mut t = HashMap::new();
                for u in chi.group().units() {
                    let val = chi.value(u).expect("units have character values");
                    let emb = embed_cyclotomic(&val, p, self.prec)?;
                    debug_assert_eq!(emb.wild(), 1, "tame values embed as scalars");
                    t.insert(u, emb.coords()[0].clone());
                }
                cond = c;
                table = Some(t);
            }
        }
        let out_tower = Arc::new(ClassGroupTower::rational(p, beta_max)?);
        let mut levels: Vec<Option<FiniteLevelMeasure>> = vec![None; beta_max as usize];
        for beta in (1..=beta_max).rev() {
            let out_labels = &out_tower.level(beta)?.labels;
            if beta >= cond.max(1) {
                let index: HashMap<u64, usize> =
                    out_labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
                let norm = self.tower.level(beta)?.norm.as_ref().expect("norm checked above");
                let mut coeffs = vec![PadicTrunc::from_u64(p, self.prec, 0); out_labels.len()];
                for (i, c) in self.levels[beta as usize - 1].coeffs.iter().enumerate() {
                    let y = norm[i];
                    let term = match &table {
                        Some(t) => c.mul(&t[&(y % prime_power(p, cond))]),
                        None => c.clone(),
                    };
                    let at = index[&y];
                    coeffs[at] = coeffs[at].add(&term);
                }
                levels[beta as usize - 1] = Some(FiniteLevelMeasure { beta, coeffs });
            } else {
                // Below the twist conductor the twisted sums are not
                // locally constant; define the level by the fiber sums
                // from above (ordinary mode only, guarded earlier).
                let fibers = out_tower.fibers(beta + 1)?;
                let upper = levels[beta as usize].as_ref().expect("filled top-down");
                let coeffs = fibers
                    .iter()
                    .map(|f| {
                        trunc_sum(p, self.prec, f.iter().map(|&x| upper.coeffs[x].clone()))
                    })
                    .collect();
                levels[beta as usize - 1] = Some(FiniteLevelMeasure { beta, coeffs });
            }
        }
        let out = MeasureTower {
            tower: out_tower,
            prec: self.prec,
            alpha_unit: self.alpha_unit.clone(),
            alpha_val: self.alpha_val,
            exponent: self.exponent,
            capped: self.capped,
            levels: levels.into_iter().map(|l| l.expect("all levels filled")).collect(),
        };
        let report = out.verify_compatibility()?;
        if let Some(w) = report.witness {
            return Err(IwasawaError::DistributionFailure { beta: w.beta, index: w.index });
        }
        Ok(out)
    }

    fn character_level(&self, chi: &FiniteCharacter) -> Result<u32, IwasawaError> {
        if !self.tower.is_rational() {
            return Err(IwasawaError::NotRational);
        }
        let m = chi.modulus();
        let c = p_power_exponent(m, self.p()).ok_or(IwasawaError::TwistModulus { modulus: m })?;
        if c == 0 || c > self.beta_max() {
            return Err(IwasawaError::ConductorOverflow { modulus: m, height: self.beta_max() });
        }
        Ok(c)
    }

    /// Integral of chi against the measure: the finite sum of
    /// chi([x]) * mu_c([x]) at the level c of chi's modulus, valued in
    /// the truncated cyclotomic extension under the recorded embedding
    /// convention.
    pub fn integrate_character(
        &self,
        chi: &FiniteCharacter,
    ) -> Result<CharacterIntegral, IwasawaError> {
        self.integrate_moment(0, chi)
    }

    /// Integral of eps^k * chi using the canonical lift of eps at the
    /// level of chi's modulus. Agrees exactly with twisting by eps^k
    /// and then integrating chi.
    pub fn integrate_moment(
        &self,
        k: i64,
        chi: &FiniteCharacter,
    ) -> Result<CharacterIntegral, IwasawaError> {
        let c = self.character_level(chi)?;
        let p = self.p();
        let level = self.level(c)?;
        let eps = &self.tower.level(c)?.eps;
        let labels = &self.tower.level(c)?.labels;
        let mut acc = PadicCyclotomic::zero(p, self.prec, 1);
        for (i, coeff) in level.coeffs.iter().enumerate() {
            let chi_val = match chi.value(labels[i]) {
                Some(v) => v,
                None => continue,
            };
            let mut term = embed_cyclotomic(&chi_val, p, self.prec)?.scale(coeff);
            if k != 0 {
                let lift = PadicTrunc::from_u64(p, coeff.prec, eps[i]);
                term = term.scale(&pow_signed(&lift, k)?);
            }
            acc = acc.add(&term);
        }
        Ok(CharacterIntegral {
            value: acc,
            level: c,
            denominator_exponent: self.denominator_exponent(c),
            convention: embedding_convention(p),
        })
    }

    /// Structural and coefficientwise equality at full stored precision.
    pub fn equals(&self, other: &Self) -> bool {
        self.tower.same_shape(&other.tower)
            && self.alpha_val == other.alpha_val
            && self.levels == other.levels
    }
}

/// Checks eps_cyc_twist(m_a, j_b - j_a) = m_b mod p^min(beta, prec)
/// levelwise, the compatibility the critical-exponent family must
/// satisfy. Exponent tags are required.
pub fn manin_relation_check(
    a: &MeasureTower,
    b: &MeasureTower,
) -> Result<ManinReport, IwasawaError> {
    if !a.tower().same_shape(b.tower()) {
        return Err(IwasawaError::TowerMismatch("different towers".into()));
    }
    if a.prec() != b.prec() {
        return Err(IwasawaError::PrecisionMismatch { left: a.prec(), right: b.prec() });
    }
    let ja = a.exponent().ok_or(IwasawaError::MissingExponent)?;
    let jb = b.exponent().ok_or(IwasawaError::MissingExponent)?;
    let twist = jb - ja;
    let twisted = a.eps_cyc_twist(twist)?;
    for (ta, tb) in twisted.levels().iter().zip(b.levels()) {
        let cap = ta.beta;
        for (i, (x, y)) in ta.coeffs.iter().zip(&tb.coeffs).enumerate() {
            if !eq_mod(x, y, cap) {
                return Ok(ManinReport {
                    ok: false,
                    witness: Some(ManinWitness {
                        beta: ta.beta,
                        index: i,
                        label: a.tower().level(ta.beta)?.labels[i],
                        twist,
                        lhs: x.value,
                        rhs: y.value,
                        prec: cap.min(x.prec).min(y.prec),
                    }),
                });
            }
        }
    }
    Ok(ManinReport { ok: true, witness: None })
}

/// Random ordinary measure for tests: random top level, lower levels
/// by fiber sums, eigenvalue 1.
#[cfg(test)]
pub(super) fn random_ordinary(
    tower: &Arc<ClassGroupTower>,
    prec: u32,
    seed: u64,
) -> MeasureTower {
    use rand::{Rng, SeedableRng};
    let p = tower.p();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let modulus = prime_power(p, prec);
    let beta_max = tower.beta_max();
    let mut raw: Vec<Vec<PadicTrunc>> = vec![Vec::new(); beta_max as usize];
    raw[beta_max as usize - 1] = (0..tower.level(beta_max).unwrap().labels.len())
        .map(|_| PadicTrunc::from_u64(p, prec, rng.gen_range(0..modulus)))
        .collect();
    for beta in (1..beta_max).rev() {
        let fibers = tower.fibers(beta + 1).unwrap();
        let upper = raw[beta as usize].clone();
        raw[beta as usize - 1] = fibers
            .iter()
            .map(|f| trunc_sum(p, prec, f.iter().map(|&x| upper[x].clone())))
            .collect();
    }
    let one = PadicTrunc::from_u64(p, prec, 1);
    MeasureTower::from_raw(tower.clone(), raw, &one, 0, None).unwrap()
}

#[cfg(test)]
mod tests {
    use super::super::tower::product_tower;
    use super::*;

    #[test]
    fn constant_one_has_eigenvalue_p_and_perturbation_is_caught() {
        let tower = Arc::new(ClassGroupTower::rational(3, 3).unwrap());
        let prec = 4;
        let one = PadicTrunc::from_u64(3, prec, 1);
        let raw: Vec<Vec<PadicTrunc>> = tower
            .levels()
            .iter()
            .map(|l| vec![one.clone(); l.labels.len()])
            .collect();
        let m = MeasureTower::from_raw(tower.clone(), raw.clone(), &one, 1, None).unwrap();
        assert_eq!(m.mode(), NormalizationMode::FiniteSlope { slope: 1 });
        assert_eq!(m.denominator_exponent(3), 3);
        assert!(m.verify_compatibility().unwrap().ok);

        // One coefficient off by p^(prec-1) at the top level.
        let mut bad = raw;
        let last = bad[2].len() - 1;
        bad[2][last] = bad[2][last].add(&PadicTrunc::from_u64(3, prec, 27));
        let alpha = PadicTrunc::from_u64(3, prec, 3);
        let report = check_distribution_relation(&tower, &bad, &alpha).unwrap();
        assert!(!report.ok);
        let w = report.witness.unwrap();
        assert_eq!(w.beta, 2);
        assert!(matches!(
            MeasureTower::from_raw(tower, bad, &one, 1, None),
            Err(IwasawaError::DistributionFailure { beta: 2, .. })
        ));
    }

    #[test]
    fn dirac_integrates_characters_with_orthogonality() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let g = 7u64;
        let m = MeasureTower::dirac(tower.clone(), 4, tower.index_of(2, g).unwrap()).unwrap();
        assert!(m.verify_compatibility().unwrap().ok);
        // Trivial character mod 5 sees the projected chain at level 1.
        let triv = FiniteCharacter::trivial(5);
        let total = m.integrate_character(&triv).unwrap();
        assert!(total.value.equals(&PadicCyclotomic::one(5, 4)));
        // chi mod 25: the integral is the embedded chi(g).
        for chi in FiniteCharacter::all_characters(25) {
            let got = m.integrate_character(&chi).unwrap();
            let want = embed_cyclotomic(&chi.value(g).unwrap(), 5, 4).unwrap();
            assert!(got.value.equals(&want));
            assert_eq!(got.denominator_exponent, 0);
        }
        // Orthogonality: sum over chi mod 5 of chi(g) * conj(chi(h))
        // is (p-1) at h = g and 0 elsewhere.
        for (h, expect_mass) in [(g % 5, true), (3u64, false)] {
            let mut acc = PadicCyclotomic::zero(5, 4, 1);
            for chi in FiniteCharacter::all_characters(5) {
                let val = m.integrate_character(&chi).unwrap().value;
                let conj = embed_cyclotomic(&chi.bar().value(h).unwrap(), 5, 4).unwrap();
                acc = acc.add(&val.mul(&conj));
            }
            let mass = PadicCyclotomic::scalar(PadicTrunc::from_u64(5, 4, 4));
            if expect_mass {
                assert!(acc.equals(&mass));
            } else {
                assert!(acc.is_zero());
            }
        }
    }

    #[test]
    fn twist_is_involutive_and_fixes_identity_dirac() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = random_ordinary(&tower, 4, 11).with_exponent(Some(0));
        let back = m.eps_cyc_twist(3).unwrap().eps_cyc_twist(-3).unwrap();
        assert!(m.equals(&back));
        assert_eq!(back.exponent(), Some(0));
        assert!(m.equals(&m.eps_cyc_twist(0).unwrap()));
        let delta = MeasureTower::dirac(tower.clone(), 4, tower.index_of(2, 1).unwrap()).unwrap();
        assert!(delta.equals(&delta.eps_cyc_twist(4).unwrap()));
    }

    #[test]
    fn twisted_towers_are_compatible_only_mod_level() {
        let tower = Arc::new(ClassGroupTower::rational(3, 2).unwrap());
        let m = MeasureTower::dirac(tower.clone(), 4, tower.index_of(2, 5).unwrap()).unwrap();
        let t = m.eps_cyc_twist(1).unwrap();
        assert!(t.is_capped());
        assert!(t.verify_compatibility().unwrap().ok);
        // At full precision the lifts differ: level 1 sees 2, level 2
        // sums to 5.
        let low = &t.level(1).unwrap().coeffs[tower.index_of(1, 2).unwrap()];
        let high = &t.level(2).unwrap().coeffs[tower.index_of(2, 5).unwrap()];
        assert_eq!(low.value, 2);
        assert_eq!(high.value, 5);
    }

    #[test]
    fn moment_integrals_match_twist_then_integrate() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = random_ordinary(&tower, 4, 23);
        for chi in FiniteCharacter::all_characters(25).into_iter().step_by(5) {
            for k in [-2i64, -1, 0, 1, 3] {
                let direct = m.integrate_moment(k, &chi).unwrap();
                let via_twist =
                    m.eps_cyc_twist(k).unwrap().integrate_character(&chi).unwrap();
                assert!(direct.value.equals(&via_twist.value));
            }
        }
        // Twist by 1 then integrate the trivial character is the first
        // moment of the cyclotomic character.
        let triv = FiniteCharacter::trivial(25);
        let lhs = m.eps_cyc_twist(1).unwrap().integrate_character(&triv).unwrap();
        let rhs = m.integrate_moment(1, &triv).unwrap();
        assert!(lhs.value.equals(&rhs.value));
    }

    #[test]
    fn manin_relation_holds_for_twists_and_catches_corruption() {
        let tower = Arc::new(ClassGroupTower::rational(11, 2).unwrap());
        let a = random_ordinary(&tower, 3, 7).with_exponent(Some(2));
        let b = a.eps_cyc_twist(3).unwrap();
        assert_eq!(b.exponent(), Some(5));
        assert!(manin_relation_check(&a, &b).unwrap().ok);
        assert!(manin_relation_check(&b, &a).unwrap().ok);

        let mut corrupt = b.clone();
        corrupt.levels[1].coeffs[4] =
            corrupt.levels[1].coeffs[4].add(&PadicTrunc::from_u64(11, 3, 11));
        let report = manin_relation_check(&a, &corrupt).unwrap();
        assert!(!report.ok);
        let w = report.witness.unwrap();
        assert_eq!((w.beta, w.index, w.twist), (2, 4, 3));

        let short = random_ordinary(&Arc::new(ClassGroupTower::rational(11, 1).unwrap()), 3, 7)
            .with_exponent(Some(0));
        assert!(matches!(
            manin_relation_check(&a, &short),
            Err(IwasawaError::TowerMismatch(_))
        ));
        assert!(matches!(
            manin_relation_check(&a, &a.clone().with_exponent(None)),
            Err(IwasawaError::MissingExponent)
        ));
    }

    #[test]
    fn pushforward_identity_twists_and_fiber_sums() {
        // Rational tower: the norm is the identity, no twist is a no-op.
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = random_ordinary(&tower, 4, 31);
        let pushed = m.pushforward(None).unwrap();
        assert!(m.equals(&pushed));

        // Twist by the order-4 character embedding as the Teichmueller
        // lift agrees with the eps-twist mod p.
        let omega = FiniteCharacter::all_characters(5)
            .into_iter()
            .find(|c| {
                c.order() == 4 && {
                    let e = embed_cyclotomic(&c.value(2).unwrap(), 5, 4).unwrap();
                    e.wild() == 1 && e.coords()[0].value % 5 == 2
                }
            })
            .unwrap();
        let twisted = m.pushforward(Some(&omega)).unwrap();
        let eps_twisted = m.eps_cyc_twist(1).unwrap();
        for beta in 1..=2u32 {
            let a = &twisted.level(beta).unwrap().coeffs;
            let b = &eps_twisted.level(beta).unwrap().coeffs;
            for (x, y) in a.iter().zip(b) {
                assert!(eq_mod(x, y, 1), "omega-twist and eps-twist agree mod p");
            }
        }

        // Product tower: fiberwise constants push to fiber-size multiples.
        let prod = Arc::new(product_tower(3, 2, 2).unwrap());
        let one = PadicTrunc::from_u64(3, 4, 1);
        let raw: Vec<Vec<PadicTrunc>> =
            prod.levels().iter().map(|l| vec![one.clone(); l.labels.len()]).collect();
        let flat = MeasureTower::from_raw(prod, raw, &one, 1, None).unwrap();
        let out = flat.pushforward(None).unwrap();
        assert!(out.tower().is_rational());
        let two = PadicTrunc::from_u64(3, 4, 2);
        for lvl in out.levels() {
            assert!(lvl.coeffs.iter().all(|c| *c == two));
        }
        assert!(out.verify_compatibility().unwrap().ok);
    }

    #[test]
    fn pushforward_rejections() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = random_ordinary(&tower, 4, 41);
        // Conductor above the tower height.
        let tall = FiniteCharacter::all_characters(125)
            .into_iter()
            .find(|c| c.conductor() == 125)
            .unwrap();
        assert!(matches!(
            m.pushforward(Some(&tall)),
            Err(IwasawaError::ConductorOverflow { .. })
        ));
        // p-power order values do not embed.
        let wild = FiniteCharacter::all_characters(25)
            .into_iter()
            .find(|c| c.order() == 5)
            .unwrap();
        assert!(matches!(m.pushforward(Some(&wild)), Err(IwasawaError::WildTwist { order: 5 })));
        // Norm data is required.
        let mut file = ClassGroupTower::rational(5, 2).unwrap().to_file();
        for lvl in &mut file.levels {
            lvl.norm = None;
        }
        let bare = Arc::new(ClassGroupTower::from_levels(5, file.levels).unwrap());
        let d = MeasureTower::dirac(bare, 4, 0).unwrap();
        assert!(matches!(d.pushforward(None), Err(IwasawaError::NormMissing)));
    }

    #[test]
    fn linear_combinations_preserve_distribution() {
        let tower = Arc::new(ClassGroupTower::rational(3, 3).unwrap());
        let a = random_ordinary(&tower, 4, 51);
        let b = random_ordinary(&tower, 4, 52);
        let combo = a
            .linear_combination(&b, &PadicTrunc::from_u64(3, 4, 5), &PadicTrunc::from_u64(3, 4, 80))
            .unwrap();
        assert!(combo.verify_compatibility().unwrap().ok);
        let twisted = a.eps_cyc_twist(2).unwrap();
        let mixed = twisted
            .linear_combination(
                &twisted,
                &PadicTrunc::from_u64(3, 4, 1),
                &PadicTrunc::from_u64(3, 4, 1),
            )
            .unwrap();
        assert!(mixed.is_capped());
        assert!(mixed.verify_compatibility().unwrap().ok);
    }

    #[test]
    fn measure_files_round_trip_and_reject_bad_shapes() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = random_ordinary(&tower, 3, 61).with_exponent(Some(4));
        let file = m.to_file().unwrap();
        let json = serde_json::to_string(&file).unwrap();
        assert!(json.contains("\"N\":3"));
        let back = MeasureTower::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        assert!(m.equals(&back));
        assert_eq!(back.exponent(), Some(4));

        let mut bad = file.clone();
        bad.levels[1].group.swap(0, 1);
        assert!(matches!(MeasureTower::from_file(&bad), Err(IwasawaError::BadFile(_))));
        let mut bad = file.clone();
        bad.levels[1].coeffs[0] += 1;
        assert!(matches!(
            MeasureTower::from_file(&bad),
            Err(IwasawaError::DistributionFailure { .. })
        ));
        let mut bad = file;
        bad.mode = "finite-slope".into();
        assert!(matches!(MeasureTower::from_file(&bad), Err(IwasawaError::BadFile(_))));
    }

    #[test]
    fn integral_rejects_characters_off_the_tower() {
        let tower = Arc::new(ClassGroupTower::rational(5, 2).unwrap());
        let m = random_ordinary(&tower, 3, 71);
        let chi6 = FiniteCharacter::trivial(6);
        assert!(matches!(
            m.integrate_character(&chi6),
            Err(IwasawaError::TwistModulus { modulus: 6 })
        ));
        let tall = FiniteCharacter::trivial(125);
        assert!(matches!(
            m.integrate_character(&tall),
            Err(IwasawaError::ConductorOverflow { .. })
        ));
        let prod = Arc::new(product_tower(5, 2, 2).unwrap());
        let d = MeasureTower::dirac(prod, 3, 0).unwrap();
        assert!(matches!(
            d.integrate_character(&FiniteCharacter::trivial(5)),
            Err(IwasawaError::NotRational)
        ));
    }
}
