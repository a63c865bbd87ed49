//! Certified nonvanishing bounds for families of measures: each
//! omega-component contributes its Weierstrass zero bound, bounds add
//! across the family, and the certificate is cross-validated by brute
//! integration against every character of conductor dividing p^2.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::measure::MeasureTower;
use super::series::{omega_component_of, omega_split_to_series, weierstrass_invariants};
use super::series::WeierstrassOutcome;
use super::IwasawaError;
use crate::exactnum::{embedding_convention, FiniteCharacter};

/// Weierstrass outcome of one omega-component of one tower.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentCertificate {
    pub tower_index: usize,
    pub exponent_label: Option<i64>,
    pub component: u32,
    pub outcome: WeierstrassOutcome,
}

/// One brute-scan integral: the character's position in the mod-p^2
/// enumeration, its invariants, and whether the integral vanished.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRecord {
    pub tower_index: usize,
    pub character_index: usize,
    pub order: u64,
    pub conductor: u64,
    pub component: u32,
    pub vanished: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonvanishingCertificate {
    pub p: u64,
    pub prec: u32,
    pub truncation: usize,
    pub convention: String,
    pub components: Vec<ComponentCertificate>,
    /// Sum of the component bounds when every component certified.
    pub total_bound: Option<u64>,
    pub scans: Vec<ScanRecord>,
    /// Every certified component saw no more vanishing integrals in
    /// the scan than its bound allows.
    pub scan_consistent: bool,
}

impl NonvanishingCertificate {
    pub fn vanished_count(&self) -> usize {
        self.scans.iter().filter(|s| s.vanished).count()
    }

    pub fn nonzero_witnesses(&self) -> Vec<&ScanRecord> {
        self.scans.iter().filter(|s| !s.vanished).collect()
    }

    pub fn is_conclusive(&self) -> bool {
        self.total_bound.is_some()
    }
}

impl fmt::Display for NonvanishingCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "nonvanishing certificate: p = {}, precision p^{}, truncation degree {}",
            self.p, self.prec, self.truncation
        )?;
        writeln!(f, "embedding: {}", self.convention)?;
        for c in &self.components {
            let label = match c.exponent_label {
                Some(j) => format!("j = {j}"),
                None => "untagged".into(),
            };
            match &c.outcome {
                WeierstrassOutcome::Certified { mu_inv, lambda_inv, zero_bound } => writeln!(
                    f,
                    "  tower {} ({label}) omega^{}: mu = {mu_inv}, lambda = {lambda_inv}, \
                     zero bound = {zero_bound}",
                    c.tower_index, c.component
                )?,
                WeierstrassOutcome::Inconclusive { reason } => writeln!(
                    f,
                    "  tower {} ({label}) omega^{}: inconclusive, {reason}",
                    c.tower_index, c.component
                )?,
            }
        }
        match self.total_bound {
            Some(b) => writeln!(
                f,
                "verdict: at most {b} characters of p-power conductor vanish across the family"
            )?,
            None => writeln!(f, "verdict: inconclusive, raise precision")?,
        }
        writeln!(
            f,
            "scan: {} integrals of conductor <= p^2, {} vanished, consistency {}",
            self.scans.len(),
            self.vanished_count(),
            if self.scan_consistent { "ok" } else { "VIOLATED" }
        )
    }
}

/// Builds the certificate for a family of measures on the rational
/// tower, each tagged by its critical exponent. The truncation degree
/// applies to every component series.
pub fn nonvanishing_certificate(
    towers: &[&MeasureTower],
    truncation: usize,
) -> Result<NonvanishingCertificate, IwasawaError> {
    let first = towers.first().ok_or(IwasawaError::MissingLevels { expected: 1, found: 0 })?;
    let p = first.p();
    let prec = first.prec();
    for t in towers {
        if t.p() != p {
            return Err(IwasawaError::MixedPrime { left: p, right: t.p() });
        }
        if t.beta_max() < 2 {
            return Err(IwasawaError::MissingLevels { expected: 2, found: t.beta_max() as usize });
        }
        if !t.tower().is_rational() {
            return Err(IwasawaError::NotRational);
        }
    }
    let mut components = Vec::new();
    for (i, t) in towers.iter().enumerate() {
        for m0 in 0..(p - 1) as u32 {
            let series = omega_split_to_series(t, m0, truncation)?;
            components.push(ComponentCertificate {
                tower_index: i,
                exponent_label: t.exponent(),
                component: m0,
                outcome: weierstrass_invariants(&series),
            });
        }
    }
    let total_bound = components
        .iter()
        .map(|c| c.outcome.zero_bound().map(|b| b as u64))
        .sum::<Option<u64>>();

    // Brute cross-check: integrate every character of modulus p^2
    // (conductor 1, p, or p^2) against every tower and tally the
    // vanishing integrals per certified component.
    let mut scans = Vec::new();
    let mut vanished_per: Vec<u64> = vec![0; components.len()];
    for (i, t) in towers.iter().enumerate() {
        for (ci, chi) in FiniteCharacter::all_characters(p * p).into_iter().enumerate() {
            let m0 = omega_component_of(&chi, p)?;
            let vanished = t.integrate_character(&chi)?.value.is_zero();
            if vanished {
                vanished_per[i * (p as usize - 1) + m0 as usize] += 1;
            }
            scans.push(ScanRecord {
                tower_index: i,
                character_index: ci,
                order: chi.order(),
                conductor: chi.conductor(),
                component: m0,
                vanished,
            });
        }
    }
    let scan_consistent = components.iter().enumerate().all(|(k, c)| {
        match c.outcome.zero_bound() {
            Some(b) => vanished_per[k] <= b as u64,
            None => true,
        }
    });
    Ok(NonvanishingCertificate {
        p,
        prec,
        truncation,
        convention: embedding_convention(p),
        components,
        total_bound,
        scans,
        scan_consistent,
    })
}
