//! Finite-order characters of (Z/m)^* with exact cyclotomic values, and
//! their Gauss sums.
//!
//! A character is stored by its exponents on a fixed generating set of the
//! unit group. Discrete logarithms are precomputed by enumerating the
//! group, which is cheap at the moduli this library targets (a few
//! thousand at most).

use super::cyclotomic::{euler_phi, factor_u64, CyclotomicElement};
use super::ExactNumError;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

/// A generating set for (Z/m)^* together with full discrete logarithm
/// tables. Generators are CRT lifts of per-prime-power generators: a
/// primitive root for odd prime powers, and the pair -1, 5 for 2^k with
/// k >= 3.
#[derive(Debug)]
pub struct UnitGroup {
    modulus: u64,
    gens: Vec<(u64, u64)>,
    dlog: HashMap<u64, Vec<u64>>,
    exponent: u64,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (u128::from(acc) * u128::from(b) % u128::from(m)) as u64;
        }
        b = (u128::from(b) * u128::from(b) % u128::from(m)) as u64;
        e >>= 1;
    }
    acc
}

fn primitive_root_mod_odd_prime_power(p: u64, e: u32) -> u64 {
    let phi_p = p - 1;
    let prime_factors: Vec<u64> = factor_u64(phi_p).into_iter().map(|(q, _)| q).collect();
    let mut g = 2u64;
    loop {
        if g % p != 0
            && prime_factors.iter().all(|q| pow_mod(g, phi_p / q, p) != 1)
        {
            break;
        }
        g += 1;
    }
    if e == 1 {
        return g;
    }
    // g generates mod p; it generates mod p^e unless g^(p-1) = 1 mod p^2.
    let p2 = p * p;
    if pow_mod(g, p - 1, p2) == 1 {
        g + p
    } else {
        g
    }
}

fn crt_lift(residue: u64, component: u64, modulus: u64) -> u64 {
    // x = residue mod component, x = 1 mod modulus/component.
    let other = modulus / component;
    if other == 1 {
        return residue % modulus;
    }
    let (g, inv_other, _) = extended_gcd(other as i128, component as i128);
    assert_eq!(g, 1);
    let inv = inv_other.rem_euclid(component as i128) as u64;
    // x = 1 + other * t with other * t = residue - 1 mod component.
    let target = (residue as i128 - 1).rem_euclid(component as i128) as u64;
    let t = (u128::from(target) * u128::from(inv) % u128::from(component)) as u64;
    (1 + u128::from(other) * u128::from(t) % u128::from(modulus)) as u64
        % modulus
}

fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = extended_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

impl UnitGroup {
    pub fn new(modulus: u64) -> Arc<Self> {
        assert!(modulus >= 1);
        let mut gens: Vec<(u64, u64)> = Vec::new();
        for (p, e) in factor_u64(modulus) {
            let pe = p.pow(e);
            if p == 2 {
                if e == 2 {
                    gens.push((crt_lift(3, 4, modulus), 2));
                } else if e >= 3 {
                    gens.push((crt_lift(pe - 1, pe, modulus), 2));
                    gens.push((crt_lift(5, pe, modulus), 1 << (e - 2)));
                }
            } else {
                let g = primitive_root_mod_odd_prime_power(p, e);
                gens.push((crt_lift(g, pe, modulus), euler_phi(pe)));
            }
        }
        let mut dlog = HashMap::new();
        let mut stack = vec![(0usize, 1u64, Vec::<u64>::new())];
        while let Some((idx, val, exps)) = stack.pop() {
            if idx == gens.len() {
                dlog.insert(val % modulus.max(1), exps);
                continue;
            }
            let (g, ord) = gens[idx];
            let mut cur = val;
            for k in 0..ord {
                let mut e = exps.clone();
                e.push(k);
                stack.push((idx + 1, cur, e));
                cur = (u128::from(cur) * u128::from(g) % u128::from(modulus.max(2))) as u64;
            }
        }
        let exponent = gens.iter().fold(1u64, |acc, (_, o)| acc.lcm(o));
        assert_eq!(dlog.len() as u64, euler_phi(modulus));
        Arc::new(UnitGroup { modulus, gens, dlog, exponent })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> &[(u64, u64)] {
        &self.gens
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn order(&self) -> u64 {
        euler_phi(self.modulus)
    }

    pub fn is_unit(&self, a: u64) -> bool {
        self.modulus == 1 || (a % self.modulus).gcd(&self.modulus) == 1
    }

    pub fn dlog(&self, a: u64) -> Option<&[u64]> {
        self.dlog.get(&(a % self.modulus.max(1))).map(|v| v.as_slice())
    }

    /// All units, in ascending representative order.
    pub fn units(&self) -> Vec<u64> {
        let mut u: Vec<u64> = self.dlog.keys().copied().collect();
        u.sort_unstable();
        u
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CharacterData {
    modulus: u64,
    generators: Vec<(u64, u64, u64)>,
    order: u64,
}

/// A character of (Z/m)^*, identified by its exponent on each stored
/// generator: chi(g_i) = zeta_{ord_i}^{e_i}.
#[derive(Clone, Serialize, Deserialize)]
#[serde(into = "CharacterData", try_from = "CharacterData")]
pub struct FiniteCharacter {
    group: Arc<UnitGroup>,
    exps: Vec<u64>,
}

impl std::fmt::Debug for FiniteCharacter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "FiniteCharacter(mod {}, exps {:?}, order {})",
            self.group.modulus, self.exps, self.order()
        )
    }
}

impl PartialEq for FiniteCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.exps == other.exps
    }
}

impl From<FiniteCharacter> for CharacterData {
    fn from(chi: FiniteCharacter) -> Self {
        CharacterData {
            modulus: chi.group.modulus,
            generators: chi
                .group
                .gens
                .iter()
                .zip(chi.exps.iter())
                .map(|(&(g, o), &e)| (g, o, e))
                .collect(),
            order: chi.order(),
        }
    }
}

impl TryFrom<CharacterData> for FiniteCharacter {
    type Error = ExactNumError;

    fn try_from(data: CharacterData) -> Result<Self, Self::Error> {
        let group = UnitGroup::new(data.modulus);
        if group.gens.len() != data.generators.len()
            || group
                .gens
                .iter()
                .zip(data.generators.iter())
                .any(|(&(g, o), &(g2, o2, _))| g != g2 || o != o2)
        {
            return Err(ExactNumError::Invalid(format!(
                "generator table mismatch for modulus {}",
                data.modulus
            )));
        }
        let exps: Vec<u64> = data
            .generators
            .iter()
            .zip(group.gens.iter())
            .map(|(&(_, _, e), &(_, o))| e % o)
            .collect();
        let chi = FiniteCharacter { group, exps };
        if chi.order() != data.order {
            return Err(ExactNumError::Invalid("stored character order mismatch".into()));
        }
        Ok(chi)
    }
}

impl FiniteCharacter {
    pub fn trivial(modulus: u64) -> Self {
        let group = UnitGroup::new(modulus);
        let exps = vec![0; group.gens.len()];
        FiniteCharacter { group, exps }
    }

    pub fn from_exponents(group: Arc<UnitGroup>, exps: Vec<u64>) -> Self {
        assert_eq!(exps.len(), group.gens.len());
        let exps = exps
            .into_iter()
            .zip(group.gens.iter())
            .map(|(e, &(_, o))| e % o)
            .collect();
        FiniteCharacter { group, exps }
    }

    /// Every character of (Z/m)^*, enumerated in lexicographic exponent
    /// order; the first entry is the trivial character.
    pub fn all_characters(modulus: u64) -> Vec<Self> {
        let group = UnitGroup::new(modulus);
        let mut out = Vec::new();
        let mut exps = vec![0u64; group.gens.len()];
        loop {
            out.push(FiniteCharacter { group: Arc::clone(&group), exps: exps.clone() });
            let mut i = 0;
            loop {
                if i == exps.len() {
                    return out;
                }
                exps[i] += 1;
                if exps[i] < group.gens[i].1 {
                    break;
                }
                exps[i] = 0;
                i += 1;
            }
        }
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }

    /// Exponent t with chi(a) = zeta_E^t, E the group exponent; None for
    /// non-units.
    pub fn value_exponent(&self, a: u64) -> Option<u64> {
        let e_grp = self.group.exponent;
        let dl = self.group.dlog(a)?;
        let mut t = 0u64;
        for ((&(_, ord), &exp), &d) in
            self.group.gens.iter().zip(self.exps.iter()).zip(dl.iter())
        {
            let step = e_grp / ord;
            t = (t + (u128::from(exp) * u128::from(d) % u128::from(ord)) as u64 * step)
                % e_grp;
        }
        Some(t)
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        if self.group.gens.is_empty() {
            return 1;
        }
        self.group
            .gens
            .iter()
            .zip(self.exps.iter())
            .map(|(&(_, ord), &e)| ord / ord.gcd(&e))
            .fold(1u64, |acc, o| acc.lcm(&o))
    }

    /// chi(a) as an exact cyclotomic value of conductor order(chi); None
    /// for non-units (conventionally zero).
    pub fn value(&self, a: u64) -> Option<CyclotomicElement> {
        let t = self.value_exponent(a)?;
        let d = self.order();
        let e_grp = self.group.exponent.max(1);
        debug_assert_eq!(t % (e_grp / d), 0);
        Some(CyclotomicElement::root_of_unity(d, (t / (e_grp / d)) as i64))
    }

    /// chi(-1) as a sign.
    pub fn sign(&self) -> i8 {
        if self.group.modulus <= 2 {
            return 1;
        }
        match self.value_exponent(self.group.modulus - 1) {
            Some(0) => 1,
            Some(t) => {
                debug_assert_eq!(2 * t, self.group.exponent);
                -1
            }
            None => unreachable!("-1 is always a unit"),
        }
    }

    pub fn is_even(&self) -> bool {
        self.sign() == 1
    }

    /// Complex conjugate character.
    pub fn bar(&self) -> Self {
        let exps = self
            .exps
            .iter()
            .zip(self.group.gens.iter())
            .map(|(&e, &(_, o))| (o - e) % o)
            .collect();
        FiniteCharacter { group: Arc::clone(&self.group), exps }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.group.modulus, other.group.modulus);
        let exps = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .zip(self.group.gens.iter())
            .map(|((&a, &b), &(_, o))| (a + b) % o)
            .collect();
        FiniteCharacter { group: Arc::clone(&self.group), exps }
    }

    /// Smallest f dividing the modulus such that the character is trivial
    /// on units congruent to 1 mod f.
    pub fn conductor(&self) -> u64 {
        let m = self.group.modulus;
        'next: for f in super::cyclotomic::divisors(m) {
            for a in self.group.units() {
                if a % f == 1 % f && self.value_exponent(a) != Some(0) {
                    continue 'next;
                }
            }
            return f;
        }
        m
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.group.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }
}

/// Gauss sum of a primitive character with an additive shift:
/// sum over units a mod m of chi(a) * zeta_m^(c a). Errors on imprimitive
/// input; the empty sum at modulus 1 is 1 by convention.
pub fn gauss_sum(chi: &FiniteCharacter, c: i64) -> Result<CyclotomicElement, ExactNumError> {
    let m = chi.modulus();
    if m == 1 {
        return Ok(CyclotomicElement::one(1));
    }
    let cond = chi.conductor();
    if cond != m {
        return Err(ExactNumError::ImprimitiveCharacter { modulus: m, conductor: cond });
    }
    let d = chi.order();
    let lcm_md = m.lcm(&d);
    let e_grp = chi.group().exponent();
    let mut acc = CyclotomicElement::zero(lcm_md);
    for a in chi.group().units() {
        let t = chi.value_exponent(a).expect("unit");
        let val_exp = u128::from(t / (e_grp / d)) * u128::from(lcm_md / d);
        let add_exp = u128::from((c.rem_euclid(m as i64) as u64 * a) % m)
            * u128::from(lcm_md / m);
        let e = ((val_exp + add_exp) % u128::from(lcm_md)) as i64;
        acc = acc.add(&CyclotomicElement::root_of_unity(lcm_md, e))?;
    }
    Ok(acc)
}
