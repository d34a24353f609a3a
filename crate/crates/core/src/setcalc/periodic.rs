use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::SetError;
use crate::bitset::BitSet;

/// `{n ∈ Z : n mod m ∈ residues}`, stored with its minimal period.
///
/// Every value is normalized on construction, so two sets are equal exactly
/// when they are equal as subsets of `Z`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PeriodicIntSet {
    modulus: u64,
    residues: BitSet,
}

impl PeriodicIntSet {
    pub fn new(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Result<Self, SetError> {
        if modulus == 0 {
            return Err(SetError::Invalid("modulus must be >= 1".into()));
        }
        let mut bits = BitSet::new(modulus as usize);
        for r in residues {
            if r >= modulus {
                return Err(SetError::Invalid(format!("residue {r} not below modulus {modulus}")));
            }
            bits.insert(r as usize);
        }
        Ok(PeriodicIntSet {
            modulus,
            residues: bits,
        }
        .normalized())
    }

    pub fn integers() -> Self {
        PeriodicIntSet::new(1, [0]).unwrap()
    }

    pub fn empty() -> Self {
        PeriodicIntSet::new(1, []).unwrap()
    }

    /// Residues mod `m` congruent to `r` mod `step`, i.e. `step*Z + r` lifted.
    pub fn progression(step: u64, offset: i64) -> Self {
        PeriodicIntSet::new(step, [offset.rem_euclid(step as i64) as u64]).unwrap()
    }

    fn normalized(self) -> Self {
        let m = self.modulus;
        for d in 1..=m {
            if !m.is_multiple_of(d) {
                continue;
            }
            let periodic = (0..m).all(|r| self.residues.contains(r as usize) == self.residues.contains((r % d) as usize));
            if periodic {
                let bits = BitSet::from_indices(d as usize, (0..d as usize).filter(|&r| self.residues.contains(r)));
                return PeriodicIntSet {
                    modulus: d,
                    residues: bits,
                };
            }
        }
        unreachable!("d = m is always a period")
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> impl Iterator<Item = u64> + '_ {
        self.residues.iter().map(|r| r as u64)
    }

    pub fn residue_count(&self) -> u64 {
        self.residues.count() as u64
    }

    pub fn contains(&self, n: i64) -> bool {
        self.residues.contains(n.rem_euclid(self.modulus as i64) as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn is_everything(&self) -> bool {
        self.residues.is_full()
    }

    /// Exact density `|R|/m`; upper and lower Banach densities coincide with it.
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.residue_count(), self.modulus)
    }

    pub fn complement(&self) -> Self {
        PeriodicIntSet {
            modulus: self.modulus,
            residues: self.residues.complement(),
        }
        .normalized()
    }

    pub fn negate(&self) -> Self {
        let m = self.modulus;
        PeriodicIntSet::new(m, self.residues().map(|r| (m - r) % m)).unwrap()
    }

    pub fn translate(&self, t: i64) -> Self {
        let m = self.modulus as i64;
        PeriodicIntSet::new(self.modulus, self.residues().map(|r| (r as i64 + t).rem_euclid(m) as u64)).unwrap()
    }

    /// Residue bitset for the same set written with modulus `m` (a multiple of the own modulus).
    pub fn lift(&self, m: u64) -> BitSet {
        assert!(m.is_multiple_of(self.modulus), "{m} is not a multiple of {}", self.modulus);
        BitSet::from_indices(m as usize, (0..m).filter(|&r| self.contains(r as i64)).map(|r| r as usize))
    }
}

/// Sumset `A + B` over `Z`, computed on one period of `lcm(m_A, m_B)`.
pub fn periodic_product(a: &PeriodicIntSet, b: &PeriodicIntSet) -> PeriodicIntSet {
    let m = a.modulus.lcm(&b.modulus);
    let la = a.lift(m);
    let lb = b.lift(m);
    let mut out = BitSet::new(m as usize);
    for x in la.iter() {
        for y in lb.iter() {
            out.insert((x + y) % m as usize);
        }
    }
    PeriodicIntSet {
        modulus: m,
        residues: out,
    }
    .normalized()
}

/// `{0, 1, .., j} + A`.
pub fn interval_sum(a: &PeriodicIntSet, j: u64) -> PeriodicIntSet {
    let m = a.modulus;
    let mut out = BitSet::new(m as usize);
    for r in a.residues() {
        for t in 0..=j.min(m - 1) {
            out.insert(((r + t) % m) as usize);
        }
    }
    PeriodicIntSet { modulus: m, residues: out }.normalized()
}

impl fmt::Display for PeriodicIntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.residues().map(|r| r.to_string()).collect();
        write!(f, "mod={};residues={}", self.modulus, r.join(","))
    }
}

impl fmt::Debug for PeriodicIntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PeriodicIntSet({self})")
    }
}

impl FromStr for PeriodicIntSet {
    type Err = SetError;

    /// Parses `mod=m;residues=0,1,4` (an empty residue list is the empty set).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| SetError::Parse(format!("{s:?}: {why}"));
        let mut modulus = None;
        let mut residues = None;
        for part in s.trim().split(';') {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match k.trim() {
                "mod" => modulus = Some(v.trim().parse::<u64>().map_err(|_| bad("bad modulus"))?),
                "residues" => {
                    let v = v.trim();
                    let list: Result<Vec<u64>, _> = if v.is_empty() {
                        Ok(Vec::new())
                    } else {
                        v.split(',').map(|t| t.trim().parse::<u64>()).collect()
                    };
                    residues = Some(list.map_err(|_| bad("bad residue"))?);
                }
                other => return Err(bad(&format!("unknown key {other}"))),
            }
        }
        PeriodicIntSet::new(
            modulus.ok_or_else(|| bad("missing mod"))?,
            residues.ok_or_else(|| bad("missing residues"))?,
        )
    }
}

impl Serialize for PeriodicIntSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PeriodicIntSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
