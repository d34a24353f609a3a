//! Effective group arithmetic for the three built-in families: integer
//! lattices `Z^d`, finite products of cyclic groups, and free groups `F_k`.
//!
//! Elements are plain values; the [`GroupDescriptor`] interprets them. Free
//! group words are kept freely reduced at all times, so element equality is
//! ordinary sequence equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default refusal threshold for ball enumeration.
pub const DEFAULT_BALL_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("element {element} does not belong to group {descriptor}")]
    Mismatch { descriptor: String, element: String },
    #[error("invalid group descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("cannot parse element {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("ball of radius {radius} would hold {predicted} elements, cap is {cap}")]
    BallTooLarge {
        radius: u32,
        predicted: u128,
        cap: usize,
    },
}

/// One of the supported group families.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDescriptor {
    IntegerLattice { dim: usize },
    CyclicProduct { moduli: Vec<u64> },
    FreeGroup { rank: usize },
}

/// A signed generator index: `+i` is the i-th free generator (1-based),
/// `-i` its inverse.
pub type Letter = i32;

/// A freely reduced word in a free group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupElement {
    Vector(Vec<i64>),
    Residues(Vec<u64>),
    Word(Word),
}

fn letter_key(l: Letter) -> u32 {
    2 * (l.unsigned_abs() - 1) + u32::from(l < 0)
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from arbitrary letters, reducing it. Zero letters are dropped.
    pub fn new<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Word(Vec::new());
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn generator(i: Letter) -> Self {
        Word::new([i])
    }

    /// Appends a letter on the right, cancelling against the last letter if needed.
    pub fn push(&mut self, l: Letter) {
        if l == 0 {
            return;
        }
        if self.0.last() == Some(&-l) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn mul(&self, other: &Word) -> Word {
        // cancel the overlap, then concatenate
        let mut k = 0;
        let (a, b) = (&self.0, &other.0);
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == -b[k] {
            k += 1;
        }
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k);
        out.extend_from_slice(&a[..a.len() - k]);
        out.extend_from_slice(&b[k..]);
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.0.iter().all(|&l| l != 0) && self.0.windows(2).all(|p| p[0] != -p[1])
    }

    /// True when `prefix` is an initial segment of this word.
    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    fn max_generator(&self) -> u32 {
        self.0.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            self.0
                .iter()
                .map(|&l| letter_key(l))
                .cmp(other.0.iter().map(|&l| letter_key(l)))
        })
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.0 {
            let i = l.unsigned_abs();
            // 'e' is reserved for the identity
            if i <= 26 && i != 5 {
                let c = (b'a' + (i - 1) as u8) as char;
                if l < 0 {
                    write!(f, "{}", c.to_ascii_uppercase())?;
                } else {
                    write!(f, "{c}")?;
                }
            } else if l < 0 {
                write!(f, "[G{i}]")?;
            } else {
                write!(f, "[g{i}]")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = GroupError;

    /// Parses words such as `abA` (capitals are inverses); `e` or the empty
    /// string is the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let l = match c {
                'a'..='z' if c != 'e' => (c as u8 - b'a' + 1) as Letter,
                'A'..='Z' if c != 'E' => -((c.to_ascii_lowercase() as u8 - b'a' + 1) as Letter),
                _ => {
                    return Err(GroupError::Parse {
                        input: s.to_string(),
                        reason: format!("unexpected character {c:?}"),
                    })
                }
            };
            letters.push(l);
        }
        Ok(Word::new(letters))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Word(w) => write!(f, "{w}"),
            GroupElement::Vector(v) => write_list(f, v),
            GroupElement::Residues(v) => write_list(f, v),
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, v: &[T]) -> fmt::Result {
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl GroupElement {
    pub fn int(n: i64) -> Self {
        GroupElement::Vector(vec![n])
    }

    pub fn word(s: &str) -> Result<Self, GroupError> {
        s.parse().map(GroupElement::Word)
    }

    pub fn as_word(&self) -> Option<&Word> {
        match self {
            GroupElement::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[i64]> {
        match self {
            GroupElement::Vector(v) => Some(v),
            _ => None,
        }
    }

    /// The single coordinate of an element of `Z`.
    pub fn as_int(&self) -> Option<i64> {
        match self {
            GroupElement::Vector(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

impl GroupDescriptor {
    pub fn lattice(dim: usize) -> Result<Self, GroupError> {
        let d = GroupDescriptor::IntegerLattice { dim };
        d.validate()?;
        Ok(d)
    }

    pub fn integers() -> Self {
        GroupDescriptor::IntegerLattice { dim: 1 }
    }

    pub fn cyclic(moduli: &[u64]) -> Result<Self, GroupError> {
        let d = GroupDescriptor::CyclicProduct {
            moduli: moduli.to_vec(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn free(rank: usize) -> Result<Self, GroupError> {
        let d = GroupDescriptor::FreeGroup { rank };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        match self {
            GroupDescriptor::IntegerLattice { dim } if *dim == 0 => Err(
                GroupError::InvalidDescriptor("lattice dimension must be >= 1".into()),
            ),
            GroupDescriptor::CyclicProduct { moduli } if moduli.is_empty() => Err(
                GroupError::InvalidDescriptor("cyclic product needs at least one modulus".into()),
            ),
            GroupDescriptor::CyclicProduct { moduli } if moduli.contains(&0) => Err(
                GroupError::InvalidDescriptor("moduli must be >= 1".into()),
            ),
            GroupDescriptor::FreeGroup { rank } if *rank == 0 || *rank > i32::MAX as usize => {
                Err(GroupError::InvalidDescriptor("free rank must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupDescriptor::FreeGroup { rank } => *rank == 1,
            _ => true,
        }
    }

    /// Number of generators (the standard generating set is these and their inverses).
    pub fn generator_count(&self) -> usize {
        match self {
            GroupDescriptor::IntegerLattice { dim } => *dim,
            GroupDescriptor::CyclicProduct { moduli } => moduli.len(),
            GroupDescriptor::FreeGroup { rank } => *rank,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupDescriptor::IntegerLattice { dim } => GroupElement::Vector(vec![0; *dim]),
            GroupDescriptor::CyclicProduct { moduli } => {
                GroupElement::Residues(vec![0; moduli.len()])
            }
            GroupDescriptor::FreeGroup { .. } => GroupElement::Word(Word::identity()),
        }
    }

    /// The generator with signed 1-based index `i` (negative for the inverse).
    pub fn generator(&self, i: Letter) -> GroupElement {
        assert!(i != 0 && i.unsigned_abs() as usize <= self.generator_count());
        let idx = i.unsigned_abs() as usize - 1;
        match self {
            GroupDescriptor::IntegerLattice { dim } => {
                let mut v = vec![0; *dim];
                v[idx] = i.signum() as i64;
                GroupElement::Vector(v)
            }
            GroupDescriptor::CyclicProduct { moduli } => {
                let mut v = vec![0; moduli.len()];
                v[idx] = if i > 0 { 1 % moduli[idx] } else { moduli[idx] - 1 };
                GroupElement::Residues(v)
            }
            GroupDescriptor::FreeGroup { .. } => GroupElement::Word(Word::generator(i)),
        }
    }

    /// All generators and their inverses, in canonical letter order.
    pub fn symmetric_generators(&self) -> Vec<GroupElement> {
        let k = self.generator_count() as Letter;
        (1..=k).flat_map(|i| [self.generator(i), self.generator(-i)]).collect()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self, g) {
            (GroupDescriptor::IntegerLattice { dim }, GroupElement::Vector(v)) => v.len() == *dim,
            (GroupDescriptor::CyclicProduct { moduli }, GroupElement::Residues(r)) => {
                r.len() == moduli.len() && r.iter().zip(moduli).all(|(x, m)| x < m)
            }
            (GroupDescriptor::FreeGroup { rank }, GroupElement::Word(w)) => {
                w.is_reduced() && w.max_generator() as usize <= *rank
            }
            _ => false,
        }
    }

    pub fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(GroupError::Mismatch {
                descriptor: self.to_string(),
                element: format!("{g:?}"),
            })
        }
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul_unchecked(g, h))
    }

    /// Group product without membership validation; callers guarantee both
    /// arguments belong to this descriptor.
    pub fn mul_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (self, g, h) {
            (GroupDescriptor::IntegerLattice { .. }, GroupElement::Vector(a), GroupElement::Vector(b)) => {
                GroupElement::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (
                GroupDescriptor::CyclicProduct { moduli },
                GroupElement::Residues(a),
                GroupElement::Residues(b),
            ) => GroupElement::Residues(
                a.iter()
                    .zip(b)
                    .zip(moduli)
                    .map(|((x, y), m)| ((*x as u128 + *y as u128) % *m as u128) as u64)
                    .collect(),
            ),
            (GroupDescriptor::FreeGroup { .. }, GroupElement::Word(a), GroupElement::Word(b)) => {
                GroupElement::Word(a.mul(b))
            }
            _ => panic!("mul_unchecked: element does not match {self}"),
        }
    }

    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        match (self, g) {
            (_, GroupElement::Vector(a)) => GroupElement::Vector(a.iter().map(|x| -x).collect()),
            (GroupDescriptor::CyclicProduct { moduli }, GroupElement::Residues(a)) => {
                GroupElement::Residues(a.iter().zip(moduli).map(|(x, m)| (m - x) % m).collect())
            }
            (_, GroupElement::Word(w)) => GroupElement::Word(w.inverse()),
            _ => panic!("inv: element does not match {self}"),
        }
    }

    /// Word length for the standard generators; the ℓ∞ norm on lattices.
    pub fn length(&self, g: &GroupElement) -> u64 {
        match (self, g) {
            (_, GroupElement::Vector(v)) => v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0),
            (GroupDescriptor::CyclicProduct { moduli }, GroupElement::Residues(r)) => r
                .iter()
                .zip(moduli)
                .map(|(x, m)| (*x).min(m - x))
                .sum(),
            (_, GroupElement::Word(w)) => w.len() as u64,
            _ => panic!("length: element does not match {self}"),
        }
    }

    /// Predicted cardinality of the ball of radius `r` (an upper bound for
    /// cyclic products, exact otherwise).
    pub fn ball_size(&self, r: u32) -> u128 {
        match self {
            GroupDescriptor::IntegerLattice { dim } => {
                (2 * r as u128 + 1).saturating_pow(*dim as u32)
            }
            GroupDescriptor::CyclicProduct { moduli } => moduli
                .iter()
                .map(|&m| (m as u128).min(2 * r as u128 + 1))
                .fold(1u128, |a, b| a.saturating_mul(b)),
            GroupDescriptor::FreeGroup { rank } => free_ball_size(*rank as u128, r),
        }
    }

    pub fn parse_element(&self, s: &str) -> Result<GroupElement, GroupError> {
        let s = s.trim();
        let parse_err = |reason: &str| GroupError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let g = match self {
            GroupDescriptor::FreeGroup { .. } => GroupElement::Word(s.parse()?),
            GroupDescriptor::IntegerLattice { .. } => GroupElement::Vector(
                s.split(',')
                    .map(|t| t.trim().parse::<i64>().map_err(|_| parse_err("expected integers")))
                    .collect::<Result<_, _>>()?,
            ),
            GroupDescriptor::CyclicProduct { moduli } => GroupElement::Residues(
                s.split(',')
                    .zip(moduli)
                    .map(|(t, m)| {
                        t.trim()
                            .parse::<i64>()
                            .map(|x| x.rem_euclid(*m as i64) as u64)
                            .map_err(|_| parse_err("expected integers"))
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        self.check(&g).map_err(|_| parse_err("wrong arity or generator out of range"))?;
        Ok(g)
    }
}

fn free_ball_size(k: u128, r: u32) -> u128 {
    if r == 0 {
        return 1;
    }
    if k == 1 {
        return 2 * r as u128 + 1;
    }
    // 1 + 2k((2k-1)^r - 1)/(2k-2)
    let q = 2 * k - 1;
    let pow = q.saturating_pow(r);
    1u128.saturating_add((2 * k).saturating_mul(pow - 1) / (2 * k - 2))
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::IntegerLattice { dim } => write!(f, "kind=lattice,dim={dim}"),
            GroupDescriptor::CyclicProduct { moduli } => {
                let m: Vec<String> = moduli.iter().map(u64::to_string).collect();
                write!(f, "kind=cyclic,moduli={}", m.join("x"))
            }
            GroupDescriptor::FreeGroup { rank } => write!(f, "kind=free,rank={rank}"),
        }
    }
}

impl FromStr for GroupDescriptor {
    type Err = GroupError;

    /// Parses `kind=free,rank=2`, `kind=lattice,dim=1` or `kind=cyclic,moduli=4x6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| GroupError::InvalidDescriptor(format!("{s:?}: {why}"));
        let mut kind = None;
        let mut value = None;
        for part in s.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match k.trim() {
                "kind" => kind = Some(v.trim()),
                "rank" | "dim" | "moduli" => value = Some((k.trim(), v.trim())),
                other => return Err(bad(&format!("unknown key {other}"))),
            }
        }
        let num = |v: &str| v.parse::<u64>().map_err(|_| bad("expected a number"));
        let d = match (kind, value) {
            (Some("free"), Some(("rank", v))) => GroupDescriptor::FreeGroup { rank: num(v)? as usize },
            (Some("lattice"), Some(("dim", v))) => {
                GroupDescriptor::IntegerLattice { dim: num(v)? as usize }
            }
            (Some("cyclic"), Some(("moduli", v))) => GroupDescriptor::CyclicProduct {
                moduli: v.split('x').map(num).collect::<Result<_, _>>()?,
            },
            _ => return Err(bad("unknown kind or missing parameter")),
        };
        d.validate()?;
        Ok(d)
    }
}

/// An enumerated word-length ball (an ℓ∞ box on lattices), in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub descriptor: GroupDescriptor,
    pub radius: u32,
    elements: Vec<GroupElement>,
}

impl Ball {
    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }
}

impl<'a> IntoIterator for &'a Ball {
    type Item = &'a GroupElement;
    type IntoIter = std::slice::Iter<'a, GroupElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

pub fn enumerate_ball(desc: &GroupDescriptor, r: u32) -> Result<Ball, GroupError> {
    enumerate_ball_capped(desc, r, DEFAULT_BALL_CAP)
}

pub fn enumerate_ball_capped(desc: &GroupDescriptor, r: u32, cap: usize) -> Result<Ball, GroupError> {
    desc.validate()?;
    let predicted = desc.ball_size(r);
    if predicted > cap as u128 {
        return Err(GroupError::BallTooLarge {
            radius: r,
            predicted,
            cap,
        });
    }
    let elements = match desc {
        GroupDescriptor::IntegerLattice { dim } => {
            let r = r as i64;
            let mut out = Vec::with_capacity(predicted as usize);
            odometer(&vec![-r; *dim], &vec![r; *dim], |v| {
                out.push(GroupElement::Vector(v.to_vec()))
            });
            out
        }
        GroupDescriptor::CyclicProduct { moduli } => {
            let hi: Vec<i64> = moduli.iter().map(|&m| m as i64 - 1).collect();
            let mut out = Vec::new();
            odometer(&vec![0; moduli.len()], &hi, |v| {
                let g = GroupElement::Residues(v.iter().map(|&x| x as u64).collect());
                if desc.length(&g) <= r as u64 {
                    out.push(g);
                }
            });
            out
        }
        GroupDescriptor::FreeGroup { rank } => {
            let letters: Vec<Letter> = (1..=*rank as Letter).flat_map(|i| [i, -i]).collect();
            let mut out = vec![GroupElement::Word(Word::identity())];
            let mut shell = vec![Vec::<Letter>::new()];
            for _ in 0..r {
                let mut next = Vec::with_capacity(shell.len() * (2 * rank).saturating_sub(1).max(1));
                for w in &shell {
                    for &l in &letters {
                        if w.last() == Some(&-l) {
                            continue;
                        }
                        let mut nw = w.clone();
                        nw.push(l);
                        next.push(nw);
                    }
                }
                out.extend(next.iter().cloned().map(|w| GroupElement::Word(Word(w))));
                shell = next;
            }
            out
        }
    };
    debug_assert!(elements.windows(2).all(|p| p[0] < p[1]));
    Ok(Ball {
        descriptor: desc.clone(),
        radius: r,
        elements,
    })
}

/// Visits every integer vector in the box `lo..=hi` in lexicographic order.
fn odometer(lo: &[i64], hi: &[i64], mut visit: impl FnMut(&[i64])) {
    let mut v = lo.to_vec();
    loop {
        visit(&v);
        let mut i = v.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if v[i] < hi[i] {
                v[i] += 1;
                let n = v.len();
                v[i + 1..].copy_from_slice(&lo[i + 1..n]);
                break;
            }
        }
    }
}
