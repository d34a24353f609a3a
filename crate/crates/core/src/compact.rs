//! Translates, correlation sets and syndetic covers in finite groups with
//! normalised counting measure.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::group::{enumerate_ball, GroupDescriptor, GroupElement, GroupError};
use crate::setcover::{self, CoverOutcome, CoverProblem};

/// Groups above this order are refused; the multiplication table is `n²`.
pub const MAX_ORDER: usize = 1 << 13;

#[derive(Debug, Error)]
pub enum CompactError {
    #[error("invalid group table: {0}")]
    InvalidTable(String),
    #[error("group of order {0} exceeds the table limit")]
    TooLarge(u128),
    #[error("subset has length {found}, group has order {order}")]
    LengthMismatch { order: usize, found: usize },
    #[error("empty set makes the bound vacuous")]
    EmptySet,
    #[error("U misses {witness}, which lies in the correlation set of E")]
    HypothesisViolated { witness: String },
    #[error("translates {first} and {second} of E overlap")]
    LedgerViolated { first: String, second: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A finite group as a multiplication table over `0..n`; index order is the
/// canonical element order used for every tie-break.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupSpace {
    labels: Vec<String>,
    descriptor: Option<GroupDescriptor>,
    table: Vec<u32>,
    inverse: Vec<u32>,
    identity: usize,
}

impl FiniteGroupSpace {
    /// All elements of a product of cyclic groups, in lexicographic residue order.
    pub fn cyclic(moduli: &[u64]) -> Result<Self, CompactError> {
        let desc = GroupDescriptor::cyclic(moduli)?;
        let order: u128 = moduli.iter().map(|&m| m as u128).product();
        if order > MAX_ORDER as u128 {
            return Err(CompactError::TooLarge(order));
        }
        let radius = moduli.iter().map(|m| m / 2).sum::<u64>() as u32;
        let elements = enumerate_ball(&desc, radius)?.elements().to_vec();
        let n = elements.len();
        let index = |g: &GroupElement| elements.binary_search(g).expect("closed under products");
        let mut table = vec![0u32; n * n];
        let mut inverse = vec![0u32; n];
        for (i, g) in elements.iter().enumerate() {
            for (j, h) in elements.iter().enumerate() {
                table[i * n + j] = index(&desc.mul_unchecked(g, h)) as u32;
            }
            inverse[i] = index(&desc.inv(g)) as u32;
        }
        Ok(FiniteGroupSpace {
            labels: elements.iter().map(|g| g.to_string()).collect(),
            identity: index(&desc.identity()),
            descriptor: Some(desc),
            table,
            inverse,
        })
    }

    /// Any group given by its table, `table[i][j] = i·j`; the axioms are checked.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, CompactError> {
        let n = table.len();
        if n == 0 || n > MAX_ORDER {
            return Err(CompactError::InvalidTable(format!("order {n}")));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(CompactError::InvalidTable("table must be n×n over 0..n".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| CompactError::InvalidTable("no identity".into()))?;
        let mut inverse = vec![0u32; n];
        for (x, inv) in inverse.iter_mut().enumerate() {
            let y = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| CompactError::InvalidTable(format!("{x} has no inverse")))?;
            *inv = y as u32;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(CompactError::InvalidTable(format!("({a}·{b})·{c} ≠ {a}·({b}·{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroupSpace {
            labels: (0..n).map(|i| i.to_string()).collect(),
            descriptor: None,
            table: table.into_iter().flatten().map(|x| x as u32).collect(),
            inverse,
            identity,
        })
    }

    pub fn order(&self) -> usize {
        self.inverse.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn descriptor(&self) -> Option<&GroupDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn describe(&self) -> String {
        match &self.descriptor {
            Some(d) => d.to_string(),
            None => format!("table,order={}", self.order()),
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    /// Index of a group element, for groups built from a descriptor.
    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        let label = g.to_string();
        self.descriptor.as_ref()?;
        self.labels.iter().position(|l| *l == label)
    }

    pub fn subset(&self, indices: impl IntoIterator<Item = usize>) -> BitSet {
        BitSet::from_indices(self.order(), indices)
    }

    fn check(&self, s: &BitSet) -> Result<(), CompactError> {
        if s.len() != self.order() {
            return Err(CompactError::LengthMismatch {
                order: self.order(),
                found: s.len(),
            });
        }
        Ok(())
    }

    /// `m(S) = |S|/|K|`.
    pub fn measure(&self, s: &BitSet) -> Ratio<u64> {
        Ratio::new(s.count() as u64, self.order() as u64)
    }

    /// `k·S`.
    pub fn translate(&self, k: usize, s: &BitSet) -> BitSet {
        self.subset(s.iter().map(|x| self.mul(k, x)))
    }

    /// `S·k`.
    pub fn translate_right(&self, s: &BitSet, k: usize) -> BitSet {
        self.subset(s.iter().map(|x| self.mul(x, k)))
    }

    pub fn inverse_set(&self, s: &BitSet) -> BitSet {
        self.subset(s.iter().map(|x| self.inv(x)))
    }

    /// `F·U`.
    pub fn product(&self, f: &BitSet, u: &BitSet) -> BitSet {
        let mut out = BitSet::new(self.order());
        for k in f.iter() {
            out.union_with(&self.translate(k, u));
        }
        out
    }
}

/// A translate achieving the largest overlap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translate {
    pub k: usize,
    pub overlap: BitSet,
    #[serde(with = "ratio_str")]
    pub measure: Ratio<u64>,
}

/// `k₀` maximising `m(C ∩ k₀·D)` over the whole group, least index on ties.
/// The maximum is at least `m(C)·m(D)` since the overlaps average to it.
pub fn best_translate(space: &FiniteGroupSpace, c: &BitSet, d: &BitSet) -> Result<Translate, CompactError> {
    space.check(c)?;
    space.check(d)?;
    if c.is_empty() || d.is_empty() {
        return Err(CompactError::EmptySet);
    }
    let mut best: Option<(usize, usize)> = None;
    for k in 0..space.order() {
        let n = c.intersection_count(&space.translate(k, d));
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((k, n));
        }
    }
    let (k, n) = best.expect("nonempty group");
    let measure = Ratio::new(n as u64, space.order() as u64);
    assert!(
        measure >= space.measure(c) * space.measure(d),
        "overlap below the averaging bound"
    );
    let mut overlap = space.translate(k, d);
    overlap.intersect_with(c);
    Ok(Translate { k, overlap, measure })
}

/// `{k : A ∩ k·B ≠ ∅}`, that is `A·B⁻¹`.
pub fn correlation_set(space: &FiniteGroupSpace, a: &BitSet, b: &BitSet) -> Result<BitSet, CompactError> {
    space.check(a)?;
    space.check(b)?;
    let mut u = BitSet::new(space.order());
    for x in a.iter() {
        for y in b.iter() {
            u.insert(space.mul(x, space.inv(y)));
        }
    }
    Ok(u)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyCover {
    /// Picks after the identity, in order.
    pub picks: Vec<usize>,
    pub cover: BitSet,
    /// `⌊1/m(E)⌋`.
    pub bound: u64,
}

impl GreedyCover {
    pub fn size(&self) -> usize {
        self.cover.count()
    }
}

/// Cover `F = {e, k₁, …}` of the group by left translates of `U`, each pick
/// the least element not yet covered.
///
/// Requires `U ⊇ E·E⁻¹`; then the translates `k_j·E` are pairwise disjoint,
/// which is checked as the picks are made and caps `|F|` at `⌊1/m(E)⌋`.
pub fn greedy_syndetic_cover(space: &FiniteGroupSpace, u: &BitSet, e: &BitSet) -> Result<GreedyCover, CompactError> {
    space.check(u)?;
    space.check(e)?;
    if e.is_empty() {
        return Err(CompactError::EmptySet);
    }
    let corr = correlation_set(space, e, e)?;
    if let Some(k) = corr.iter().find(|&k| !u.contains(k)) {
        return Err(CompactError::HypothesisViolated {
            witness: space.label(k).to_string(),
        });
    }
    let bound = (space.order() / e.count()) as u64;
    let id = space.identity();
    let mut cover = space.subset([id]);
    let mut covered = u.clone();
    let mut ledger = e.clone();
    let mut owners = vec![id];
    let mut picks = Vec::new();
    while let Some(k) = covered.first_missing() {
        let te = space.translate(k, e);
        if ledger.intersects(&te) {
            let clash = owners
                .iter()
                .find(|&&j| space.translate(j, e).intersects(&te))
                .copied()
                .unwrap_or(id);
            return Err(CompactError::LedgerViolated {
                first: space.label(clash).to_string(),
                second: space.label(k).to_string(),
            });
        }
        ledger.union_with(&te);
        owners.push(k);
        picks.push(k);
        cover.insert(k);
        covered.union_with(&space.translate(k, u));
    }
    debug_assert!(cover.count() as u64 <= bound);
    Ok(GreedyCover { picks, cover, bound })
}

/// Minimum number of left translates of `U` covering the group.
pub fn exact_min_cover(space: &FiniteGroupSpace, u: &BitSet, cap: usize, budget: u64) -> Result<CoverOutcome, CompactError> {
    space.check(u)?;
    let target = BitSet::full(space.order());
    let candidates: Vec<BitSet> = (0..space.order()).map(|k| space.translate(k, u)).collect();
    Ok(setcover::solve(
        &CoverProblem {
            target: &target,
            candidates: &candidates,
        },
        cap,
        budget,
    ))
}

/// Everything needed to re-check one run of the index-bound pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BoundAudit {
    pub K: String,
    pub A: BitSet,
    pub B: BitSet,
    /// Translate with `E = A ∩ k0·B⁻¹`.
    pub k0: String,
    pub E: BitSet,
    #[serde(with = "ratio_str")]
    pub m_E: Ratio<u64>,
    /// `{k : A ∩ k·B⁻¹ ≠ ∅}`.
    pub U: BitSet,
    pub picks: Vec<String>,
    pub F: BitSet,
    /// `⌊1/(m(A)·m(B))⌋`.
    pub bound: u64,
    pub passed: bool,
}

/// Runs best translate, correlation set and greedy cover for `A` and `B⁻¹`,
/// then checks `F·U = K` and `|F| ≤ ⌊1/(m(A)m(B))⌋` by direct enumeration.
///
/// Greedy runs on `U·k0⁻¹`, which contains `E·E⁻¹`; any cover of `K` by its
/// left translates also covers `K` by left translates of `U`.
pub fn theorem2_bound_check(space: &FiniteGroupSpace, a: &BitSet, b: &BitSet) -> Result<BoundAudit, CompactError> {
    space.check(a)?;
    space.check(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(CompactError::EmptySet);
    }
    let b_inv = space.inverse_set(b);
    let t = best_translate(space, a, &b_inv)?;
    let u = correlation_set(space, a, &b_inv)?;
    let shifted = space.translate_right(&u, space.inv(t.k));
    let greedy = greedy_syndetic_cover(space, &shifted, &t.overlap)?;
    let product = space.measure(a) * space.measure(b);
    let bound = (product.recip()).to_integer();
    let passed = space.product(&greedy.cover, &u).is_full() && greedy.cover.count() as u64 <= bound;
    Ok(BoundAudit {
        K: space.describe(),
        A: a.clone(),
        B: b.clone(),
        k0: space.label(t.k).to_string(),
        E: t.overlap,
        m_E: t.measure,
        U: u,
        picks: greedy.picks.iter().map(|&k| space.label(k).to_string()).collect(),
        F: greedy.cover,
        bound,
        passed,
    })
}

/// Serialises a ratio as `"p/q"`.
pub mod ratio_str {
    use num_rational::Ratio;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u64>, D::Error> {
        let s = String::deserialize(d)?;
        let (p, q) = s.split_once('/').unwrap_or((&s, "1"));
        let p: u64 = p.trim().parse().map_err(D::Error::custom)?;
        let q: u64 = q.trim().parse().map_err(D::Error::custom)?;
        if q == 0 {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Ratio::new(p, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(n: u64) -> FiniteGroupSpace {
        FiniteGroupSpace::cyclic(&[n]).unwrap()
    }

    fn set(k: &FiniteGroupSpace, v: &[usize]) -> BitSet {
        k.subset(v.iter().copied())
    }

    fn idx(s: &BitSet) -> Vec<usize> {
        s.iter().collect()
    }

    #[test]
    fn cyclic_indices_follow_residues() {
        let k = z(6);
        assert_eq!(k.label(5), "5");
        assert_eq!(k.mul(4, 5), 3);
        assert_eq!(k.inv(2), 4);
        let k2 = FiniteGroupSpace::cyclic(&[2, 3]).unwrap();
        assert_eq!(k2.order(), 6);
        assert_eq!(k2.label(k2.identity()), "0,0");
        assert_eq!(k2.index_of(&GroupElement::Residues(vec![1, 2])), Some(5));
    }

    #[test]
    fn best_translate_examples() {
        let k = z(4);
        let t = best_translate(&k, &set(&k, &[0, 1]), &set(&k, &[0, 1])).unwrap();
        assert_eq!((t.k, t.measure), (0, Ratio::new(1, 2)));
        let t = best_translate(&k, &set(&k, &[0, 1]), &set(&k, &[0, 2])).unwrap();
        assert_eq!(t.measure, Ratio::new(1, 4));
        let d = set(&k, &[1, 3]);
        let t = best_translate(&k, &BitSet::full(4), &d).unwrap();
        assert_eq!(t.measure, k.measure(&d));
        assert!(matches!(best_translate(&k, &BitSet::new(4), &d), Err(CompactError::EmptySet)));
    }

    #[test]
    fn correlation_examples() {
        let k = z(4);
        assert_eq!(idx(&correlation_set(&k, &set(&k, &[0, 1]), &set(&k, &[0])).unwrap()), [0, 1]);
        assert!(correlation_set(&k, &BitSet::new(4), &set(&k, &[0])).unwrap().is_empty());
        assert!(correlation_set(&k, &set(&k, &[2]), &BitSet::full(4)).unwrap().is_full());
    }

    #[test]
    fn greedy_examples() {
        let k = z(6);
        let (a, b) = (set(&k, &[0, 1, 2]), set(&k, &[0, 1]));
        let t = best_translate(&k, &a, &b).unwrap();
        assert_eq!(idx(&t.overlap), [0, 1]);
        let u = correlation_set(&k, &a, &b).unwrap();
        assert_eq!(idx(&u), [0, 1, 2, 5]);
        let g = greedy_syndetic_cover(&k, &u, &t.overlap).unwrap();
        assert_eq!(g.picks, [3]);
        assert_eq!(idx(&g.cover), [0, 3]);
        assert!(k.product(&g.cover, &u).is_full());
        assert_eq!(g.bound, 3);

        let full = greedy_syndetic_cover(&k, &BitSet::full(6), &set(&k, &[0])).unwrap();
        assert_eq!(idx(&full.cover), [0]);

        let k2 = z(2);
        let g = greedy_syndetic_cover(&k2, &set(&k2, &[0]), &set(&k2, &[0])).unwrap();
        assert_eq!((idx(&g.cover), g.bound), (vec![0, 1], 2));
    }

    #[test]
    fn hypothesis_violation_names_witness() {
        let k = z(6);
        let err = greedy_syndetic_cover(&k, &set(&k, &[0, 1]), &set(&k, &[0, 1])).unwrap_err();
        match err {
            CompactError::HypothesisViolated { witness } => assert_eq!(witness, "5"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn exact_examples() {
        let k = z(6);
        let u = set(&k, &[0, 1, 2, 5]);
        let s = exact_min_cover(&k, &u, 6, setcover::DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(s.optimal().unwrap().len(), 2);
        let s = exact_min_cover(&k, &BitSet::full(6), 6, 1000).unwrap();
        assert_eq!(s.optimal().unwrap().len(), 1);
        let k7 = z(7);
        let s = exact_min_cover(&k7, &set(&k7, &[0]), 7, 1000).unwrap();
        assert_eq!(s.optimal().unwrap().len(), 7);
    }

    #[test]
    fn bound_pipeline_examples() {
        let k = z(12);
        let evens = k.subset((0..12).step_by(2));
        let audit = theorem2_bound_check(&k, &evens, &set(&k, &[0, 1, 2, 3])).unwrap();
        assert_eq!(audit.bound, 6);
        assert!(audit.passed && audit.F.count() <= 6);
        assert!(k.product(&audit.F, &audit.U).is_full());

        let full = theorem2_bound_check(&k, &BitSet::full(12), &BitSet::full(12)).unwrap();
        assert_eq!((full.F.count(), full.bound), (1, 1));

        let k4 = z(4);
        let half = set(&k4, &[0, 1]);
        let audit = theorem2_bound_check(&k4, &half, &half).unwrap();
        assert_eq!(audit.bound, 4);
        assert!(audit.passed && audit.F.count() <= 4);
    }

    #[test]
    fn audit_json_round_trip() {
        let k = z(12);
        let audit = theorem2_bound_check(&k, &k.subset((0..12).step_by(2)), &set(&k, &[0, 1, 2, 3])).unwrap();
        let json = serde_json::to_value(&audit).unwrap();
        for key in ["K", "A", "B", "E", "m_E", "U", "picks", "F", "bound", "passed"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["A"]["hex"], "5505");
        let back: BoundAudit = serde_json::from_value(json).unwrap();
        assert_eq!(back, audit);
    }

    #[test]
    fn nonabelian_table() {
        // S3 as permutations of {0,1,2}, listed lexicographically
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let pos = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| perms.iter().map(|q| pos([p[q[0]], p[q[1]], p[q[2]]])).collect())
            .collect();
        let k = FiniteGroupSpace::from_table(table).unwrap();
        let a = set(&k, &[0, 1, 3]);
        let b = set(&k, &[1, 4]);
        let audit = theorem2_bound_check(&k, &a, &b).unwrap();
        assert!(audit.passed, "{audit:?}");
        assert!(FiniteGroupSpace::from_table(vec![vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn averaging_bound_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..=64u64);
            let k = z(n);
            let c = k.subset((0..n as usize).filter(|_| rng.gen_bool(0.3)));
            let d = k.subset((0..n as usize).filter(|_| rng.gen_bool(0.3)));
            if c.is_empty() || d.is_empty() {
                continue;
            }
            let t = best_translate(&k, &c, &d).unwrap();
            assert!(t.measure >= k.measure(&c) * k.measure(&d));
            let u = correlation_set(&k, &c, &d).unwrap();
            assert_eq!(u.contains(0), c.intersects(&d));
        }
    }
}
