//! Thickness, syndeticity and piecewise syndeticity on finite windows and
//! periodic sets.
//!
//! Windowed answers are honest about truncation: a missing witness inside a
//! bounded search is reported as [`Verdict::Undetermined`], never as a
//! refutation. Periodic sets are decided exactly.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{FiniteWindowSet, Membership, PeriodicIntSet};
use crate::bitset::BitSet;
use crate::group::{GroupDescriptor, GroupElement};
use crate::setcover::{self, CoverOutcome, CoverProblem};

#[derive(Clone, Copy, Debug)]
pub enum SetRef<'a> {
    Window(&'a FiniteWindowSet),
    Periodic(&'a PeriodicIntSet),
}

impl<'a> From<&'a FiniteWindowSet> for SetRef<'a> {
    fn from(s: &'a FiniteWindowSet) -> Self {
        SetRef::Window(s)
    }
}

impl<'a> From<&'a PeriodicIntSet> for SetRef<'a> {
    fn from(s: &'a PeriodicIntSet) -> Self {
        SetRef::Periodic(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Witnessed,
    RefutedExactly,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThickReport {
    pub verdict: Verdict,
    pub witness: Option<GroupElement>,
    pub bounded_search: bool,
}

/// First `g` in `search` (in the given order) with `probe·g ⊆ T`, where
/// membership outside the data window counts as unknown.
fn thick_scan(
    desc: &GroupDescriptor,
    member: impl Fn(&GroupElement) -> Option<bool>,
    probe: &[GroupElement],
    search: &[GroupElement],
) -> Option<GroupElement> {
    search
        .iter()
        .find(|g| probe.iter().all(|p| member(&desc.mul_unchecked(p, g)) == Some(true)))
        .cloned()
}

pub fn is_right_thick<'a>(
    t: impl Into<SetRef<'a>>,
    probe: &[GroupElement],
    search: &[GroupElement],
) -> ThickReport {
    match t.into() {
        SetRef::Periodic(p) => {
            // a periodic set is thick iff it is all of Z
            if p.is_everything() {
                ThickReport {
                    verdict: Verdict::Witnessed,
                    witness: Some(search.first().cloned().unwrap_or(GroupElement::int(0))),
                    bounded_search: false,
                }
            } else {
                ThickReport {
                    verdict: Verdict::RefutedExactly,
                    witness: None,
                    bounded_search: false,
                }
            }
        }
        SetRef::Window(w) => {
            let hit = thick_scan(w.descriptor(), |g| w.membership(g), probe, search);
            ThickReport {
                verdict: if hit.is_some() { Verdict::Witnessed } else { Verdict::Undetermined },
                witness: hit,
                bounded_search: true,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum IndexOutcome {
    /// Minimal covering family (canonical-order least among optima).
    Exact { index: usize, family: Vec<GroupElement> },
    /// No family of at most `max_k` candidates covers the target.
    AboveCap { max_k: usize },
    /// The whole candidate pool leaves `uncovered` uncovered.
    NoCover { uncovered: GroupElement },
    /// Search budget exhausted; the index is at least `lower_bound`.
    Undetermined {
        lower_bound: usize,
        best: Option<Vec<GroupElement>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub outcome: IndexOutcome,
    /// False when the answer holds over the whole group (periodic inputs).
    pub bounded_search: bool,
}

impl IndexReport {
    pub fn index(&self) -> Option<usize> {
        match &self.outcome {
            IndexOutcome::Exact { index, .. } => Some(*index),
            _ => None,
        }
    }

    pub fn family(&self) -> Option<&[GroupElement]> {
        match &self.outcome {
            IndexOutcome::Exact { family, .. } => Some(family),
            _ => None,
        }
    }
}

fn run_cover(
    target: &[GroupElement],
    pool: &[GroupElement],
    covers: impl Fn(&GroupElement, &GroupElement) -> bool,
    max_k: usize,
    budget: u64,
) -> IndexOutcome {
    let universe = BitSet::full(target.len());
    let candidates: Vec<BitSet> = pool
        .iter()
        .map(|f| BitSet::from_indices(target.len(), (0..target.len()).filter(|&i| covers(f, &target[i]))))
        .collect();
    let problem = CoverProblem {
        target: &universe,
        candidates: &candidates,
    };
    let pick = |idx: &[usize]| idx.iter().map(|&i| pool[i].clone()).collect::<Vec<_>>();
    match setcover::solve(&problem, max_k, budget) {
        CoverOutcome::Optimal { picks } => IndexOutcome::Exact {
            index: picks.len(),
            family: pick(&picks),
        },
        CoverOutcome::Infeasible { uncoverable } => IndexOutcome::NoCover {
            uncovered: target[uncoverable].clone(),
        },
        CoverOutcome::AboveCap { .. } => IndexOutcome::AboveCap { max_k },
        CoverOutcome::Undetermined { lower_bound, best } => IndexOutcome::Undetermined {
            lower_bound,
            best: best.map(|b| pick(&b)),
        },
    }
}

/// Least `|F|` with `F·C ⊇ cover_target`, `F ⊆ candidate_pool`, `|F| ≤ max_k`.
///
/// Periodic sets ignore the target and pool: the index over `Z` is computed
/// exactly by covering all residues with translates by `0..m`.
pub fn syndeticity_index<'a>(
    c: impl Into<SetRef<'a>>,
    cover_target: &[GroupElement],
    candidate_pool: &[GroupElement],
    max_k: usize,
) -> IndexReport {
    syndeticity_index_budgeted(c, cover_target, candidate_pool, max_k, setcover::DEFAULT_NODE_BUDGET)
}

pub fn syndeticity_index_budgeted<'a>(
    c: impl Into<SetRef<'a>>,
    cover_target: &[GroupElement],
    candidate_pool: &[GroupElement],
    max_k: usize,
    budget: u64,
) -> IndexReport {
    match c.into() {
        SetRef::Periodic(p) => {
            let m = p.modulus() as i64;
            let residues: Vec<GroupElement> = (0..m).map(GroupElement::int).collect();
            let outcome = run_cover(
                &residues,
                &residues,
                |f, t| p.contains(t.as_int().unwrap() - f.as_int().unwrap()),
                max_k,
                budget,
            );
            IndexReport {
                outcome,
                bounded_search: false,
            }
        }
        SetRef::Window(w) => {
            let desc = w.descriptor();
            let outcome = run_cover(
                cover_target,
                candidate_pool,
                |f, t| w.membership(&desc.mul_unchecked(&desc.inv(f), t)) == Some(true),
                max_k,
                budget,
            );
            IndexReport {
                outcome,
                bounded_search: true,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PwReport {
    pub verdict: Verdict,
    pub family: Option<Vec<GroupElement>>,
    pub witness: Option<GroupElement>,
    pub bounded_search: bool,
    pub families_checked: u64,
}

/// Searches `F ⊆ f_pool`, by increasing size up to `max_f`, such that `F·C`
/// contains `probe·g` for some `g ∈ search`.
///
/// Periodic sets are exact: a nonempty periodic set always has a finite
/// covering family, reported minimal.
pub fn is_piecewise_syndetic<'a>(
    c: impl Into<SetRef<'a>>,
    f_pool: &[GroupElement],
    probe: &[GroupElement],
    search: &[GroupElement],
    max_f: usize,
    family_budget: u64,
) -> PwReport {
    match c.into() {
        SetRef::Periodic(p) => {
            if p.is_empty() {
                return PwReport {
                    verdict: Verdict::RefutedExactly,
                    family: None,
                    witness: None,
                    bounded_search: false,
                    families_checked: 0,
                };
            }
            let report = syndeticity_index(p, &[], &[], p.modulus() as usize);
            PwReport {
                verdict: Verdict::Witnessed,
                family: report.family().map(<[_]>::to_vec),
                witness: Some(GroupElement::int(0)),
                bounded_search: false,
                families_checked: 1,
            }
        }
        SetRef::Window(w) => {
            let desc = w.descriptor();
            let inv_pool: Vec<GroupElement> = f_pool.iter().map(|f| desc.inv(f)).collect();
            let mut checked = 0u64;
            for size in 1..=max_f.min(f_pool.len()) {
                for combo in (0..f_pool.len()).combinations(size) {
                    if checked >= family_budget {
                        return PwReport {
                            verdict: Verdict::Undetermined,
                            family: None,
                            witness: None,
                            bounded_search: true,
                            families_checked: checked,
                        };
                    }
                    checked += 1;
                    let member = |x: &GroupElement| -> Option<bool> {
                        let hit = combo
                            .iter()
                            .any(|&i| w.membership(&desc.mul_unchecked(&inv_pool[i], x)) == Some(true));
                        Some(hit)
                    };
                    if let Some(g) = thick_scan(desc, member, probe, search) {
                        return PwReport {
                            verdict: Verdict::Witnessed,
                            family: Some(combo.iter().map(|&i| f_pool[i].clone()).collect()),
                            witness: Some(g),
                            bounded_search: true,
                            families_checked: checked,
                        };
                    }
                }
            }
            PwReport {
                verdict: Verdict::Undetermined,
                family: None,
                witness: None,
                bounded_search: true,
                families_checked: checked,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_ball;

    fn ints(v: impl IntoIterator<Item = i64>) -> Vec<GroupElement> {
        v.into_iter().map(GroupElement::int).collect()
    }

    #[test]
    fn periodic_thickness_is_exact() {
        let evens = PeriodicIntSet::progression(2, 0);
        let r = is_right_thick(&evens, &ints(0..2), &ints(0..10));
        assert_eq!(r.verdict, Verdict::RefutedExactly);
        assert!(!r.bounded_search);
        let all = PeriodicIntSet::integers();
        assert_eq!(is_right_thick(&all, &ints(0..2), &ints(0..10)).verdict, Verdict::Witnessed);
    }

    #[test]
    fn windowed_thickness_scan() {
        let z = GroupDescriptor::integers();
        let window = enumerate_ball(&z, 100).unwrap();
        let t = FiniteWindowSet::new(&window, ints(40..60)).unwrap();
        let r = is_right_thick(&t, &ints(0..10), &ints(0..100));
        assert_eq!(r.witness, Some(GroupElement::int(40)));
        assert!(r.bounded_search);
        let miss = is_right_thick(&t, &ints(0..30), &ints(0..100));
        assert_eq!(miss.verdict, Verdict::Undetermined);
    }

    #[test]
    fn periodic_index() {
        let s = PeriodicIntSet::progression(3, 0);
        let r = syndeticity_index(&s, &[], &[], 10);
        assert_eq!(r.index(), Some(3));
        assert_eq!(r.family().unwrap(), &ints(0..3)[..]);
        let r = syndeticity_index(&PeriodicIntSet::integers(), &[], &[], 10);
        assert_eq!(r.family().unwrap(), &ints([0])[..]);
        let r = syndeticity_index(&PeriodicIntSet::empty(), &[], &[], 10);
        assert!(matches!(r.outcome, IndexOutcome::NoCover { .. }));
        let r = syndeticity_index(&PeriodicIntSet::progression(5, 1), &[], &[], 3);
        assert_eq!(r.outcome, IndexOutcome::AboveCap { max_k: 3 });
    }

    #[test]
    fn paradoxical_set_index() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let window = enumerate_ball(&f2, 5).unwrap();
        let a = FiniteWindowSet::first_letter(&window, &[1, -1]);
        let target = enumerate_ball(&f2, 4).unwrap();
        let pool = enumerate_ball(&f2, 1).unwrap();
        let r = syndeticity_index(&a, target.elements(), pool.elements(), 5);
        let index = r.index().unwrap();
        assert!(index <= 3);
        // A ∪ a·A is everything: words outside A start with b^±1 or are e,
        // and a·(a⁻¹x) = x covers them
        assert_eq!(index, 2);
        let fam: Vec<String> = r.family().unwrap().iter().map(|g| g.to_string()).collect();
        assert_eq!(fam, ["e", "a"]);
        let e_a_ainv: Vec<GroupElement> = ["e", "a", "A"].iter().map(|s| GroupElement::word(s).unwrap()).collect();
        let r3 = syndeticity_index(&a, target.elements(), &e_a_ainv, 3);
        assert!(r3.index().unwrap() <= 3);
    }

    #[test]
    fn piecewise_syndetic_examples() {
        let evens = PeriodicIntSet::progression(2, 0);
        let r = is_piecewise_syndetic(&evens, &[], &[], &[], 4, 100);
        assert_eq!(r.verdict, Verdict::Witnessed);
        assert_eq!(r.family.unwrap(), ints([0, 1]));
        let s = PeriodicIntSet::new(4, [0, 1]).unwrap();
        let r = is_piecewise_syndetic(&s, &[], &[], &[], 4, 100);
        assert_eq!(r.family.unwrap(), ints([0, 2]));
        assert_eq!(is_piecewise_syndetic(&PeriodicIntSet::empty(), &[], &[], &[], 4, 100).verdict, Verdict::RefutedExactly);
    }

    #[test]
    fn squares_are_not_found_piecewise_syndetic() {
        let z = GroupDescriptor::integers();
        let window = enumerate_ball(&z, 400).unwrap();
        let squares = FiniteWindowSet::new(&window, (0..=20).map(|n| GroupElement::int(n * n))).unwrap();
        let pool = enumerate_ball(&z, 10).unwrap();
        let r = is_piecewise_syndetic(&squares, pool.elements(), &ints(0..10), &ints(0..=390), 2, 1_000_000);
        assert_eq!(r.verdict, Verdict::Undetermined);
        assert!(r.bounded_search);
        assert_eq!(r.families_checked, 21 + 210);
    }

    #[test]
    fn windowed_piecewise_syndetic_witness() {
        let z = GroupDescriptor::integers();
        let window = enumerate_ball(&z, 200).unwrap();
        let evens = FiniteWindowSet::from_predicate(&window, |g| g.as_int().unwrap() % 2 == 0);
        let pool = enumerate_ball(&z, 2).unwrap();
        let r = is_piecewise_syndetic(&evens, pool.elements(), &ints(0..10), &ints(0..100), 2, 10_000);
        assert_eq!(r.verdict, Verdict::Witnessed);
        assert_eq!(r.family.unwrap().len(), 2);
    }
}
