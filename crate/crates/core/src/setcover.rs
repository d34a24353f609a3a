//! Exact minimum set cover by branch and bound.
//!
//! Candidates are indexed in canonical order. The solver reports the
//! lexicographically least optimal selection, so the answer is independent of
//! search order. Exhausting the node budget yields a certified lower bound,
//! never a guessed optimum.

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;

/// Default cap on search nodes per solve.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CoverOutcome {
    /// `picks` is a minimum cover; the least one in lexicographic index order.
    Optimal { picks: Vec<usize> },
    /// Some element is covered by no candidate.
    Infeasible { uncoverable: usize },
    /// Every cover needs more than `cap` candidates (proved exhaustively).
    AboveCap { cap: usize, greedy: Option<Vec<usize>> },
    /// Budget ran out: optimum is at least `lower_bound`; `best` is the smallest cover found.
    Undetermined {
        lower_bound: usize,
        best: Option<Vec<usize>>,
    },
}

impl CoverOutcome {
    pub fn optimal(&self) -> Option<&[usize]> {
        match self {
            CoverOutcome::Optimal { picks } => Some(picks),
            _ => None,
        }
    }
}

pub struct CoverProblem<'a> {
    pub target: &'a BitSet,
    pub candidates: &'a [BitSet],
}

/// Greedy cover: repeatedly take the candidate adding most new elements
/// (lowest index on ties). `None` if the target is not coverable.
pub fn greedy_cover(p: &CoverProblem) -> Option<Vec<usize>> {
    let mut covered = p.target.complement();
    let mut picks = Vec::new();
    while !covered.is_full() {
        let (best, gain) = p
            .candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.count_outside(&covered)))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))?;
        if gain == 0 {
            return None;
        }
        covered.union_with(&p.candidates[best]);
        picks.push(best);
    }
    Some(picks)
}

struct Search<'a> {
    target: &'a BitSet,
    sets: Vec<BitSet>,
    /// for each element, candidate indices (into `sets`) covering it
    coverers: Vec<Vec<usize>>,
    max_size: usize,
    nodes: u64,
    budget: u64,
}

#[derive(Debug, PartialEq, Eq)]
enum Found {
    Yes,
    No,
    OutOfBudget,
}

impl<'a> Search<'a> {
    fn new(target: &'a BitSet, sets: Vec<BitSet>, budget: u64) -> Self {
        let mut coverers = vec![Vec::new(); target.len()];
        for (i, s) in sets.iter().enumerate() {
            for e in s.iter() {
                if target.contains(e) {
                    coverers[e].push(i);
                }
            }
        }
        let max_size = sets.iter().map(|s| s.intersection_count(target)).max().unwrap_or(0);
        Search {
            target,
            sets,
            coverers,
            max_size,
            nodes: 0,
            budget,
        }
    }

    /// Can the uncovered part of the target be covered with `k` more sets,
    /// using only sets with index >= `min_index`?
    fn feasible(&mut self, covered: &BitSet, k: usize, min_index: usize) -> Found {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Found::OutOfBudget;
        }
        let remaining = self.target.count_outside(covered);
        if remaining == 0 {
            return Found::Yes;
        }
        if k == 0 || remaining > k * self.max_size {
            return Found::No;
        }
        // branch on the uncovered element with the fewest usable coverers
        let mut pivot: Option<(usize, usize)> = None;
        for e in self.target.iter() {
            if covered.contains(e) {
                continue;
            }
            let n = self.coverers[e].iter().filter(|&&i| i >= min_index).count();
            if n == 0 {
                return Found::No;
            }
            if pivot.is_none_or(|(_, best)| n < best) {
                pivot = Some((e, n));
            }
        }
        let (e, _) = pivot.expect("uncovered element exists");
        let options: Vec<usize> = self.coverers[e].iter().copied().filter(|&i| i >= min_index).collect();
        let mut out_of_budget = false;
        for i in options {
            let mut next = covered.clone();
            next.union_with(&self.sets[i]);
            match self.feasible(&next, k - 1, min_index) {
                Found::Yes => return Found::Yes,
                Found::OutOfBudget => out_of_budget = true,
                Found::No => {}
            }
            if out_of_budget {
                break;
            }
        }
        if out_of_budget {
            Found::OutOfBudget
        } else {
            Found::No
        }
    }
}

/// Drops candidates whose coverage of the target is contained in another's
/// (the lower index survives among equals).
fn undominated(target: &BitSet, candidates: &[BitSet]) -> Vec<BitSet> {
    let restricted: Vec<BitSet> = candidates
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.intersect_with(target);
            c
        })
        .collect();
    let mut keep = Vec::new();
    'outer: for (i, c) in restricted.iter().enumerate() {
        for (j, d) in restricted.iter().enumerate() {
            if i != j && c.is_subset(d) && (c != d || j < i) {
                continue 'outer;
            }
        }
        keep.push(c.clone());
    }
    keep
}

/// Exact minimum cover with at most `cap` candidates, spending at most `budget` search nodes.
pub fn solve(p: &CoverProblem, cap: usize, budget: u64) -> CoverOutcome {
    if let Some(e) = p.target.iter().find(|&e| !p.candidates.iter().any(|c| c.contains(e))) {
        return CoverOutcome::Infeasible { uncoverable: e };
    }
    let greedy = greedy_cover(p).expect("coverable target");
    if p.target.is_empty() {
        return CoverOutcome::Optimal { picks: Vec::new() };
    }

    // phase 1: optimal size, on the dominance-reduced family
    let reduced = undominated(p.target, p.candidates);
    let mut search = Search::new(p.target, reduced, budget);
    let lower = p.target.count().div_ceil(search.max_size.max(1));
    let empty = BitSet::new(p.target.len());
    let limit = cap.min(greedy.len().saturating_sub(1));
    let mut optimum = None;
    let mut proven_lower = lower;
    for k in lower..=limit {
        match search.feasible(&empty, k, 0) {
            Found::Yes => {
                optimum = Some(k);
                break;
            }
            Found::No => proven_lower = k + 1,
            Found::OutOfBudget => {
                return CoverOutcome::Undetermined {
                    lower_bound: proven_lower,
                    best: Some(greedy),
                }
            }
        }
    }
    let size = match optimum {
        Some(k) => k,
        None if greedy.len() <= cap => greedy.len(),
        None => {
            return CoverOutcome::AboveCap {
                cap,
                greedy: Some(greedy),
            }
        }
    };

    // phase 2: lexicographically least cover of that size, on the full family
    let mut full = Search::new(p.target, p.candidates.to_vec(), budget.saturating_sub(search.nodes));
    let mut picks = Vec::with_capacity(size);
    let mut covered = empty;
    let mut next_min = 0;
    while picks.len() < size && !p.target.is_subset(&covered) {
        let slots = size - picks.len() - 1;
        let mut chosen = None;
        for c in next_min..p.candidates.len() {
            let mut trial = covered.clone();
            trial.union_with(&p.candidates[c]);
            match full.feasible(&trial, slots, c + 1) {
                Found::Yes => {
                    chosen = Some((c, trial));
                    break;
                }
                Found::No => {}
                Found::OutOfBudget => {
                    return CoverOutcome::Undetermined {
                        lower_bound: size,
                        best: Some(greedy),
                    }
                }
            }
        }
        let (c, trial) = chosen.expect("a cover of the optimal size exists");
        picks.push(c);
        covered = trial;
        next_min = c + 1;
    }
    CoverOutcome::Optimal { picks }
}
