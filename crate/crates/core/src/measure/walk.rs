//! Density estimators along random walks and Følner windows.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::{PowerOptions, Powers, SparseMeasure};
use super::MeasureError;
use crate::group::{GroupDescriptor, GroupElement, Letter, Word};
use crate::setcalc::Membership;

/// One row of a walk table: `μ^{*k}(A)`, the running Cesàro mean, and the
/// mass pruned so far.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkRow {
    pub k: u32,
    pub mass_in_a: f64,
    pub cesaro_avg: f64,
    pub pruned_mass: f64,
}

fn cesaro_rows(masses: impl IntoIterator<Item = (f64, f64)>) -> Vec<WalkRow> {
    let mut sum = 0.0;
    masses
        .into_iter()
        .enumerate()
        .map(|(i, (mass, pruned))| {
            sum += mass;
            WalkRow {
                k: i as u32 + 1,
                mass_in_a: mass,
                cesaro_avg: sum / (i + 1) as f64,
                pruned_mass: pruned,
            }
        })
        .collect()
}

/// `(1/n) Σ_{k=1..n} μ^{*k}(A)` by explicit convolution powers; one row per `k`.
///
/// With pruning each row is a lower bound, short of the truth by at most its
/// `pruned_mass`.
pub fn cesaro_walk_density(
    mu: &SparseMeasure,
    a: impl Fn(&GroupElement) -> bool,
    n: u32,
    opts: PowerOptions,
) -> Result<Vec<WalkRow>, MeasureError> {
    if n == 0 {
        return Err(MeasureError::ZeroPower);
    }
    if !mu.is_symmetric(1e-15) {
        return Err(MeasureError::NotSymmetric);
    }
    let mut masses = Vec::with_capacity(n as usize);
    for p in Powers::new(mu, opts)?.take(n as usize) {
        let p = p?;
        masses.push((p.measure.measure_of(&a), p.pruned_mass));
    }
    Ok(cesaro_rows(masses))
}

/// Lumped state of a simple random walk on `F_k` relative to prefixes of
/// length at most `depth`: the full word while short, else its first
/// `depth` letters and its length.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum PrefixState {
    Short(Vec<Letter>),
    Long(Vec<Letter>, u32),
}

/// Cesàro table of `μ^{*k}(A)` for the simple random walk on `F_rank`, where
/// `A` is the union of the cylinders `{words beginning with w}`, `w ∈ prefixes`.
///
/// Exact (no pruning): the walk's prefix of bounded length together with its
/// word length is itself a Markov chain, so the state space grows linearly in
/// `k` instead of exponentially.
pub fn cylinder_walk_density(rank: usize, prefixes: &[Word], n: u32) -> Result<Vec<WalkRow>, MeasureError> {
    if n == 0 {
        return Err(MeasureError::ZeroPower);
    }
    if rank < 1 || prefixes.iter().any(|w| w.is_empty() || !w.is_reduced() || w.letters().iter().any(|l| l.unsigned_abs() as usize > rank)) {
        return Err(MeasureError::InvalidCylinder);
    }
    let depth = prefixes.iter().map(Word::len).max().unwrap_or(0).max(1);
    let letters: Vec<Letter> = (1..=rank as Letter).flat_map(|i| [i, -i]).collect();
    let step = 1.0 / letters.len() as f64;
    let in_a = |state: &PrefixState| {
        let w = match state {
            PrefixState::Short(w) | PrefixState::Long(w, _) => w,
        };
        prefixes.iter().any(|p| w.starts_with(p.letters()))
    };

    let mut dist: HashMap<PrefixState, f64> = HashMap::new();
    dist.insert(PrefixState::Short(Vec::new()), 1.0);
    let mut masses = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let mut next: HashMap<PrefixState, f64> = HashMap::with_capacity(dist.len() * 2);
        // deterministic summation order
        let mut states: Vec<(&PrefixState, &f64)> = dist.iter().collect();
        states.sort_by(|a, b| a.0.cmp(b.0));
        for (state, &p) in states {
            match state {
                PrefixState::Short(w) => {
                    for &l in &letters {
                        let mut nw = w.clone();
                        let target = if nw.last() == Some(&-l) {
                            nw.pop();
                            PrefixState::Short(nw)
                        } else if nw.len() < depth {
                            nw.push(l);
                            PrefixState::Short(nw)
                        } else {
                            PrefixState::Long(nw, depth as u32 + 1)
                        };
                        *next.entry(target).or_default() += p * step;
                    }
                }
                PrefixState::Long(u, len) => {
                    let forward = (letters.len() - 1) as f64 * step;
                    *next.entry(PrefixState::Long(u.clone(), len + 1)).or_default() += p * forward;
                    let back = if *len as usize - 1 > depth {
                        PrefixState::Long(u.clone(), len - 1)
                    } else {
                        PrefixState::Short(u.clone())
                    };
                    *next.entry(back).or_default() += p * step;
                }
            }
        }
        dist = next;
        let mut hits: Vec<(&PrefixState, &f64)> = dist.iter().filter(|(s, _)| in_a(s)).collect();
        hits.sort_by(|a, b| a.0.cmp(b.0));
        masses.push((hits.iter().map(|(_, p)| **p).sum(), 0.0));
    }
    Ok(cesaro_rows(masses))
}

/// Per-step Monte-Carlo estimate of `μ^{*k}(A)` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledRow {
    pub k: u32,
    pub mean: f64,
    pub std_err: f64,
    pub cesaro_avg: f64,
    pub cesaro_std_err: f64,
}

/// Samples `walks` independent walks of length `n` driven by `mu`, tracking
/// an arbitrary state: `advance(state, g)` applies one increment `g` (drawn
/// from `mu`) on the right of the accumulated product.
pub fn sampled_walk<S: Clone>(
    mu: &SparseMeasure,
    start: S,
    advance: impl Fn(&S, &GroupElement) -> S,
    in_a: impl Fn(&S) -> bool,
    n: u32,
    walks: u64,
    seed: u64,
) -> Vec<SampledRow> {
    let weights: Vec<f64> = mu.atoms().iter().map(|(_, w)| *w).collect();
    let pick = WeightedIndex::new(&weights).expect("measure has positive atoms");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n as usize;
    let mut hits = vec![0u64; n];
    // per-walk Cesàro means, for the error of the averaged estimate
    let (mut c_sum, mut c_sq) = (vec![0.0f64; n], vec![0.0f64; n]);
    for _ in 0..walks {
        let mut s = start.clone();
        let mut run = 0u64;
        for k in 0..n {
            let g = &mu.atoms()[pick.sample(&mut rng)].0;
            s = advance(&s, g);
            if in_a(&s) {
                hits[k] += 1;
                run += 1;
            }
            let c = run as f64 / (k + 1) as f64;
            c_sum[k] += c;
            c_sq[k] += c * c;
        }
    }
    let w = walks as f64;
    (0..n)
        .map(|k| {
            let p = hits[k] as f64 / w;
            let cm = c_sum[k] / w;
            let cvar = (c_sq[k] / w - cm * cm).max(0.0);
            SampledRow {
                k: k as u32 + 1,
                mean: p,
                std_err: (p * (1.0 - p) / w).sqrt(),
                cesaro_avg: cm,
                cesaro_std_err: (cvar / w).sqrt(),
            }
        })
        .collect()
}

/// Monte-Carlo `μ^{*k}(A)` for a predicate on group elements.
pub fn sampled_walk_density(
    mu: &SparseMeasure,
    a: impl Fn(&GroupElement) -> bool,
    n: u32,
    walks: u64,
    seed: u64,
) -> Vec<SampledRow> {
    let desc = mu.descriptor().clone();
    sampled_walk(mu, desc.identity(), |x, g| desc.mul_unchecked(x, g), a, n, walks, seed)
}

/// Best count of `A` in a translated cube `t + [0,n)^d`, `t ∈ search`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerDensity {
    pub count: u64,
    pub volume: u64,
    pub best_translate: Option<GroupElement>,
}

impl FolnerDensity {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.volume as f64
    }
}

/// `max_t |A ∩ (t + [0,n)^d)| / n^d` over `t ∈ search`. Membership unknown to
/// the set counts as absent.
pub fn folner_upper_density(
    a: &dyn Membership,
    window_len: u64,
    search: &[GroupElement],
) -> Result<FolnerDensity, MeasureError> {
    let dim = match a.descriptor() {
        GroupDescriptor::IntegerLattice { dim } => *dim,
        _ => return Err(MeasureError::DescriptorMismatch),
    };
    if window_len == 0 {
        return Err(MeasureError::ZeroPower);
    }
    let volume = window_len.checked_pow(dim as u32).ok_or(MeasureError::SupportExplosion { cap: usize::MAX })?;
    let mut best = FolnerDensity {
        count: 0,
        volume,
        best_translate: None,
    };
    for t in search {
        let t = t.as_vector().filter(|v| v.len() == dim).ok_or(MeasureError::DescriptorMismatch)?;
        let mut count = 0u64;
        let mut offset = vec![0i64; dim];
        'cube: loop {
            let g = GroupElement::Vector(t.iter().zip(&offset).map(|(a, b)| a + b).collect());
            if a.membership(&g) == Some(true) {
                count += 1;
            }
            for i in (0..dim).rev() {
                offset[i] += 1;
                if (offset[i] as u64) < window_len {
                    continue 'cube;
                }
                offset[i] = 0;
            }
            break;
        }
        if best.best_translate.is_none() || count > best.count {
            best.count = count;
            best.best_translate = Some(GroupElement::Vector(t.to_vec()));
        }
    }
    Ok(best)
}
