//! Exact structural checks with no tunable bound: sumsets of dense periodic
//! sets, interval sums, the free-group identities and matrix-coefficient
//! means. `selftest` bundles all four.

use anyhow::Result;
use nalgebra::DVector;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::Rng;
use serde_json::json;

use prodset_core::group::{enumerate_ball, GroupDescriptor, GroupElement};
use prodset_core::measure::{matrix_coefficient_mean, UnitaryRep};
use prodset_core::setcalc::{difference_set, interval_sum, periodic_product, product_set, FiniteWindowSet, PeriodicIntSet};

use super::RunOptions;
use crate::config::{ExperimentConfig, StructureConfig};
use crate::record::{ResultRecord, Status, TrialOutcome};
use crate::trials::{run_indexed, trial_rng};

const COEFFICIENT_TOL: f64 = 1e-10;

fn structure(cfg: &ExperimentConfig) -> StructureConfig {
    cfg.selftest.clone().unwrap_or_default().structure
}

fn random_periodic(rng: &mut impl Rng, max_m: u64, count: impl Fn(u64) -> std::ops::RangeInclusive<u64>) -> PeriodicIntSet {
    let m = rng.gen_range(1..=max_m.max(1));
    let r = rng.gen_range(count(m));
    let residues = sample(rng, m as usize, r as usize).into_iter().map(|i| i as u64);
    PeriodicIntSet::new(m, residues).expect("residues below modulus")
}

pub fn run_pigeonhole(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let sec = structure(cfg);
    let max_m = sec.max_modulus.max(2);
    let trials = run_indexed(sec.pigeonhole_trials, opts.jobs, |t| {
        let mut rng = trial_rng(opts.seed, t);
        // redraw until the densities sum past one
        let (a, b) = loop {
            let a = random_periodic(&mut rng, max_m, |m| 1..=m);
            let b = random_periodic(&mut rng, max_m, |m| 1..=m);
            if a.density() + b.density() > Ratio::from_integer(1) {
                break (a, b);
            }
        };
        let sum = periodic_product(&a, &b);
        // every n is a + b with a in A: check one common period directly
        let period = (a.modulus() * b.modulus()) as i64;
        let brute = (0..period).all(|n| (0..period).any(|x| a.contains(x) && b.contains(n - x)));
        let mut o = TrialOutcome::new(
            "pigeonhole",
            "setcalc::periodic_product + brute-force sumset",
            json!({"A": a.to_string(), "B": b.to_string()}),
        );
        let d = a.density() + b.density();
        o.ratio("density_sum", Ratio::new(*d.numer(), *d.denom()))
            .metric("sum", sum.to_string())
            .metric("brute_force_everything", brute);
        o.with_status(if sum.is_everything() && brute { Status::Pass } else { Status::Violation })
    });
    Ok(ResultRecord::assemble(&cfg.experiment, "selftest", opts.seed, json!(sec), trials))
}

/// Length of the longest run of consecutive non-residues, cyclically.
fn longest_gap(a: &PeriodicIntSet) -> u64 {
    let m = a.modulus();
    let res: Vec<u64> = a.residues().collect();
    (0..res.len())
        .map(|i| (res[(i + 1) % res.len()] + m - res[i] - 1) % m)
        .max()
        .unwrap_or(0)
}

pub fn run_ergodicity(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let sec = structure(cfg);
    let trials = run_indexed(sec.ergodicity_trials, opts.jobs, |t| {
        let mut rng = trial_rng(opts.seed, t);
        let a = random_periodic(&mut rng, sec.max_modulus, |m| 1..=m);
        let m = a.modulus();
        let reached = (0..=m).find(|&j| interval_sum(&a, j).is_everything());
        let gap = longest_gap(&a);
        let mut o = TrialOutcome::new(
            "ergodicity",
            "setcalc::interval_sum + longest residue gap",
            json!({"A": a.to_string()}),
        );
        o.ratio("density", a.density())
            .metric("j", reached)
            .metric("longest_gap", gap);
        let ok = reached.is_some_and(|j| j <= m && j == gap);
        o.with_status(if ok { Status::Pass } else { Status::Violation })
    });
    Ok(ResultRecord::assemble(&cfg.experiment, "selftest", opts.seed, json!(sec), trials))
}

pub fn run_free_structure(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let trials = vec![three_generator()?, paradoxical_cover()?, disjoint_translates()?];
    Ok(ResultRecord::assemble(&cfg.experiment, "selftest", opts.seed, json!({}), trials))
}

/// `⋂_{x ∈ {a,b,c}} A_x A_x⁻¹ = {e}` inside Ball(3) of `F_3`, where `A_x` is
/// the words starting with `x`.
fn three_generator() -> Result<TrialOutcome> {
    let f3 = GroupDescriptor::free(3)?;
    let data = enumerate_ball(&f3, 4)?;
    let out = enumerate_ball(&f3, 3)?;
    let mut meet: Option<FiniteWindowSet> = None;
    let mut sizes = Vec::new();
    for l in 1..=3 {
        let d = difference_set(&FiniteWindowSet::first_letter(&data, &[l]), &out)?.set;
        sizes.push(d.len());
        meet = Some(match meet {
            None => d,
            Some(m) => m.intersection(&d),
        });
    }
    let meet = meet.expect("three letters");
    // a cancelled word u·v⁻¹ keeps the letters of u and v past their common
    // prefix, so two distinct first letters survive unless u = v
    let brute = out.iter().filter(|g| {
        (1..=3).all(|l| {
            data.iter().any(|u| {
                u.as_word().unwrap().first() == Some(l) && {
                    let v = f3.mul_unchecked(&f3.inv(g), u);
                    v.as_word().unwrap().first() == Some(l) && data.contains(&v)
                }
            })
        })
    });
    let brute: Vec<&GroupElement> = brute.collect();
    let mut o = TrialOutcome::new(
        "three-generator",
        "setcalc::difference_set (window Ball(4) into Ball(3)) + brute-force",
        json!({"group": "kind=free,rank=3", "data_radius": 4, "radius": 3}),
    );
    o.metric("difference_sizes", &sizes)
        .metric("intersection", meet.elements().iter().map(|g| g.to_string()).collect::<Vec<_>>())
        .metric("brute_force", brute.iter().map(|g| g.to_string()).collect::<Vec<_>>());
    let ok = meet.elements() == [f3.identity()] && brute == [&f3.identity()];
    Ok(o.with_status(if ok { Status::Pass } else { Status::Violation }))
}

/// `A ∪ aA ∪ a⁻¹A` covers Ball(6) of `F_2` for `A` the words starting with `a^{±1}`.
fn paradoxical_cover() -> Result<TrialOutcome> {
    let f2 = GroupDescriptor::free(2)?;
    let window = enumerate_ball(&f2, 7)?;
    let target = enumerate_ball(&f2, 6)?;
    let a = FiniteWindowSet::first_letter(&window, &[1, -1]);
    let f = FiniteWindowSet::new(&window, [GroupElement::word("e")?, GroupElement::word("a")?, GroupElement::word("A")?])?;
    let fa = product_set(&f, &a, &target)?.set;
    let mut o = TrialOutcome::new(
        "paradoxical-cover",
        "setcalc::product_set ({e,a,A}·A into Ball(6))",
        json!({"group": "kind=free,rank=2", "radius": 6, "F": ["e", "a", "A"]}),
    );
    o.metric("covered", fa.len()).metric("ball", target.len());
    Ok(o.with_status(if fa.len() == target.len() { Status::Pass } else { Status::Violation }))
}

/// `b·A, …, b⁵·A` are pairwise disjoint inside Ball(6).
fn disjoint_translates() -> Result<TrialOutcome> {
    let f2 = GroupDescriptor::free(2)?;
    let ball6 = enumerate_ball(&f2, 6)?;
    let big = enumerate_ball(&f2, 11)?;
    let a = FiniteWindowSet::first_letter(&big, &[1, -1]);
    let mut translates = Vec::new();
    for m in 1..=5 {
        let bm = FiniteWindowSet::new(&big, [GroupElement::word(&"b".repeat(m))?])?;
        translates.push(product_set(&bm, &a, &ball6)?.set);
    }
    let mut overlaps = 0;
    for i in 0..translates.len() {
        for j in i + 1..translates.len() {
            overlaps += translates[i].intersection(&translates[j]).len();
        }
    }
    let mut o = TrialOutcome::new(
        "disjoint-translates",
        "setcalc::product_set + FiniteWindowSet::intersection",
        json!({"group": "kind=free,rank=2", "radius": 6, "data_radius": 11, "powers": [1, 2, 3, 4, 5]}),
    );
    o.metric("sizes", translates.iter().map(|t| t.len()).collect::<Vec<_>>())
        .metric("overlaps", overlaps);
    let ok = overlaps == 0 && translates.iter().all(|t| !t.is_empty());
    Ok(o.with_status(if ok { Status::Pass } else { Status::Violation }))
}

const REP_GROUPS: [&[u64]; 4] = [&[4], &[3, 2], &[2, 2, 2], &[5]];

pub fn run_matrix_means(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let sec = structure(cfg);
    let trials = run_indexed(sec.representation_trials, opts.jobs, |t| -> Result<TrialOutcome> {
        let mut rng = trial_rng(opts.seed, t);
        let moduli = REP_GROUPS[t as usize % REP_GROUPS.len()];
        let desc = GroupDescriptor::cyclic(moduli)?;
        let dim = 1 + t as usize % 4;
        let rep = UnitaryRep::random(&desc, dim, 0.4, &mut rng)?;
        let mut vector = || DVector::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (x, y) = (vector(), vector());
        let mean = matrix_coefficient_mean(&rep, &x, &y)?;
        let mut o = TrialOutcome::new(
            "matrix-mean",
            "measure::matrix_coefficient_mean (group average vs fixed-space projection)",
            json!({"group": desc.to_string(), "dim": dim, "trial_seed": opts.seed, "stream": t}),
        );
        o.metric("averaged", [mean.averaged.re, mean.averaged.im])
            .metric("projected", [mean.projected.re, mean.projected.im])
            .metric("discrepancy", mean.discrepancy())
            .metric("fixed_dim", rep.fixed_basis().len());
        let ok = mean.discrepancy() < COEFFICIENT_TOL;
        Ok(o.with_status(if ok { Status::Pass } else { Status::Violation }))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut rec = ResultRecord::assemble(&cfg.experiment, "selftest", opts.seed, json!(sec), trials);
    let worst = rec
        .trials
        .iter()
        .filter_map(|t| t.metrics.get("discrepancy")?.as_f64())
        .fold(0.0, f64::max);
    rec.stat("max_discrepancy", worst);
    Ok(rec)
}

/// All structural checks in one record, labels prefixed by check.
pub fn run_selftest(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let parts = [
        run_pigeonhole(cfg, opts)?,
        run_ergodicity(cfg, opts)?,
        run_free_structure(cfg, opts)?,
        run_matrix_means(cfg, opts)?,
    ];
    let mut trials = Vec::new();
    for p in parts {
        trials.extend(p.trials);
    }
    Ok(ResultRecord::assemble(
        &cfg.experiment,
        "selftest",
        opts.seed,
        json!(structure(cfg)),
        trials,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::parse(
            "experiment = \"s\"\n[selftest.structure]\npigeonhole_trials = 20\nergodicity_trials = 20\nrepresentation_trials = 8\n",
        )
        .unwrap()
    }

    #[test]
    fn longest_gap_by_hand() {
        assert_eq!(longest_gap(&"mod=10;residues=0,1,5".parse().unwrap()), 4);
        assert_eq!(longest_gap(&PeriodicIntSet::integers()), 0);
    }

    #[test]
    fn quick_selftest_passes() {
        let rec = run_selftest(&cfg(), RunOptions { seed: 1, jobs: 3 }).unwrap();
        assert_eq!(rec.aggregate.trials, 20 + 20 + 3 + 8);
        assert_eq!(rec.aggregate.passed, rec.aggregate.trials, "{:#?}", rec.trials);
    }
}
