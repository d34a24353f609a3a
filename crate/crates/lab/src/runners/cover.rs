use std::collections::BTreeMap;

use anyhow::{bail, ensure, Result};
use serde_json::json;

use prodset_core::bitset::BitSet;
use prodset_core::compact::{best_translate, correlation_set, exact_min_cover, greedy_syndetic_cover, FiniteGroupSpace};
use prodset_core::setcover::CoverOutcome;

use super::{random_subset, RunOptions};
use crate::config::{CoverFixture, ExperimentConfig};
use crate::record::{ResultRecord, Status, TrialOutcome};
use crate::trials::{run_indexed, trial_rng};

const OP: &str = "compact::greedy_syndetic_cover + compact::exact_min_cover";

pub fn run_cover_greedy(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let sec = cfg.cover.clone().unwrap_or_default();
    let groups = if sec.moduli.is_empty() {
        vec![cfg.default_moduli()?.unwrap_or_else(|| vec![64])]
    } else {
        sec.moduli.clone()
    };
    let spaces = groups
        .iter()
        .map(|m| FiniteGroupSpace::cyclic(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut trials = sec
        .fixtures
        .iter()
        .map(|f| fixture_trial(f, sec.node_budget))
        .collect::<Result<Vec<_>>>()?;
    let per_group = sec.trials;
    trials.extend(run_indexed(per_group * spaces.len() as u64, opts.jobs, |t| {
        let space = &spaces[(t / per_group.max(1)) as usize];
        let mut rng = trial_rng(opts.seed, t);
        let a = random_subset(&mut rng, space.order(), sec.min_measure, sec.max_measure);
        let b = random_subset(&mut rng, space.order(), sec.min_measure, sec.max_measure);
        let (u, e) = derived(space, &a, &b);
        compare(space, &u, &e, "random", sec.node_budget)
    }));
    let mut rec = ResultRecord::assemble(&cfg.experiment, "cover-greedy", opts.seed, json!({"groups": groups, "section": sec}), trials);
    let mut histogram: BTreeMap<i64, usize> = BTreeMap::new();
    for t in &rec.trials {
        if let Some(g) = t.metrics.get("gap").and_then(|g| g.as_i64()) {
            *histogram.entry(g).or_default() += 1;
        }
    }
    rec.stat("gap_histogram", histogram.iter().map(|(g, c)| json!({"gap": g, "count": c})).collect::<Vec<_>>());
    rec.tables.push(crate::record::Table {
        name: "gap_histogram".into(),
        columns: vec!["gap".into(), "count".into()],
        rows: histogram.iter().map(|(g, c)| vec![json!(g), json!(c)]).collect(),
    });
    Ok(rec)
}

/// `U = A·B⁻¹` shifted so that it contains `E·E⁻¹`, with `E` the best overlap.
fn derived(space: &FiniteGroupSpace, a: &BitSet, b: &BitSet) -> (BitSet, BitSet) {
    let t = best_translate(space, a, b).expect("nonempty sets");
    let u = correlation_set(space, a, b).expect("same group");
    (space.translate_right(&u, space.inv(t.k)), t.overlap)
}

fn fixture_trial(f: &CoverFixture, budget: u64) -> Result<TrialOutcome> {
    let space = FiniteGroupSpace::cyclic(&f.moduli)?;
    let n = space.order();
    let set = |v: &Vec<usize>| -> Result<BitSet> {
        ensure!(v.iter().all(|&i| i < n), "fixture index outside a group of order {n}");
        Ok(BitSet::from_indices(n, v.iter().copied()))
    };
    let (u, e) = match (&f.u, &f.e, &f.a, &f.b) {
        (Some(u), Some(e), None, None) => (set(u)?, set(e)?),
        (None, None, Some(a), Some(b)) => {
            let (a, b) = (set(a)?, set(b)?);
            ensure!(!a.is_empty() && !b.is_empty(), "empty fixture set");
            derived(&space, &a, &b)
        }
        _ => bail!("a cover fixture gives either u and e, or a and b"),
    };
    Ok(compare(&space, &u, &e, "fixture", budget))
}

pub(crate) fn compare(space: &FiniteGroupSpace, u: &BitSet, e: &BitSet, label: &str, budget: u64) -> TrialOutcome {
    let inputs = json!({"K": space.describe(), "U": u.to_hex(), "E": e.to_hex()});
    let mut t = TrialOutcome::new(label, OP, inputs);
    let greedy = match greedy_syndetic_cover(space, u, e) {
        Ok(g) => g,
        Err(err) => {
            t.status = Status::Violation;
            t.note = Some(err.to_string());
            return t;
        }
    };
    let covers = space.product(&greedy.cover, u).is_full();
    t.ratio("m_U", space.measure(u))
        .ratio("m_E", space.measure(e))
        .metric("order", space.order())
        .metric("greedy", greedy.size())
        .metric("bound", greedy.bound)
        .metric("picks", &greedy.picks);
    let bound_ok = covers && greedy.size() as u64 <= greedy.bound;
    match exact_min_cover(space, u, space.order(), budget) {
        Ok(CoverOutcome::Optimal { picks }) => {
            let gap = greedy.size() as i64 - picks.len() as i64;
            t.metric("exact", picks.len()).metric("gap", gap);
            t.status = if bound_ok && gap >= 0 { Status::Pass } else { Status::Violation };
        }
        Ok(CoverOutcome::Undetermined { lower_bound, .. }) => {
            t.metric("exact_lower_bound", lower_bound);
            t.note = Some(format!("exact search stopped after {budget} nodes"));
            t.status = if bound_ok { Status::Undetermined } else { Status::Violation };
        }
        Ok(other) => {
            t.status = Status::Violation;
            t.note = Some(format!("unexpected exact outcome {other:?}"));
        }
        Err(err) => {
            t.status = Status::Violation;
            t.note = Some(err.to_string());
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fixtures() {
        let cfg = ExperimentConfig::parse("experiment = \"c\"\n[cover]\nmoduli = [[12]]\ntrials = 20\n").unwrap();
        let rec = run_cover_greedy(&cfg, RunOptions { seed: 0, jobs: 1 }).unwrap();
        let z6 = &rec.trials[0];
        assert_eq!(z6.status, Status::Pass);
        assert_eq!((z6.metrics["greedy"].clone(), z6.metrics["exact"].clone()), (json!(2), json!(2)));
        assert_eq!(z6.metrics["picks"], json!([3]));
        let full = &rec.trials[1];
        assert_eq!((full.metrics["greedy"].clone(), full.metrics["exact"].clone()), (json!(1), json!(1)));
        assert_eq!(rec.aggregate.passed, 22);
        assert!(rec.aggregate.stats.contains_key("gap_histogram"));
    }
}
