use anyhow::{ensure, Result};
use serde_json::json;

use prodset_core::bitset::BitSet;
use prodset_core::compact::{theorem2_bound_check, FiniteGroupSpace};

use super::{random_subset, RunOptions};
use crate::config::{ExperimentConfig, SubsetFixture};
use crate::record::{ResultRecord, Status, TrialOutcome};
use crate::trials::{run_indexed, trial_rng};

const OP: &str = "compact::theorem2_bound_check";

pub fn run_thm2_bound(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let sec = cfg.thm2.clone().unwrap_or_default();
    let groups = if sec.moduli.is_empty() {
        vec![cfg.default_moduli()?.unwrap_or_else(|| vec![256])]
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
        .map(fixture_trial)
        .collect::<Result<Vec<_>>>()?;
    let per_group = sec.trials;
    trials.extend(run_indexed(per_group * spaces.len() as u64, opts.jobs, |t| {
        let space = &spaces[(t / per_group.max(1)) as usize];
        let mut rng = trial_rng(opts.seed, t);
        let a = random_subset(&mut rng, space.order(), sec.min_measure, sec.max_measure);
        let b = random_subset(&mut rng, space.order(), sec.min_measure, sec.max_measure);
        check(space, &a, &b, "random", sec.full_audit)
    }));
    let mut rec = ResultRecord::assemble(&cfg.experiment, "thm2-bound", opts.seed, json!({"groups": groups, "section": sec}), trials);
    let ratios: Vec<f64> = rec
        .trials
        .iter()
        .filter_map(|t| Some(t.metrics.get("F_size")?.as_f64()? / t.metrics.get("bound")?.as_f64()?))
        .collect();
    if !ratios.is_empty() {
        rec.stat("max_size_over_bound", ratios.iter().cloned().fold(0.0, f64::max));
        rec.stat("mean_size_over_bound", ratios.iter().sum::<f64>() / ratios.len() as f64);
    }
    Ok(rec)
}

fn fixture_trial(f: &SubsetFixture) -> Result<TrialOutcome> {
    let space = FiniteGroupSpace::cyclic(&f.moduli)?;
    let n = space.order();
    ensure!(f.a.iter().chain(&f.b).all(|&i| i < n), "fixture index outside a group of order {n}");
    let a = BitSet::from_indices(n, f.a.iter().copied());
    let b = BitSet::from_indices(n, f.b.iter().copied());
    Ok(check(&space, &a, &b, "fixture", true))
}

pub(crate) fn check(space: &FiniteGroupSpace, a: &BitSet, b: &BitSet, label: &str, full: bool) -> TrialOutcome {
    let inputs = json!({"K": space.describe(), "A": a.to_hex(), "B": b.to_hex()});
    let mut t = TrialOutcome::new(label, OP, inputs);
    match theorem2_bound_check(space, a, b) {
        Ok(audit) => {
            let product = space.measure(a) * space.measure(b);
            let overlap_ok = audit.m_E >= product;
            t.ratio("m_A", space.measure(a))
                .ratio("m_B", space.measure(b))
                .ratio("m_E", audit.m_E)
                .metric("order", space.order())
                .metric("k0", &audit.k0)
                .metric("overlap_bound", overlap_ok)
                .metric("F_size", audit.F.count())
                .metric("bound", audit.bound);
            t.status = if audit.passed && overlap_ok {
                Status::Pass
            } else {
                Status::Violation
            };
            if full || t.status != Status::Pass {
                t.detail = Some(json!(audit));
            }
        }
        Err(e) => {
            // a failed hypothesis or ledger check is a broken bound, not a budget issue
            t.status = Status::Violation;
            t.note = Some(e.to_string());
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_and_small_sweep() {
        let cfg = ExperimentConfig::parse("experiment = \"t\"\n[thm2]\nmoduli = [[16], [4, 6]]\ntrials = 30\n").unwrap();
        let rec = run_thm2_bound(&cfg, RunOptions { seed: 3, jobs: 2 }).unwrap();
        assert_eq!(rec.aggregate.trials, 62);
        assert_eq!(rec.aggregate.passed, 62);
        let z12 = &rec.trials[0];
        assert_eq!(z12.metrics["bound"], json!(6));
        assert!(z12.detail.is_some());
        assert!(rec.trials[5].detail.is_none());
        let k = &rec.trials[1];
        assert_eq!((k.metrics["F_size"].clone(), k.metrics["bound"].clone()), (json!(1), json!(1)));
    }
}
