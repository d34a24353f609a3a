use anyhow::{ensure, Result};
use serde_json::json;

use prodset_core::circle::{
    refute_syndeticity, return_set, verify_certificate, ArcUnion, CircleError, CircleSystem, Side,
};
use prodset_core::group::{enumerate_ball, GroupDescriptor, Word};

use super::RunOptions;
use crate::config::{CounterexampleConfig, ExperimentConfig};
use crate::record::{ResultRecord, Status, TrialOutcome};
use crate::trials::run_indexed;

/// Sample points per arc for the pointwise recheck of a certificate.
const POINTS_PER_ARC: usize = 64;

pub fn run_counterexample(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let sec = cfg.counterexample.clone().unwrap_or_default();
    ensure!(!sec.radii.is_empty(), "no radii given");
    let system = CircleSystem::new(sec.alpha_p, sec.alpha_q, sec.lambda, sec.x_plus)?;
    let arcs = sec.arc_union(cfg)?;
    ensure!(!arcs.is_empty(), "the arc union is empty");

    let f2 = GroupDescriptor::free(2)?;
    let rs = return_set(&system, &arcs, sec.x, sec.return_radius, sec.delta)?;
    let ball_len = enumerate_ball(&f2, sec.return_radius)?.len();

    let trials = run_indexed(sec.radii.len() as u64, opts.jobs, |i| {
        radius_trial(&system, &arcs, &sec, sec.radii[i as usize])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut rec = ResultRecord::assemble(&cfg.experiment, "counterexample", opts.seed, json!(sec), trials);
    rec.stat("arc_measure", arcs.total_length());
    rec.stat("return_set_size", rs.set.len());
    rec.stat("return_set_ball", ball_len);
    rec.stat("return_set_density", rs.set.len() as f64 / ball_len as f64);
    rec.stat("return_set_ambiguous", rs.ambiguous.len());
    Ok(rec)
}

fn radius_trial(system: &CircleSystem, arcs: &ArcUnion, sec: &CounterexampleConfig, rho: u32) -> Result<TrialOutcome> {
    let f2 = GroupDescriptor::free(2)?;
    let f: Vec<Word> = enumerate_ball(&f2, rho)?
        .iter()
        .map(|g| g.as_word().expect("free group").clone())
        .collect();
    let inputs = json!({
        "radius": rho,
        "F_size": f.len(),
        "alpha": format!("{}/{}", system.alpha_p, system.alpha_q),
        "lambda": system.lambda,
        "x_plus": system.x_plus,
        "arcs": arcs.to_lines(),
        "budget": sec.budget,
        "delta": sec.delta,
    });
    let mut t = TrialOutcome::new(format!("ball-{rho}"), "circle::verify_certificate", inputs);
    t.metric("F_size", f.len());
    match refute_syndeticity(system, &f, arcs, sec.budget, sec.delta) {
        Ok(cert) => {
            let verified = verify_certificate(&cert)?;
            let g: Word = cert.g.parse()?;
            let clean = point_recheck(system, arcs, &f, &g)?;
            t.metric("g", &cert.g)
                .metric("g_length", g.len())
                .metric("certificate_verified", verified)
                .metric("point_recheck", clean);
            t.detail = Some(json!(cert));
            t.status = if verified && clean && !sec.expect_cover {
                Status::Pass
            } else {
                Status::Violation
            };
        }
        Err(CircleError::Covers { total_length }) => {
            t.metric("covered_length", total_length);
            t.status = if sec.expect_cover { Status::Pass } else { Status::Undetermined };
            t.verified_by = "circle::refute_syndeticity (F·A covers)".into();
        }
        Err(CircleError::BudgetExhausted { budget }) => {
            t.metric("budget", budget);
            t.note = Some(format!("no disjoint translate up to length {budget}"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(t)
}

/// `g·y ∉ f·A` for sampled `y ∈ A`, evaluated as `f⁻¹g·y ∉ A` one point at a
/// time. Points within a few ulps of an arc end are skipped.
fn point_recheck(system: &CircleSystem, arcs: &ArcUnion, f: &[Word], g: &Word) -> Result<bool> {
    let moves: Vec<Word> = f.iter().map(|w| w.inverse().mul(g)).collect();
    for arc in arcs.arcs() {
        for i in 1..POINTS_PER_ARC {
            let y = (arc.start + arc.len * i as f64 / POINTS_PER_ARC as f64).rem_euclid(1.0);
            for m in &moves {
                let z = system.act_point(m, y)?;
                if arcs.classify(z, 1e-12) == Side::Inside {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_radii_are_refuted() {
        let cfg = ExperimentConfig::parse("experiment = \"c\"\n[counterexample]\nradii = [0, 1]\n").unwrap();
        let rec = run_counterexample(&cfg, RunOptions { seed: 0, jobs: 2 }).unwrap();
        assert_eq!(rec.aggregate.passed, 2, "{:#?}", rec.trials);
        assert!(rec.trials[1].detail.is_some());
    }

    #[test]
    fn full_circle_covers() {
        let text = "experiment = \"c\"\n[counterexample]\nradii = [0]\narcs = \"full\"\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let rec = run_counterexample(&cfg, RunOptions { seed: 0, jobs: 1 }).unwrap();
        assert_eq!(rec.trials[0].status, Status::Undetermined);
        let cfg = ExperimentConfig::parse(&format!("{text}expect_cover = true\n")).unwrap();
        let rec = run_counterexample(&cfg, RunOptions { seed: 0, jobs: 1 }).unwrap();
        assert_eq!(rec.trials[0].status, Status::Pass);
    }
}
