use anyhow::{ensure, Result};
use num_rational::Ratio;
use rand::Rng;
use serde_json::{json, Value};

use prodset_core::circle::{standard_fixture, CircleSystem};
use prodset_core::group::{GroupDescriptor, GroupElement, Word};
use prodset_core::measure::{
    cesaro_walk_density, cylinder_walk_density, free_cylinder_harmonic, markov_cesaro_average, return_time_density,
    sampled_walk, sampled_walk_density, stationary_measure, BoundaryCylinder, FiniteGSpace, PowerOptions, Powers,
    SparseMeasure, MASS_TOL,
};

use super::RunOptions;
use crate::config::{ExperimentConfig, WalkFixture};
use crate::record::{ResultRecord, Status, Table, TrialOutcome};
use crate::trials::{run_indexed, trial_rng};

pub fn run_walk_density(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ResultRecord> {
    let sec = cfg.walk.clone().unwrap_or_default();
    for f in &sec.fixtures {
        validate(f)?;
    }
    let results = run_indexed(sec.fixtures.len() as u64, opts.jobs, |i| {
        let seed = trial_rng(opts.seed, i).gen::<u64>();
        run_fixture(&sec.fixtures[i as usize], seed)
    });
    let mut trials = Vec::new();
    let mut tables = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let (t, mut table) = r?;
        table.name = format!("fixture{i}-{}", t.label);
        trials.push(t);
        tables.push(table);
    }
    let mut rec = ResultRecord::assemble(&cfg.experiment, "walk-density", opts.seed, json!(sec), trials);
    rec.tables = tables;
    Ok(rec)
}

fn validate(f: &WalkFixture) -> Result<()> {
    match f {
        WalkFixture::IntegerParity { n } => ensure!(*n >= 1, "n must be positive"),
        WalkFixture::Rotation { modulus, set, start, n, .. } => {
            ensure!(*modulus >= 1 && *n >= 1, "modulus and n must be positive");
            ensure!(set.iter().chain([start]).all(|s| s < modulus), "state outside Z_{modulus}");
        }
        WalkFixture::FreeCylinder { rank, prefixes, n, .. } => {
            ensure!(*rank >= 1 && *n >= 1 && !prefixes.is_empty(), "empty free-cylinder fixture");
        }
        WalkFixture::FreePowers { rank, k, .. } => ensure!(*rank >= 1 && *k >= 1, "empty free-powers fixture"),
        WalkFixture::CylinderHarmonic { rank, .. } => ensure!(*rank >= 1, "rank must be positive"),
        WalkFixture::CircleReturn { n, walks, .. } => ensure!(*n >= 1 && *walks >= 1, "empty circle fixture"),
    }
    Ok(())
}

fn table(columns: &[&str], rows: Vec<Vec<Value>>) -> Table {
    Table {
        name: String::new(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
    }
}

fn run_fixture(f: &WalkFixture, seed: u64) -> Result<(TrialOutcome, Table)> {
    let inputs = json!(f);
    match f {
        WalkFixture::IntegerParity { n } => {
            let mu = SparseMeasure::simple_random_walk(&GroupDescriptor::integers());
            let rows = cesaro_walk_density(&mu, |g| g.as_int().expect("integers") % 2 == 0, *n, PowerOptions::default())?;
            let mut t = TrialOutcome::new("integer-parity", "measure::cesaro_walk_density", inputs);
            // exact: the walk sits on an even integer exactly at even times
            let exact = rows.iter().all(|r| r.cesaro_avg == (r.k / 2) as f64 / r.k as f64);
            let last = rows.last().expect("n >= 1");
            let near_half = (last.cesaro_avg - 0.5).abs() <= 1.0 / *n as f64;
            t.metric("cesaro", last.cesaro_avg).ratio("expected", Ratio::new((*n / 2) as u64, *n as u64));
            t.status = if exact && near_half { Status::Pass } else { Status::Violation };
            let rows = rows
                .iter()
                .map(|r| vec![json!(r.k), json!(r.mass_in_a), json!(r.cesaro_avg), json!(r.pruned_mass)])
                .collect();
            Ok((t, table(&["k", "mass_in_a", "cesaro_avg", "pruned_mass"], rows)))
        }
        WalkFixture::Rotation { modulus, set, start, n, tol } => {
            let space = FiniteGSpace::rotation(*modulus);
            let mu = SparseMeasure::simple_random_walk(&GroupDescriptor::integers());
            let nu = stationary_measure(&space, &mu, 1e-13)?;
            let nu_b: f64 = set.iter().map(|&s| nu.weights[s]).sum();
            let mut phi = vec![0.0; *modulus];
            for &s in set {
                phi[s] = 1.0;
            }
            let mut rows = Vec::new();
            let mut checkpoint = 1u32;
            while checkpoint <= *n {
                let avg = markov_cesaro_average(&space, &mu, &phi, checkpoint)?;
                let ret = return_time_density(&space, &mu, set, *start, checkpoint)?;
                rows.push(vec![json!(checkpoint), json!(avg.values[*start]), json!(ret), json!(avg.deviation)]);
                if checkpoint == *n {
                    break;
                }
                checkpoint = (checkpoint * 10).min(*n);
            }
            let avg = markov_cesaro_average(&space, &mu, &phi, *n)?;
            let ret = return_time_density(&space, &mu, set, *start, *n)?;
            let mut t = TrialOutcome::new(
                "rotation",
                "measure::markov_cesaro_average + measure::return_time_density",
                inputs,
            );
            let exact = Ratio::new(set.len() as u64, *modulus as u64);
            let exact_f = set.len() as f64 / *modulus as f64;
            t.metric("cesaro", avg.values[*start])
                .metric("return_density", ret)
                .metric("stationary_mass", nu_b)
                .ratio("expected", exact);
            let ok = (avg.values[*start] - exact_f).abs() <= *tol && ret >= nu_b - tol && (nu_b - exact_f).abs() <= *tol;
            t.status = if ok { Status::Pass } else { Status::Violation };
            Ok((t, table(&["n", "cesaro", "return_density", "deviation"], rows)))
        }
        WalkFixture::FreeCylinder {
            rank,
            prefixes,
            n,
            walks,
            sigmas,
        } => {
            let words: Vec<Word> = prefixes.iter().map(|p| p.parse()).collect::<Result<_, _>>()?;
            let exact = cylinder_walk_density(*rank, &words, *n)?;
            let mu = SparseMeasure::simple_random_walk(&GroupDescriptor::free(*rank)?);
            let in_a = |g: &GroupElement| {
                let w = g.as_word().expect("free group");
                words.iter().any(|p| w.starts_with(p))
            };
            let sampled = sampled_walk_density(&mu, in_a, *n, *walks, seed);
            let mut t = TrialOutcome::new(
                "free-cylinder",
                "measure::cylinder_walk_density vs measure::sampled_walk_density",
                inputs,
            );
            let (x, s) = (exact.last().expect("n >= 1"), sampled.last().expect("n >= 1"));
            let z_mass = (x.mass_in_a - s.mean).abs() / s.std_err.max(f64::MIN_POSITIVE);
            let z_cesaro = (x.cesaro_avg - s.cesaro_avg).abs() / s.cesaro_std_err.max(f64::MIN_POSITIVE);
            t.metric("exact_mass", x.mass_in_a)
                .metric("sampled_mass", s.mean)
                .metric("z_mass", z_mass)
                .metric("exact_cesaro", x.cesaro_avg)
                .metric("sampled_cesaro", s.cesaro_avg)
                .metric("z_cesaro", z_cesaro)
                .metric("mc_seed", seed);
            t.status = if z_mass <= *sigmas && z_cesaro <= *sigmas {
                Status::Pass
            } else {
                Status::Violation
            };
            let rows = exact
                .iter()
                .zip(&sampled)
                .map(|(x, s)| {
                    vec![json!(x.k), json!(x.mass_in_a), json!(x.cesaro_avg), json!(s.mean), json!(s.std_err)]
                })
                .collect();
            Ok((t, table(&["k", "exact_mass", "exact_cesaro", "sampled_mass", "sampled_std_err"], rows)))
        }
        WalkFixture::FreePowers { rank, k, prune_tol } => {
            let mu = SparseMeasure::simple_random_walk(&GroupDescriptor::free(*rank)?);
            let opts = PowerOptions {
                prune_tol: *prune_tol,
                ..PowerOptions::default()
            };
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for p in Powers::new(&mu, opts)?.take(*k as usize) {
                let p = p?;
                let err = (p.measure.mass() + p.pruned_mass - 1.0).abs();
                worst = worst.max(err);
                rows.push(vec![json!(p.k), json!(p.measure.support_len()), json!(p.measure.mass()), json!(p.pruned_mass), json!(err)]);
            }
            let mut t = TrialOutcome::new("free-powers", "measure::Powers (mass + pruned_mass = 1)", inputs);
            t.metric("max_mass_error", worst)
                .metric("final_support", rows.last().map(|r| r[1].clone()));
            t.status = if worst <= MASS_TOL { Status::Pass } else { Status::Violation };
            Ok((t, table(&["k", "support", "mass", "pruned_mass", "mass_error"], rows)))
        }
        WalkFixture::CylinderHarmonic {
            rank,
            suffix,
            at,
            depth,
            expect,
            max_width,
            walks,
            steps,
            sigmas,
        } => {
            let cyl = BoundaryCylinder::new(suffix.parse()?)?;
            let g = GroupElement::word(at)?;
            let v = free_cylinder_harmonic(&cyl, *rank, &g, *depth)?;
            let mut t = TrialOutcome::new("cylinder-harmonic", "measure::free_cylinder_harmonic", inputs);
            t.metric("lower", v.lower).metric("upper", v.upper).metric("width", v.width());
            let mut ok = v.width() <= *max_width && expect.is_none_or(|e| v.contains(e));
            let mut rows = vec![vec![json!("interval"), json!(v.lower), json!(v.upper)]];
            if *walks > 0 {
                let mu = SparseMeasure::simple_random_walk(&GroupDescriptor::free(*rank)?);
                let suffix_letters = cyl.word().letters().to_vec();
                let start = g.as_word().expect("free group").clone();
                let sampled = sampled_walk(
                    &mu,
                    start,
                    |w, h| h.as_word().expect("free group").mul(w),
                    |w| w.letters().ends_with(&suffix_letters),
                    *steps,
                    *walks,
                    seed,
                );
                let s = sampled.last().expect("steps >= 1");
                let gap = (s.mean - v.midpoint()).abs() - v.width() / 2.0;
                let z = gap.max(0.0) / s.std_err.max(f64::MIN_POSITIVE);
                t.metric("sampled", s.mean).metric("sampled_std_err", s.std_err).metric("z", z).metric("mc_seed", seed);
                t.verified_by = "measure::free_cylinder_harmonic vs measure::sampled_walk".into();
                ok &= z <= *sigmas;
                rows.push(vec![json!("sampled"), json!(s.mean - s.std_err), json!(s.mean + s.std_err)]);
            }
            t.status = if ok { Status::Pass } else { Status::Violation };
            Ok((t, table(&["estimate", "lower", "upper"], rows)))
        }
        WalkFixture::CircleReturn { x, n, walks } => {
            let s = CircleSystem::default();
            let a = standard_fixture();
            let mu = SparseMeasure::simple_random_walk(&GroupDescriptor::free(2)?);
            // left and right walks share their marginals, so the point chain
            // h_k⋯h_1·x gives the Cesàro means of the walk on A_x
            let rows = sampled_walk(
                &mu,
                *x,
                |y, g| s.act_point(g.as_word().expect("free group"), *y).expect("letters a, b"),
                |y| a.contains(*y),
                *n,
                *walks,
                seed,
            );
            let mut running: f64 = 0.0;
            let mut held = true;
            for r in &rows {
                running = running.max(r.cesaro_avg);
                held &= r.cesaro_avg >= 0.5 * running;
            }
            let last = rows.last().expect("n >= 1");
            let mut t = TrialOutcome::new("circle-return", "measure::sampled_walk (circle action)", inputs);
            t.metric("cesaro", last.cesaro_avg)
                .metric("cesaro_std_err", last.cesaro_std_err)
                .metric("running_max", running)
                .metric("mc_seed", seed);
            t.status = if held && last.cesaro_avg > 0.0 { Status::Pass } else { Status::Violation };
            let rows = rows
                .iter()
                .map(|r| vec![json!(r.k), json!(r.mean), json!(r.cesaro_avg), json!(r.cesaro_std_err)])
                .collect();
            Ok((t, table(&["k", "mass_in_a", "cesaro_avg", "cesaro_std_err"], rows)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_fixtures_pass() {
        let cfg = ExperimentConfig::parse("experiment = \"w\"").unwrap();
        let rec = run_walk_density(&cfg, RunOptions { seed: 4, jobs: 2 }).unwrap();
        assert_eq!(rec.aggregate.passed, 3, "{:#?}", rec.trials);
        assert_eq!(rec.tables.len(), 3);
        assert_eq!(rec.tables[1].name, "fixture1-rotation");
        assert_eq!(rec.tables[1].rows.len(), 5);
    }

    #[test]
    fn harmonic_fixture() {
        let f = WalkFixture::CylinderHarmonic {
            rank: 2,
            suffix: "a".into(),
            at: "a".into(),
            depth: 30,
            expect: Some(0.75),
            max_width: 1e-6,
            walks: 20_000,
            steps: 30,
            sigmas: 3.0,
        };
        let (t, _) = run_fixture(&f, 8).unwrap();
        assert_eq!(t.status, Status::Pass, "{t:?}");
    }
}
