//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any
//! FAIL. Each criterion runs on one worker (the timed run) and again on four
//! workers; criterion 10 compares the written records byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Result;
use prodset_lab::runners::{self, RunOptions};
use prodset_lab::{ExperimentConfig, ResultRecord, Status, Verdict};

const SEED: u64 = 20240611;

type Runner = fn(&ExperimentConfig, RunOptions) -> Result<ResultRecord>;

struct Criterion {
    id: u32,
    name: &'static str,
    config: &'static str,
    runner: Runner,
    time_limit: Option<Duration>,
    check: fn(&ResultRecord) -> Result<(), String>,
}

fn all_pass(rec: &ResultRecord, expected: usize) -> Result<(), String> {
    let a = &rec.aggregate;
    if rec.verdict != Verdict::Pass || a.passed != expected || a.trials != expected {
        let bad: Vec<String> = rec
            .trials
            .iter()
            .filter(|t| t.status != Status::Pass)
            .take(3)
            .map(|t| format!("#{} {} {:?} {:?}", t.trial, t.label, t.status, t.metrics))
            .collect();
        return Err(format!(
            "{}/{} passed ({} violations, {} undetermined); first: {bad:?}",
            a.passed, a.trials, a.violations, a.undetermined
        ));
    }
    Ok(())
}

fn metric_f64(rec: &ResultRecord, label: &str, key: &str) -> Option<f64> {
    rec.trials.iter().find(|t| t.label == label)?.metrics.get(key)?.as_f64()
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            name: "cover bound on Z_N, N in {64,128,256,512}, 1000 pairs each",
            config: r#"
experiment = "c1-cover-bound"
[thm2]
moduli = [[64], [128], [256], [512]]
trials = 1000
min_measure = 0.05
max_measure = 0.5
fixtures = []
"#,
            runner: runners::run_thm2_bound,
            time_limit: Some(Duration::from_secs(60)),
            check: |rec| {
                all_pass(rec, 4000)?;
                // each pass records m(E) >= m(A)m(B), F·U = K and |F| <= bound
                let ok = rec.trials.iter().all(|t| {
                    t.metrics.get("overlap_bound") == Some(&serde_json::json!(true))
                        && t.metrics["F_size"].as_u64() <= t.metrics["bound"].as_u64()
                });
                ok.then_some(()).ok_or_else(|| "a pass lacks its overlap or size check".into())
            },
        },
        Criterion {
            id: 2,
            name: "exact minimal F for 200 periodic pairs of density >= 0.1",
            config: r#"
experiment = "c2-periodic-index"
[jin]
mode = "exact"
pairs = []
trials = 200
max_modulus = 20
min_density = 0.1
"#,
            runner: runners::run_jin_verify,
            time_limit: None,
            check: |rec| all_pass(rec, 200),
        },
        Criterion {
            id: 3,
            name: "density sum > 1 gives A+B = Z",
            config: r#"
experiment = "c3-pigeonhole"
[selftest.structure]
pigeonhole_trials = 200
"#,
            runner: runners::run_pigeonhole,
            time_limit: None,
            check: |rec| all_pass(rec, 200),
        },
        Criterion {
            id: 4,
            name: "{0..j}+A reaches density 1 for some j <= modulus",
            config: r#"
experiment = "c4-interval-sums"
[selftest.structure]
ergodicity_trials = 100
"#,
            runner: runners::run_ergodicity,
            time_limit: None,
            check: |rec| all_pass(rec, 100),
        },
        Criterion {
            id: 5,
            name: "three-generator identity in F3, paradoxical cover and disjoint translates in F2",
            config: "experiment = \"c5-free-structure\"\n",
            runner: runners::run_free_structure,
            time_limit: None,
            check: |rec| all_pass(rec, 3),
        },
        Criterion {
            id: 6,
            name: "walk machinery: mass, parity, cylinder harmonics",
            config: r#"
experiment = "c6-walks"
[[walk.fixtures]]
kind = "free-powers"
rank = 2
k = 12
prune_tol = 0.0

[[walk.fixtures]]
kind = "integer-parity"
n = 1000

[[walk.fixtures]]
kind = "cylinder-harmonic"
rank = 2
suffix = "a"
at = "e"
depth = 40
expect = 0.25
max_width = 1e-6
walks = 1000000
steps = 40
sigmas = 3.0

[[walk.fixtures]]
kind = "cylinder-harmonic"
rank = 2
suffix = "a"
at = "a"
depth = 40
expect = 0.75
max_width = 1e-6
walks = 1000000
steps = 40
sigmas = 3.0
"#,
            runner: runners::run_walk_density,
            time_limit: None,
            check: |rec| {
                all_pass(rec, 4)?;
                let support = rec.trials[0].metrics["final_support"].as_u64().unwrap_or(0);
                if support < 100_000 {
                    return Err(format!("support at k = 12 is only {support}"));
                }
                if metric_f64(rec, "free-powers", "max_mass_error").is_none_or(|e| e > 1e-12) {
                    return Err("mass error above 1e-12".into());
                }
                Ok(())
            },
        },
        Criterion {
            id: 7,
            name: "Z_3 rotation: Cesaro average and return density at n = 10^4",
            config: r#"
experiment = "c7-rotation"
[[walk.fixtures]]
kind = "rotation"
modulus = 3
set = [0]
start = 0
n = 10000
tol = 1e-3
"#,
            runner: runners::run_walk_density,
            time_limit: None,
            check: |rec| {
                all_pass(rec, 1)?;
                let c = metric_f64(rec, "rotation", "cesaro").unwrap_or(f64::NAN);
                if (c - 1.0 / 3.0).abs() > 1e-3 {
                    return Err(format!("Cesaro average {c}"));
                }
                Ok(())
            },
        },
        Criterion {
            id: 8,
            name: "matrix-coefficient means agree to 1e-10 on 100 representations",
            config: r#"
experiment = "c8-matrix-means"
[selftest.structure]
representation_trials = 100
"#,
            runner: runners::run_matrix_means,
            time_limit: None,
            check: |rec| all_pass(rec, 100),
        },
        Criterion {
            id: 9,
            name: "verified non-syndeticity certificates for F = Ball(rho), rho <= 2",
            config: r#"
experiment = "c9-circle"
[counterexample]
radii = [0, 1, 2]
arcs = "standard"
delta = 1e-9
"#,
            runner: runners::run_counterexample,
            time_limit: Some(Duration::from_secs(300)),
            check: |rec| {
                all_pass(rec, 3)?;
                let verified = rec
                    .trials
                    .iter()
                    .all(|t| t.metrics.get("certificate_verified") == Some(&serde_json::json!(true)) && t.detail.is_some());
                verified.then_some(()).ok_or_else(|| "a certificate is missing or unverified".into())
            },
        },
    ]
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn main() -> ExitCode {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = fs::remove_dir_all(&root);
    let mut failures = 0;
    let mut identical = true;
    let mut compared = 0;

    for c in criteria() {
        let cfg = ExperimentConfig::parse(c.config).expect("acceptance configs parse");
        let one = root.join(format!("c{}-jobs1", c.id));
        let four = root.join(format!("c{}-jobs4", c.id));

        let start = Instant::now();
        let first = (c.runner)(&cfg, RunOptions { seed: SEED, jobs: 1 });
        let elapsed = start.elapsed();
        let verdict = match &first {
            Ok(rec) => {
                let mut v = (c.check)(rec).and_then(|_| rec.check_citations().map_err(|e| e.to_string()));
                if let (Ok(()), Some(limit)) = (&v, c.time_limit) {
                    if elapsed > limit {
                        v = Err(format!("took {elapsed:.1?}, limit {limit:?}"));
                    }
                }
                if let Err(e) = rec.write_to(&one) {
                    v = Err(e.to_string());
                }
                v
            }
            Err(e) => Err(format!("runner failed: {e:#}")),
        };
        match &verdict {
            Ok(()) => println!("PASS criterion {}: {} ({elapsed:.1?})", c.id, c.name),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {}: {} ({elapsed:.1?}): {why}", c.id, c.name);
            }
        }

        match (c.runner)(&cfg, RunOptions { seed: SEED, jobs: 4 }).and_then(|r| r.write_to(&four)) {
            Ok(_) => {
                let (a, b) = (files_in(&one), files_in(&four));
                compared += a.len();
                if a.is_empty() || a != b {
                    identical = false;
                    println!("  criterion {}: records differ between 1 and 4 workers", c.id);
                }
            }
            Err(e) => {
                identical = false;
                println!("  criterion {}: rerun failed: {e:#}", c.id);
            }
        }
    }

    if identical {
        println!("PASS criterion 10: {compared} record files byte-identical across 1 and 4 workers");
    } else {
        failures += 1;
        println!("FAIL criterion 10: records depend on the worker count");
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
