use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::TOOL_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The declared bound was checked and holds.
    Pass,
    /// The declared bound was checked and fails.
    Violation,
    /// A budget ran out before the bound could be checked.
    Undetermined,
    /// Bounded-search output with no bound attached.
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
    Undetermined,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Violation => 1,
            Verdict::Undetermined => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub label: String,
    pub status: Status,
    /// The operation whose output decided `status`.
    pub verified_by: String,
    /// Enough to rerun the operation by hand.
    pub inputs: Value,
    pub metrics: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl TrialOutcome {
    pub fn new(label: impl Into<String>, verified_by: &str, inputs: Value) -> Self {
        TrialOutcome {
            trial: 0,
            label: label.into(),
            status: Status::Undetermined,
            verified_by: verified_by.to_string(),
            inputs,
            metrics: BTreeMap::new(),
            note: None,
            detail: None,
        }
    }

    pub fn metric(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.metrics.insert(key.to_string(), json!(v));
        self
    }

    /// Stores `p/q` under `key` and its decimal value under `key_dec`.
    pub fn ratio(&mut self, key: &str, r: Ratio<u64>) -> &mut Self {
        self.metrics.insert(key.to_string(), json!(format!("{}/{}", r.numer(), r.denom())));
        self.metrics
            .insert(format!("{key}_dec"), json!(*r.numer() as f64 / *r.denom() as f64));
        self
    }

    pub fn with_status(mut self, s: Status) -> Self {
        self.status = s;
        self
    }
}

/// A named table of numbers, written as its own CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub passed: usize,
    pub violations: usize,
    pub undetermined: usize,
    pub reports: usize,
    pub stats: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub params: Value,
    pub trials: Vec<TrialOutcome>,
    pub aggregate: Aggregate,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<Table>,
}

impl ResultRecord {
    /// Numbers the trials in order and derives the aggregate and verdict.
    pub fn assemble(experiment: &str, command: &str, seed: u64, params: Value, mut trials: Vec<TrialOutcome>) -> Self {
        for (i, t) in trials.iter_mut().enumerate() {
            t.trial = i as u64;
        }
        let count = |s: Status| trials.iter().filter(|t| t.status == s).count();
        let aggregate = Aggregate {
            trials: trials.len(),
            passed: count(Status::Pass),
            violations: count(Status::Violation),
            undetermined: count(Status::Undetermined),
            reports: count(Status::Report),
            stats: BTreeMap::new(),
        };
        let verdict = if aggregate.violations > 0 {
            Verdict::Violation
        } else if aggregate.undetermined > 0 {
            Verdict::Undetermined
        } else {
            Verdict::Pass
        };
        ResultRecord {
            experiment: experiment.to_string(),
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            params,
            trials,
            aggregate,
            verdict,
            tables: Vec::new(),
        }
    }

    pub fn stat(&mut self, key: &str, v: impl Serialize) {
        self.aggregate.stats.insert(key.to_string(), json!(v));
    }

    /// Every pass names its verifying operation and carries its inputs.
    pub fn check_citations(&self) -> Result<()> {
        for t in &self.trials {
            if t.status == Status::Pass {
                ensure!(!t.verified_by.is_empty(), "trial {} passes without a verifier", t.trial);
                ensure!(!t.inputs.is_null(), "trial {} passes without inputs", t.trial);
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    /// One row per trial: id, label, status, verifier, then every metric key.
    pub fn summary_csv(&self) -> Result<String> {
        let keys: BTreeSet<&String> = self.trials.iter().flat_map(|t| t.metrics.keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["trial", "label", "status", "verified_by"];
        header.extend(keys.iter().map(|k| k.as_str()));
        w.write_record(&header)?;
        for t in &self.trials {
            let mut row = vec![
                t.trial.to_string(),
                t.label.clone(),
                json_cell(&json!(t.status)),
                t.verified_by.clone(),
            ];
            row.extend(keys.iter().map(|k| t.metrics.get(*k).map(json_cell).unwrap_or_default()));
            w.write_record(&row)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn table_csv(table: &Table) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.columns)?;
        for r in &table.rows {
            w.write_record(r.iter().map(json_cell))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Writes `<experiment>.json`, `<experiment>.csv` and one
    /// `<experiment>.<table>.csv` per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut files = vec![
            (dir.join(format!("{}.json", self.experiment)), self.to_json()),
            (dir.join(format!("{}.csv", self.experiment)), self.summary_csv()?),
        ];
        for t in &self.tables {
            files.push((dir.join(format!("{}.{}.csv", self.experiment, t.name)), Self::table_csv(t)?));
        }
        for (path, body) in &files {
            fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
