//! TOML experiment files.
//!
//! ```toml
//! experiment = "thm2-z256"
//! seed = 7
//! group = "kind=cyclic,moduli=256"
//!
//! [thm2]
//! trials = 1000
//! min_measure = 0.05
//! ```
//!
//! Every section is optional and every key has a default, so a file naming
//! only the experiment runs the built-in fixtures.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use prodset_core::circle::{standard_fixture, ArcUnion, DELTA};
use prodset_core::group::GroupDescriptor;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    /// Default group for sections that do not name one, e.g.
    /// `kind=cyclic,moduli=12`.
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub jin: Option<JinConfig>,
    #[serde(default)]
    pub thm2: Option<Thm2Config>,
    #[serde(default)]
    pub cover: Option<CoverConfig>,
    #[serde(default)]
    pub walk: Option<WalkConfig>,
    #[serde(default)]
    pub counterexample: Option<CounterexampleConfig>,
    #[serde(default)]
    pub selftest: Option<SelftestConfig>,
    /// Directory of the config file; relative fixture paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        if cfg.experiment.is_empty() || !cfg.experiment.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            bail!("experiment id {:?} must be nonempty and use [A-Za-z0-9-_.]", cfg.experiment);
        }
        if let Some(g) = &cfg.group {
            g.parse::<GroupDescriptor>()?;
        }
        Ok(cfg)
    }

    /// Moduli of the default group, when it is a cyclic product.
    pub fn default_moduli(&self) -> Result<Option<Vec<u64>>> {
        match self.group.as_deref().map(str::parse::<GroupDescriptor>).transpose()? {
            None => Ok(None),
            Some(GroupDescriptor::CyclicProduct { moduli }) => Ok(Some(moduli)),
            Some(other) => bail!("group {other} is not a finite cyclic product"),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JinMode {
    #[default]
    Exact,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    /// `mod=m;residues=...`
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JinConfig {
    pub mode: JinMode,
    pub pairs: Vec<PairSpec>,
    /// Lines `A | B` in the same notation as `pairs`.
    pub pairs_file: Option<PathBuf>,
    pub trials: u64,
    pub max_modulus: u64,
    pub min_density: f64,
    pub node_budget: u64,
    /// Empirical mode: sets are drawn from `[0, radius]`.
    pub radius: u32,
    pub probe_len: i64,
    pub pool_radius: u32,
    pub max_f: usize,
    pub family_budget: u64,
}

impl Default for JinConfig {
    fn default() -> Self {
        JinConfig {
            mode: JinMode::Exact,
            pairs: vec![
                PairSpec {
                    a: "mod=4;residues=0".into(),
                    b: "mod=4;residues=0".into(),
                },
                PairSpec {
                    a: "mod=1;residues=0".into(),
                    b: "mod=1;residues=0".into(),
                },
            ],
            pairs_file: None,
            trials: 200,
            max_modulus: 20,
            min_density: 0.1,
            node_budget: prodset_core::setcover::DEFAULT_NODE_BUDGET,
            radius: 60,
            probe_len: 8,
            pool_radius: 3,
            max_f: 2,
            family_budget: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetFixture {
    pub moduli: Vec<u64>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thm2Config {
    /// Groups for random trials, used round-robin; falls back to the
    /// top-level group.
    pub moduli: Vec<Vec<u64>>,
    /// Random trials per group.
    pub trials: u64,
    pub min_measure: f64,
    pub max_measure: f64,
    pub fixtures: Vec<SubsetFixture>,
    /// Attach the full audit to random trials too (fixtures always get it).
    pub full_audit: bool,
}

impl Default for Thm2Config {
    fn default() -> Self {
        Thm2Config {
            moduli: Vec::new(),
            trials: 1000,
            min_measure: 0.05,
            max_measure: 0.5,
            fixtures: vec![
                SubsetFixture {
                    moduli: vec![12],
                    a: vec![0, 2, 4, 6, 8, 10],
                    b: vec![0, 1, 2, 3],
                },
                SubsetFixture {
                    moduli: vec![4],
                    a: vec![0, 1, 2, 3],
                    b: vec![0, 1, 2, 3],
                },
            ],
            full_audit: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverFixture {
    pub moduli: Vec<u64>,
    /// `U` and `E` given directly...
    #[serde(default)]
    pub u: Option<Vec<usize>>,
    #[serde(default)]
    pub e: Option<Vec<usize>>,
    /// ...or derived from `A`, `B` as best-translate overlap and correlation set.
    #[serde(default)]
    pub a: Option<Vec<usize>>,
    #[serde(default)]
    pub b: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverConfig {
    pub moduli: Vec<Vec<u64>>,
    pub trials: u64,
    pub min_measure: f64,
    pub max_measure: f64,
    pub node_budget: u64,
    pub fixtures: Vec<CoverFixture>,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            moduli: Vec::new(),
            trials: 500,
            min_measure: 0.05,
            max_measure: 0.5,
            node_budget: prodset_core::setcover::DEFAULT_NODE_BUDGET,
            fixtures: vec![
                CoverFixture {
                    moduli: vec![6],
                    u: None,
                    e: None,
                    a: Some(vec![0, 1, 2]),
                    b: Some(vec![0, 1]),
                },
                CoverFixture {
                    moduli: vec![5],
                    u: Some((0..5).collect()),
                    e: Some(vec![0, 1]),
                    a: None,
                    b: None,
                },
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WalkFixture {
    /// Simple walk on `Z`, `A` = even integers.
    IntegerParity { n: u32 },
    /// Simple walk on `Z` acting on `Z_modulus` by rotation.
    Rotation {
        modulus: usize,
        set: Vec<usize>,
        start: usize,
        n: u32,
        tol: f64,
    },
    /// Words of `F_rank` starting with one of `prefixes`: exact chain against sampling.
    FreeCylinder {
        rank: usize,
        prefixes: Vec<String>,
        n: u32,
        walks: u64,
        sigmas: f64,
    },
    /// Mass bookkeeping of `μ^{*k}` on `F_rank`.
    FreePowers { rank: usize, k: u32, prune_tol: f64 },
    /// Hitting probability of a boundary cylinder, as a certified interval.
    CylinderHarmonic {
        rank: usize,
        suffix: String,
        at: String,
        depth: u32,
        expect: Option<f64>,
        max_width: f64,
        walks: u64,
        steps: u32,
        sigmas: f64,
    },
    /// Return times of the circle action to the standard arcs.
    CircleReturn { x: f64, n: u32, walks: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    pub fixtures: Vec<WalkFixture>,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            fixtures: vec![
                WalkFixture::IntegerParity { n: 100 },
                WalkFixture::Rotation {
                    modulus: 3,
                    set: vec![0],
                    start: 0,
                    n: 10_000,
                    tol: 1e-3,
                },
                WalkFixture::FreeCylinder {
                    rank: 2,
                    prefixes: vec!["a".into()],
                    n: 20,
                    walks: 100_000,
                    sigmas: 3.0,
                },
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArcsSpec {
    /// `"standard"` for the built-in four-arc fixture.
    Named(String),
    /// `"l,r"` endpoint pairs.
    Inline(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub radii: Vec<u32>,
    pub arcs: ArcsSpec,
    pub arcs_file: Option<PathBuf>,
    pub alpha_p: u64,
    pub alpha_q: u64,
    pub lambda: f64,
    pub x_plus: f64,
    pub budget: u32,
    pub delta: f64,
    /// Base point and radius of the reported return set.
    pub x: f64,
    pub return_radius: u32,
    /// `true` when `F·A` is expected to cover the circle.
    pub expect_cover: bool,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            radii: vec![0, 1, 2],
            arcs: ArcsSpec::Named("standard".into()),
            arcs_file: None,
            alpha_p: 832_040,
            alpha_q: 1_346_269,
            lambda: 0.5,
            x_plus: 0.0,
            budget: 60,
            delta: DELTA,
            x: 0.0,
            return_radius: 4,
            expect_cover: false,
        }
    }
}

impl CounterexampleConfig {
    pub fn arc_union(&self, cfg: &ExperimentConfig) -> Result<ArcUnion> {
        if let Some(p) = &self.arcs_file {
            let path = cfg.resolve(p);
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(ArcUnion::parse_lines(&text)?);
        }
        match &self.arcs {
            ArcsSpec::Named(n) if n == "standard" => Ok(standard_fixture()),
            ArcsSpec::Named(n) if n == "full" => Ok(ArcUnion::full()),
            ArcsSpec::Named(n) => bail!("unknown arc fixture {n:?}"),
            ArcsSpec::Inline(lines) => Ok(ArcUnion::parse_lines(&lines.join("\n"))?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureConfig {
    pub pigeonhole_trials: u64,
    pub ergodicity_trials: u64,
    pub max_modulus: u64,
    pub representation_trials: u64,
}

impl Default for StructureConfig {
    fn default() -> Self {
        StructureConfig {
            pigeonhole_trials: 200,
            ergodicity_trials: 100,
            max_modulus: 30,
            representation_trials: 100,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestConfig {
    pub structure: StructureConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let cfg = ExperimentConfig::parse("experiment = \"x\"").unwrap();
        assert_eq!(cfg.seed, 0);
        assert!(cfg.thm2.is_none());
        let cfg = ExperimentConfig::parse("experiment = \"x\"\nseed = 5\n[thm2]\ntrials = 3\n").unwrap();
        let t = cfg.thm2.unwrap();
        assert_eq!(t.trials, 3);
        assert_eq!(t.min_measure, 0.05);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ExperimentConfig::parse("seed = 1").is_err());
        assert!(ExperimentConfig::parse("experiment = \"a b\"").is_err());
        assert!(ExperimentConfig::parse("experiment = \"x\"\ncolour = 1").is_err());
        assert!(ExperimentConfig::parse("experiment = \"x\"\ngroup = \"kind=ring\"").is_err());
    }

    #[test]
    fn walk_fixtures_are_tagged() {
        let cfg = ExperimentConfig::parse(
            "experiment = \"w\"\n[[walk.fixtures]]\nkind = \"integer-parity\"\nn = 10\n\
             [[walk.fixtures]]\nkind = \"circle-return\"\nx = 0.0\nn = 30\nwalks = 1000\n",
        )
        .unwrap();
        let w = cfg.walk.unwrap();
        assert_eq!(w.fixtures[0], WalkFixture::IntegerParity { n: 10 });
        assert!(matches!(w.fixtures[1], WalkFixture::CircleReturn { n: 30, .. }));
    }

    #[test]
    fn arcs_inline_and_named() {
        let cfg = ExperimentConfig::parse(
            "experiment = \"c\"\n[counterexample]\narcs = [\"0.1,0.2\", \"0.5,0.6\"]\nradii = [0]\n",
        )
        .unwrap();
        let c = cfg.counterexample.clone().unwrap();
        assert_eq!(c.arc_union(&cfg).unwrap().arcs().len(), 2);
        assert_eq!(CounterexampleConfig::default().arc_union(&cfg).unwrap(), standard_fixture());
        assert_eq!(c.budget, 60);
    }

    #[test]
    fn default_group_moduli() {
        let cfg = ExperimentConfig::parse("experiment = \"g\"\ngroup = \"kind=cyclic,moduli=4x6\"").unwrap();
        assert_eq!(cfg.default_moduli().unwrap(), Some(vec![4, 6]));
        let cfg = ExperimentConfig::parse("experiment = \"g\"\ngroup = \"kind=free,rank=2\"").unwrap();
        assert!(cfg.default_moduli().is_err());
    }
}
