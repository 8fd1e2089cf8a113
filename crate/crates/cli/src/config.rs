//! Experiment configuration: a TOML file plus command-line overrides.
//!
//! Every key has a default matching the desk-scale study (5 x 5 grid,
//! 10 runs per combination, N = 200 agents to t = 100), so `swarmtopo
//! simulate --out store` works with no config file at all.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use swarmtopo::descriptors::Channel;
use swarmtopo::sim::{GridSpec, SwarmParams, GRID_VALUES};
use swarmtopo::tda::DELAY_STEPS;

/// Which Betti dimensions a crocker feature set concatenates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BettiChoice {
    B0,
    B1,
    Both,
}

/// One cell of the experimental design: a named feature construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureSet {
    /// Downsampled order-parameter series, concatenated per channel.
    OrderParams(Vec<Channel>),
    /// Flattened crocker matrices from position or delayed clouds.
    Crocker { betti: BettiChoice, delayed: bool },
}

impl FeatureSet {
    /// The full sweep, in report row order: the four single order
    /// parameters, their concatenation, then position and delayed
    /// crockers for b0, b1, and both.
    pub fn all() -> Vec<FeatureSet> {
        let mut sets: Vec<FeatureSet> = Channel::ALL
            .iter()
            .map(|&ch| FeatureSet::OrderParams(vec![ch]))
            .collect();
        sets.push(FeatureSet::OrderParams(Channel::ALL.to_vec()));
        for delayed in [false, true] {
            for betti in [BettiChoice::B0, BettiChoice::B1, BettiChoice::Both] {
                sets.push(FeatureSet::Crocker { betti, delayed });
            }
        }
        sets
    }

    pub fn name(&self) -> String {
        match self {
            FeatureSet::OrderParams(chs) if chs.len() == Channel::ALL.len() => "op-all".into(),
            FeatureSet::OrderParams(chs) => {
                let parts: Vec<&str> = chs.iter().map(|c| c.short_name()).collect();
                format!("op-{}", parts.join("-"))
            }
            FeatureSet::Crocker { betti, delayed } => {
                let route = if *delayed { "del" } else { "pos" };
                let b = match betti {
                    BettiChoice::B0 => "b0",
                    BettiChoice::B1 => "b1",
                    BettiChoice::Both => "b0b1",
                };
                format!("{route}-{b}")
            }
        }
    }

    pub fn is_topological(&self) -> bool {
        matches!(self, FeatureSet::Crocker { .. })
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        FeatureSet::all()
            .into_iter()
            .find(|set| set.name() == s)
            .ok_or_else(|| {
                let known: Vec<String> = FeatureSet::all().iter().map(|s| s.name()).collect();
                format!("unknown feature set {s:?} (known: {})", known.join(", "))
            })
    }
}

/// PCA treatment applied before the supervised experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaChoice {
    None,
    Dims(usize),
}

impl PcaChoice {
    pub fn components(self) -> Option<usize> {
        match self {
            PcaChoice::None => None,
            PcaChoice::Dims(d) => Some(d),
        }
    }
}

impl fmt::Display for PcaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PcaChoice::None => f.write_str("none"),
            PcaChoice::Dims(d) => write!(f, "{d}"),
        }
    }
}

impl FromStr for PcaChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(PcaChoice::None),
            "87" => Ok(PcaChoice::Dims(87)),
            "3" => Ok(PcaChoice::Dims(3)),
            other => Err(format!("pca must be none, 87, or 3, got {other:?}")),
        }
    }
}

/// The resolved experiment plan, after merging file and flags.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub out: PathBuf,
    pub grid: GridSpec,
    pub base: SwarmParams,
    pub feature_sets: Vec<FeatureSet>,
    pub delay: usize,
    pub k: usize,
    pub folds: usize,
    pub pca: Vec<PcaChoice>,
    pub svm_c: f64,
    pub jobs: Option<usize>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub k: Option<usize>,
    pub folds: Option<usize>,
    pub jobs: Option<usize>,
}

// Raw file schema; everything optional so partial configs work.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    out: Option<PathBuf>,
    master_seed: Option<u64>,
    #[serde(default)]
    grid: FileGrid,
    #[serde(default)]
    sim: FileSim,
    #[serde(default)]
    features: FileFeatures,
    #[serde(default)]
    ml: FileMl,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGrid {
    c_values: Option<Vec<f64>>,
    ell_values: Option<Vec<f64>>,
    runs_per_combo: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSim {
    alpha: Option<f64>,
    beta: Option<f64>,
    n: Option<usize>,
    t_end: Option<f64>,
    sample_dt: Option<f64>,
    rtol: Option<f64>,
    atol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFeatures {
    sets: Option<Vec<String>>,
    delay: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMl {
    k: Option<usize>,
    folds: Option<usize>,
    pca: Option<Vec<String>>,
    svm_c: Option<f64>,
}

impl ExperimentConfig {
    /// Load `path` (or pure defaults when `None`) and apply overrides.
    pub fn load(path: Option<&Path>, over: &Overrides) -> Result<Self> {
        let file: FileConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => FileConfig::default(),
        };

        let out = over
            .out
            .clone()
            .or(file.out)
            .context("no output directory: pass --out or set `out` in the config")?;

        let grid = GridSpec {
            c_values: file.grid.c_values.unwrap_or_else(|| GRID_VALUES.to_vec()),
            ell_values: file.grid.ell_values.unwrap_or_else(|| GRID_VALUES.to_vec()),
            runs_per_combo: over.runs.or(file.grid.runs_per_combo).unwrap_or(10),
            master_seed: over.seed.or(file.master_seed).unwrap_or(0),
        };

        let defaults = SwarmParams::default();
        let base = SwarmParams {
            alpha: file.sim.alpha.unwrap_or(defaults.alpha),
            beta: file.sim.beta.unwrap_or(defaults.beta),
            n: file.sim.n.unwrap_or(defaults.n),
            t_end: file.sim.t_end.unwrap_or(defaults.t_end),
            sample_dt: file.sim.sample_dt.unwrap_or(defaults.sample_dt),
            rtol: file.sim.rtol.unwrap_or(defaults.rtol),
            atol: file.sim.atol.unwrap_or(defaults.atol),
            ..defaults
        };

        let feature_sets = match file.features.sets {
            None => FeatureSet::all(),
            Some(names) => {
                let mut seen = BTreeSet::new();
                let mut sets = Vec::new();
                for name in names {
                    let set: FeatureSet =
                        name.parse().map_err(|e: String| anyhow::anyhow!(e))?;
                    if seen.insert(set.name()) {
                        sets.push(set);
                    }
                }
                if sets.is_empty() {
                    bail!("features.sets must not be empty");
                }
                sets
            }
        };

        let pca = match file.ml.pca {
            None => vec![PcaChoice::None, PcaChoice::Dims(87), PcaChoice::Dims(3)],
            Some(names) => {
                let mut pca = Vec::new();
                for name in names {
                    let choice: PcaChoice =
                        name.parse().map_err(|e: String| anyhow::anyhow!(e))?;
                    if !pca.contains(&choice) {
                        pca.push(choice);
                    }
                }
                if pca.is_empty() {
                    bail!("ml.pca must not be empty");
                }
                pca
            }
        };

        let config = ExperimentConfig {
            out,
            grid,
            base,
            feature_sets,
            delay: file.features.delay.unwrap_or(DELAY_STEPS),
            k: over.k.or(file.ml.k).unwrap_or(25),
            folds: over.folds.or(file.ml.folds).unwrap_or(5),
            pca,
            svm_c: file.ml.svm_c.unwrap_or(1.0),
            jobs: over.jobs,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.base.validate()?;
        if self.delay == 0 {
            bail!("features.delay must be >= 1");
        }
        if self.k == 0 || self.k > self.grid.n_runs() {
            bail!(
                "ml.k = {} must lie in 1..={} (the number of runs)",
                self.k,
                self.grid.n_runs()
            );
        }
        if self.folds < 2 || self.folds > self.grid.runs_per_combo {
            bail!(
                "ml.folds = {} must lie in 2..={} (runs per combination)",
                self.folds,
                self.grid.runs_per_combo
            );
        }
        if !(self.svm_c.is_finite() && self.svm_c > 0.0) {
            bail!("ml.svm_c must be positive and finite");
        }
        // PCA targets may not exceed any configured set's width; the
        // narrowest sets are the 87-wide order-parameter singles,
        // while crockers are thousands of columns wide.
        for choice in &self.pca {
            let PcaChoice::Dims(d) = choice else { continue };
            for set in &self.feature_sets {
                let dim = match set {
                    FeatureSet::OrderParams(chs) => 87 * chs.len(),
                    FeatureSet::Crocker { .. } => continue,
                };
                if *d > dim {
                    bail!(
                        "pca target {d} exceeds the {dim} dimensions of feature set {}",
                        set.name()
                    );
                }
            }
        }
        Ok(())
    }

    /// Install the rayon thread pool implied by `--jobs`, if any.
    pub fn install_thread_pool(&self) -> Result<()> {
        if let Some(jobs) = self.jobs {
            if jobs == 0 {
                bail!("--jobs must be >= 1");
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .context("installing thread pool")?;
        }
        Ok(())
    }
}
