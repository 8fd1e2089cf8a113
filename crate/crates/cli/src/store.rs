//! The on-disk data store: one directory per parameter combination,
//! a TOML manifest recording every artifact with its checksum, and a
//! lock file excluding concurrent invocations.
//!
//! The manifest is the source of truth for idempotence: a command
//! first checks whether its outputs are already recorded and still
//! match their checksums, and only then does any work. Manifest writes
//! go through the atomic rename path, so a crash leaves either the old
//! or the new manifest, never a torn one.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use swarmtopo::io::{sha256_hex, write_atomic};
use swarmtopo::sim::{GridSpec, RunSpec};

use crate::config::ExperimentConfig;

pub const MANIFEST_NAME: &str = "manifest.toml";
pub const LOCK_NAME: &str = ".lock";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridRecord {
    pub c_values: Vec<f64>,
    pub ell_values: Vec<f64>,
    pub runs_per_combo: usize,
}

impl GridRecord {
    fn of(grid: &GridSpec) -> Self {
        GridRecord {
            c_values: grid.c_values.clone(),
            ell_values: grid.ell_values.clone(),
            runs_per_combo: grid.runs_per_combo,
        }
    }
}

/// A checksummed file owned by the store, path relative to the root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub checksum: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub c: f64,
    pub ell: f64,
    pub c_idx: usize,
    pub ell_idx: usize,
    pub run: usize,
    pub seed: u64,
    pub phenotype: String,
    /// "ok" or "failed: <reason>".
    pub status: String,
    pub path: String,
    pub checksum: String,
    pub rhs_evaluations: u64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub coincident_pairs: u64,
    /// Points clipped by the escape clamp before crocker computation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamped_points: Option<u64>,
    /// Crocker artifacts keyed by route and dimension: "pos-b0", ...
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub crockers: BTreeMap<String, ArtifactRecord>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSetRecord {
    pub name: String,
    pub kind: String,
    pub n_rows: usize,
    pub n_features: usize,
    pub path: String,
    pub checksum: String,
    pub source_runs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub master_seed: u64,
    pub grid: GridRecord,
    #[serde(default)]
    pub runs: Vec<RunRecord>,
    #[serde(default)]
    pub feature_sets: Vec<FeatureSetRecord>,
}

impl Manifest {
    fn new(config: &ExperimentConfig) -> Self {
        Manifest {
            version: 1,
            master_seed: config.grid.master_seed,
            grid: GridRecord::of(&config.grid),
            runs: Vec::new(),
            feature_sets: Vec::new(),
        }
    }

    pub fn run(&self, id: &str) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.id == id)
    }

    pub fn run_mut(&mut self, id: &str) -> Option<&mut RunRecord> {
        self.runs.iter_mut().find(|r| r.id == id)
    }

    pub fn feature_set(&self, name: &str) -> Option<&FeatureSetRecord> {
        self.feature_sets.iter().find(|f| f.name == name)
    }

    /// Replace or append a run record, keeping library order.
    pub fn upsert_run(&mut self, record: RunRecord) {
        match self.run_mut(&record.id) {
            Some(slot) => *slot = record,
            None => self.runs.push(record),
        }
    }

    pub fn upsert_feature_set(&mut self, record: FeatureSetRecord) {
        match self.feature_sets.iter_mut().find(|f| f.name == record.name) {
            Some(slot) => *slot = record,
            None => self.feature_sets.push(record),
        }
    }
}

/// Directory name for one parameter combination, e.g. `c0.1_l2`.
pub fn combo_dir(c: f64, ell: f64) -> String {
    format!("c{c}_l{ell}")
}

/// Store paths for one run's artifacts, relative to the root.
pub fn trajectory_rel(spec: &RunSpec) -> String {
    format!(
        "{}/run{:02}.txt",
        combo_dir(spec.params.c, spec.params.ell),
        spec.run_idx
    )
}

pub fn crocker_rel(spec: &RunSpec, route: &str, betti_dim: usize) -> String {
    format!(
        "{}/run{:02}.{route}.b{betti_dim}.txt",
        combo_dir(spec.params.c, spec.params.ell),
        spec.run_idx
    )
}

pub fn feature_table_rel(set_name: &str) -> String {
    format!("features/{set_name}.tsv")
}

/// An open store holding the single-invocation lock. The lock file is
/// removed on drop; a leftover `.lock` from a killed process must be
/// deleted by hand.
pub struct Store {
    root: PathBuf,
    lock: PathBuf,
    pub manifest: Manifest,
}

impl Store {
    /// Open (creating if needed) the store for `config`, acquire the
    /// lock, and load or initialize the manifest. A manifest written
    /// under a different grid or master seed is refused rather than
    /// silently mixed.
    pub fn open(config: &ExperimentConfig) -> Result<Store> {
        let root = config.out.clone();
        fs::create_dir_all(&root)
            .with_context(|| format!("creating store directory {}", root.display()))?;

        let lock = root.join(LOCK_NAME);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                use std::io::Write as _;
                let _ = writeln!(f, "pid {}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => bail!(
                "store {} is locked by another invocation (remove {} if stale)",
                root.display(),
                lock.display()
            ),
            Err(e) => return Err(e).context("creating lock file"),
        }

        let manifest_path = root.join(MANIFEST_NAME);
        let manifest = if manifest_path.exists() {
            let text = fs::read_to_string(&manifest_path)
                .with_context(|| format!("reading {}", manifest_path.display()))?;
            let manifest: Manifest = toml::from_str(&text)
                .with_context(|| format!("parsing {}", manifest_path.display()))?;
            let want = GridRecord::of(&config.grid);
            if manifest.grid != want || manifest.master_seed != config.grid.master_seed {
                let _ = fs::remove_file(&lock);
                bail!(
                    "store {} was generated with a different grid or master seed; \
                     use a fresh --out directory",
                    root.display()
                );
            }
            manifest
        } else {
            Manifest::new(config)
        };

        Ok(Store { root, lock, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn abs(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Persist the manifest atomically.
    pub fn save(&self) -> Result<()> {
        let text = toml::to_string_pretty(&self.manifest).context("serializing manifest")?;
        write_atomic(&self.root.join(MANIFEST_NAME), |out| {
            use std::io::Write as _;
            out.write_all(text.as_bytes())
        })
        .context("writing manifest")?;
        Ok(())
    }

    /// Does `rel` exist with the recorded checksum?
    pub fn artifact_valid(&self, rel: &str, checksum: &str) -> bool {
        if checksum.is_empty() {
            return false;
        }
        let path = self.abs(rel);
        path.is_file() && sha256_hex(&path).map(|h| h == checksum).unwrap_or(false)
    }

    /// Checksum a freshly written artifact.
    pub fn checksum(&self, rel: &str) -> Result<String> {
        sha256_hex(&self.abs(rel)).with_context(|| format!("hashing {rel}"))
    }

    /// Create the directory that will hold `rel`.
    pub fn ensure_parent(&self, rel: &str) -> Result<()> {
        if let Some(parent) = self.abs(rel).parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        Ok(())
    }

    /// All run ids the config expects, in library order, with their
    /// manifest records if present.
    pub fn missing_runs(&self, specs: &[RunSpec]) -> Vec<String> {
        specs
            .iter()
            .filter(|s| {
                self.run(&s.id())
                    .map(|r| !r.is_ok())
                    .unwrap_or(true)
            })
            .map(|s| s.id())
            .collect()
    }

    pub fn run(&self, id: &str) -> Option<&RunRecord> {
        self.manifest.run(id)
    }
}

impl Drop for Store {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
