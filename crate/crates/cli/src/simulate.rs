//! `swarmtopo simulate`: generate (or incrementally complete) the run
//! library.
//!
//! Runs whose trajectory file already exists and matches its recorded
//! checksum are skipped, so re-invoking on a complete store performs
//! no integration. Failures are recorded per run and reported at the
//! end; one bad run does not abort the rest of the library.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use rayon::prelude::*;

use swarmtopo::io::write_trajectory;
use swarmtopo::sim::{run_specs, simulate, RunSpec};

use crate::config::ExperimentConfig;
use crate::store::{trajectory_rel, RunRecord, Store};

pub fn cmd_simulate(config: &ExperimentConfig) -> Result<()> {
    let specs = run_specs(&config.grid, &config.base)?;
    let mut store = Store::open(config)?;

    let mut n_done = 0usize;
    let mut n_new = 0usize;
    let mut failed: Vec<String> = Vec::new();

    // One combo at a time: replicates integrate in parallel, records
    // land in replicate order, and the manifest is saved per combo so
    // an interrupted invocation resumes where it stopped.
    let mut by_combo: BTreeMap<(usize, usize), Vec<&RunSpec>> = BTreeMap::new();
    for spec in &specs {
        by_combo.entry((spec.c_idx, spec.ell_idx)).or_default().push(spec);
    }

    for ((_, _), combo_specs) in by_combo {
        let pending: Vec<&RunSpec> = combo_specs
            .iter()
            .copied()
            .filter(|spec| {
                let id = spec.id();
                let fresh = store
                    .run(&id)
                    .map(|r| r.is_ok() && store.artifact_valid(&r.path, &r.checksum))
                    .unwrap_or(false);
                if fresh {
                    n_done += 1;
                }
                !fresh
            })
            .collect();
        if pending.is_empty() {
            continue;
        }
        for spec in &pending {
            store.ensure_parent(&trajectory_rel(spec))?;
        }

        let root = store.root().to_path_buf();
        let records: Vec<RunRecord> = pending
            .par_iter()
            .map(|spec| {
                let rel = trajectory_rel(spec);
                let mut record = RunRecord {
                    id: spec.id(),
                    c: spec.params.c,
                    ell: spec.params.ell,
                    c_idx: spec.c_idx,
                    ell_idx: spec.ell_idx,
                    run: spec.run_idx,
                    seed: spec.params.seed,
                    phenotype: spec
                        .phenotype
                        .map_or("-".to_string(), |p| p.as_str().to_string()),
                    status: String::new(),
                    path: rel.clone(),
                    checksum: String::new(),
                    rhs_evaluations: 0,
                    steps_accepted: 0,
                    steps_rejected: 0,
                    coincident_pairs: 0,
                    clamped_points: None,
                    crockers: BTreeMap::new(),
                };
                match simulate(&spec.params) {
                    Ok(traj) => {
                        record.rhs_evaluations = traj.stats.rhs_evaluations;
                        record.steps_accepted = traj.stats.steps_accepted;
                        record.steps_rejected = traj.stats.steps_rejected;
                        record.coincident_pairs = traj.stats.coincident_pairs;
                        match write_trajectory(&root.join(&rel), &traj) {
                            Ok(()) => record.status = "ok".to_string(),
                            Err(e) => record.status = format!("failed: {e}"),
                        }
                    }
                    Err(e) => record.status = format!("failed: {e}"),
                }
                record
            })
            .collect();

        let mut combo_new = 0usize;
        for mut record in records {
            if record.is_ok() {
                record.checksum = store.checksum(&record.path)?;
                n_new += 1;
                combo_new += 1;
            } else {
                failed.push(format!("{}: {}", record.id, record.status));
            }
            store.manifest.upsert_run(record);
        }
        store.save()?;

        let first = combo_specs[0];
        println!(
            "simulate {}: {combo_new} integrated, {} failed",
            crate::store::combo_dir(first.params.c, first.params.ell),
            pending.len() - combo_new,
        );
    }

    println!(
        "simulate: {n_new} integrated, {n_done} already present, {} failed",
        failed.len()
    );
    if !failed.is_empty() {
        bail!("{} run(s) failed:\n  {}", failed.len(), failed.join("\n  "));
    }
    Ok(())
}

/// Shared by downstream commands: the full spec list for this config,
/// with an error when the library is incomplete.
pub fn complete_specs(config: &ExperimentConfig, store: &Store) -> Result<Vec<RunSpec>> {
    let specs = run_specs(&config.grid, &config.base)?;
    let missing = store.missing_runs(&specs);
    if !missing.is_empty() {
        bail!(
            "library incomplete; run `swarmtopo simulate` first (missing: {})",
            missing.join(", ")
        );
    }
    Ok(specs)
}

