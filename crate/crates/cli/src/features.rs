//! `swarmtopo features`: turn the run library into feature matrices.
//!
//! The order-parameter route reads each trajectory once and emits all
//! requested channel tables in the same pass. The crocker route runs
//! clamp -> embed -> normalize -> persistence per run, caches the
//! resulting crocker matrices as per-run files (validated by checksum
//! on re-invocation), and then flattens them into feature tables.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use swarmtopo::descriptors::{order_param_features, order_param_series};
use swarmtopo::io::{read_crocker, read_trajectory, write_crocker, write_feature_table};
use swarmtopo::ml::{FeatureMatrix, RowLabel};
use swarmtopo::sim::{RunSpec, Trajectory};
use swarmtopo::tda::{
    clamp_escapes, crocker_features, crocker_matrices, delay_embed, position_clouds,
    Crocker, EpsilonGrid, CLAMP_THRESHOLD, NORMALIZE_CONSTANT,
};

use crate::config::{BettiChoice, ExperimentConfig, FeatureSet};
use crate::simulate::complete_specs;
use crate::store::{crocker_rel, feature_table_rel, ArtifactRecord, FeatureSetRecord, Store};

/// Which half of the feature families one invocation builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    OrderParams,
    Crocker,
}

pub fn cmd_features(
    config: &ExperimentConfig,
    kind: FeatureKind,
    betti: Option<BettiChoice>,
    delayed_only: bool,
) -> Result<()> {
    let mut store = Store::open(config)?;
    let specs = complete_specs(config, &store)?;

    let sets: Vec<FeatureSet> = config
        .feature_sets
        .iter()
        .filter(|set| match (kind, set) {
            (FeatureKind::OrderParams, FeatureSet::OrderParams(_)) => true,
            (FeatureKind::Crocker, FeatureSet::Crocker { betti: b, delayed }) => {
                betti.map(|want| want == *b).unwrap_or(true) && (!delayed_only || *delayed)
            }
            _ => false,
        })
        .cloned()
        .collect();
    if sets.is_empty() {
        bail!("no configured feature set matches the requested kind/filters");
    }

    match kind {
        FeatureKind::OrderParams => order_param_tables(config, &mut store, &specs, &sets),
        FeatureKind::Crocker => crocker_tables(config, &mut store, &specs, &sets),
    }
}

fn run_label(spec: &RunSpec, config: &ExperimentConfig) -> Result<RowLabel> {
    let phenotype = spec.phenotype.with_context(|| {
        format!(
            "no phenotype is defined for (C, ell) = ({}, {}); feature tables \
             require the standard grid values",
            spec.params.c, spec.params.ell
        )
    })?;
    Ok(RowLabel {
        c: spec.params.c,
        ell: spec.params.ell,
        combo: spec.combo_idx(&config.grid),
        run: spec.run_idx,
        phenotype,
    })
}

/// Load one run's trajectory after verifying it against the manifest.
fn load_trajectory(store: &Store, spec: &RunSpec) -> Result<Trajectory> {
    let id = spec.id();
    let record = store.run(&id).with_context(|| format!("{id} missing from manifest"))?;
    if !store.artifact_valid(&record.path, &record.checksum) {
        bail!("trajectory for {id} is missing or corrupt; re-run simulate");
    }
    Ok(read_trajectory(&store.abs(&record.path))?)
}

fn write_set_record(
    store: &mut Store,
    set: &FeatureSet,
    x: &FeatureMatrix,
    specs: &[RunSpec],
) -> Result<()> {
    let rel = feature_table_rel(&set.name());
    store.ensure_parent(&rel)?;
    write_feature_table(&store.abs(&rel), x)?;
    let checksum = store.checksum(&rel)?;
    store.manifest.upsert_feature_set(FeatureSetRecord {
        name: set.name(),
        kind: match set {
            FeatureSet::OrderParams(_) => "order-params".to_string(),
            FeatureSet::Crocker { .. } => "crocker".to_string(),
        },
        n_rows: x.n_rows(),
        n_features: x.n_features(),
        path: rel,
        checksum,
        source_runs: specs.iter().map(|s| s.id()).collect(),
    });
    store.save()?;
    println!("features {}: {} x {} written", set.name(), x.n_rows(), x.n_features());
    Ok(())
}

fn set_is_fresh(store: &Store, set: &FeatureSet) -> bool {
    store
        .manifest
        .feature_set(&set.name())
        .map(|r| store.artifact_valid(&r.path, &r.checksum))
        .unwrap_or(false)
}

// ------------------------------------------------------ order parameters

fn order_param_tables(
    config: &ExperimentConfig,
    store: &mut Store,
    specs: &[RunSpec],
    sets: &[FeatureSet],
) -> Result<()> {
    let pending: Vec<&FeatureSet> = sets.iter().filter(|s| !set_is_fresh(store, s)).collect();
    if pending.is_empty() {
        println!("features: all order-parameter tables up to date");
        return Ok(());
    }

    let mut tables: Vec<FeatureMatrix> = pending
        .iter()
        .map(|set| {
            let FeatureSet::OrderParams(chs) = set else { unreachable!() };
            FeatureMatrix::new(87 * chs.len())
        })
        .collect();

    for spec in specs {
        let traj = load_trajectory(store, spec)?;
        let series = order_param_series(&traj);
        let label = run_label(spec, config)?;
        for (set, table) in pending.iter().zip(&mut tables) {
            let FeatureSet::OrderParams(chs) = set else { unreachable!() };
            let row = order_param_features(&series, chs)?;
            table.push_row(label, &row)?;
        }
    }

    for (set, table) in pending.iter().zip(&tables) {
        write_set_record(store, set, table, specs)?;
    }
    Ok(())
}

// --------------------------------------------------------------- crocker

fn route_name(delayed: bool) -> &'static str {
    if delayed {
        "del"
    } else {
        "pos"
    }
}

fn crocker_key(delayed: bool, betti_dim: usize) -> String {
    format!("{}-b{}", route_name(delayed), betti_dim)
}

/// Per-run crocker computation for one route; returns the artifacts
/// written, keyed as in the run record.
fn compute_route(
    store: &Store,
    spec: &RunSpec,
    traj: &Trajectory,
    delayed: bool,
    delay: usize,
    grid: &EpsilonGrid,
) -> Result<BTreeMap<String, ArtifactRecord>> {
    let mut seq = if delayed {
        delay_embed(traj, delay)?
    } else {
        position_clouds(traj)?
    };
    swarmtopo::tda::normalize_sequence(&mut seq, NORMALIZE_CONSTANT)?;
    let (b0, b1) = crocker_matrices(&seq, grid)?;

    let mut out = BTreeMap::new();
    for crocker in [&b0, &b1] {
        let rel = crocker_rel(spec, route_name(delayed), crocker.betti_dim);
        write_crocker(&store.abs(&rel), &spec.id(), crocker)?;
        let checksum = store.checksum(&rel)?;
        out.insert(
            crocker_key(delayed, crocker.betti_dim),
            ArtifactRecord { path: rel, checksum },
        );
    }
    Ok(out)
}

fn crocker_tables(
    config: &ExperimentConfig,
    store: &mut Store,
    specs: &[RunSpec],
    sets: &[FeatureSet],
) -> Result<()> {
    let routes: Vec<bool> = {
        let mut r = Vec::new();
        for set in sets {
            if let FeatureSet::Crocker { delayed, .. } = set {
                if !r.contains(delayed) {
                    r.push(*delayed);
                }
            }
        }
        r.sort_unstable(); // position route first
        r
    };
    let grid = EpsilonGrid::standard();

    // Stage 1: per-run crocker files, one combo at a time.
    let mut by_combo: BTreeMap<(usize, usize), Vec<&RunSpec>> = BTreeMap::new();
    for spec in specs {
        by_combo.entry((spec.c_idx, spec.ell_idx)).or_default().push(spec);
    }

    for (_, combo_specs) in by_combo {
        let pending: Vec<&RunSpec> = combo_specs
            .iter()
            .copied()
            .filter(|spec| {
                let record = store.run(&spec.id());
                !routes.iter().all(|&delayed| {
                    (0..2).all(|dim| {
                        record
                            .and_then(|r| r.crockers.get(&crocker_key(delayed, dim)))
                            .map(|a| store.artifact_valid(&a.path, &a.checksum))
                            .unwrap_or(false)
                    })
                })
            })
            .collect();
        if pending.is_empty() {
            continue;
        }

        let results: Vec<(String, u64, BTreeMap<String, ArtifactRecord>)> = pending
            .par_iter()
            .map(|spec| {
                let traj = load_trajectory(store, spec)?;
                let (clamped, report) = clamp_escapes(&traj, CLAMP_THRESHOLD);
                let mut artifacts = BTreeMap::new();
                for &delayed in &routes {
                    artifacts.extend(compute_route(
                        store,
                        spec,
                        &clamped,
                        delayed,
                        config.delay,
                        &grid,
                    )?);
                }
                Ok((spec.id(), report.n_clamped() as u64, artifacts))
            })
            .collect::<Result<_>>()?;

        for (id, clamped, artifacts) in results {
            let record = store
                .manifest
                .run_mut(&id)
                .with_context(|| format!("{id} missing from manifest"))?;
            record.clamped_points = Some(clamped);
            record.crockers.extend(artifacts);
        }
        store.save()?;
        let first = combo_specs[0];
        println!(
            "features {}: crockers ready",
            crate::store::combo_dir(first.params.c, first.params.ell)
        );
    }

    // Stage 2: flatten per-run crockers into one table per set.
    for set in sets {
        if set_is_fresh(store, set) {
            println!("features {}: up to date", set.name());
            continue;
        }
        let FeatureSet::Crocker { betti, delayed } = set else { unreachable!() };
        let mut table: Option<FeatureMatrix> = None;
        for spec in specs {
            let record = store
                .run(&spec.id())
                .with_context(|| format!("{} missing from manifest", spec.id()))?;
            let mut parts: Vec<Crocker> = Vec::new();
            for dim in [0usize, 1] {
                let wanted = match betti {
                    BettiChoice::B0 => dim == 0,
                    BettiChoice::B1 => dim == 1,
                    BettiChoice::Both => true,
                };
                if !wanted {
                    continue;
                }
                let key = crocker_key(*delayed, dim);
                let artifact = record.crockers.get(&key).with_context(|| {
                    format!("{} lacks crocker {key}; re-run features", spec.id())
                })?;
                let (_, crocker) = read_crocker(&store.abs(&artifact.path))?;
                parts.push(crocker);
            }
            let refs: Vec<&Crocker> = parts.iter().collect();
            let row = crocker_features(&refs)?;
            let table = table.get_or_insert_with(|| FeatureMatrix::new(row.len()));
            table.push_row(run_label(spec, config)?, &row)?;
        }
        let table = table.context("empty run list")?;
        write_set_record(store, set, &table, specs)?;
    }
    Ok(())
}
