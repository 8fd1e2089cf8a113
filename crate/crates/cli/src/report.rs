//! `swarmtopo report`: fold the cluster and classify outputs into one
//! human-readable report and a machine-readable summary.
//!
//! The summary file is the stable surface other tooling parses: per
//! feature set it carries both cluster accuracy modes and the mean CV
//! accuracy per PCA treatment, plus the headline comparisons between
//! topological and order-parameter features.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, FeatureSet};
use crate::experiments::{
    classify_table, cluster_table, write_text, write_toml, ClassifyReport, ClusterReport,
    CLASSIFY_REPORT_REL, CLUSTER_REPORT_REL,
};
use crate::store::Store;

pub const SUMMARY_REL: &str = "reports/summary.toml";

#[derive(Debug, Serialize, Deserialize)]
pub struct Meta {
    pub master_seed: u64,
    pub n_runs: usize,
    pub n_combos: usize,
    pub k: usize,
    pub folds: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub parameter_accuracy: f64,
    pub phenotype_accuracy: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct Claims {
    /// Best supervised mean accuracy over crocker sets (no PCA).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_supervised_topological: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_supervised_topological_feature: Option<String>,
    /// Best supervised mean accuracy over order-parameter sets (no PCA).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_supervised_order_params: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_supervised_order_params_feature: Option<String>,
    /// Parameter-mode cluster accuracy, concatenated position crockers
    /// minus concatenated order parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_parameter_gap: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Summary {
    pub meta: Meta,
    /// Feature set -> cluster accuracies.
    pub cluster: BTreeMap<String, ClusterSummary>,
    /// Feature set -> PCA treatment -> mean CV accuracy.
    pub classify: BTreeMap<String, BTreeMap<String, f64>>,
    pub claims: Claims,
}

pub fn cmd_report(config: &ExperimentConfig) -> Result<()> {
    let store = Store::open(config)?;

    let cluster: ClusterReport = read_toml(&store, CLUSTER_REPORT_REL)
        .context("no cluster report; run `swarmtopo cluster` first")?;
    let classify: ClassifyReport = read_toml(&store, CLASSIFY_REPORT_REL)
        .context("no classify report; run `swarmtopo classify` first")?;

    let summary = build_summary(config, &cluster, &classify);
    write_toml(&store, SUMMARY_REL, &summary)?;

    let mut text = String::new();
    text.push_str(&format!(
        "swarmtopo report: {} runs, master seed {}\n\n",
        summary.meta.n_runs, summary.meta.master_seed
    ));
    text.push_str(&cluster_table(&cluster));
    text.push('\n');
    text.push_str(&classify_table(&classify));
    text.push('\n');
    let c = &summary.claims;
    if let (Some(acc), Some(name)) = (
        c.best_supervised_topological,
        c.best_supervised_topological_feature.as_ref(),
    ) {
        text.push_str(&format!(
            "best supervised topological feature:     {name} at {:.1}%\n",
            100.0 * acc
        ));
    }
    if let (Some(acc), Some(name)) = (
        c.best_supervised_order_params,
        c.best_supervised_order_params_feature.as_ref(),
    ) {
        text.push_str(&format!(
            "best supervised order-parameter feature: {name} at {:.1}%\n",
            100.0 * acc
        ));
    }
    if let Some(gap) = c.cluster_parameter_gap {
        text.push_str(&format!(
            "cluster parameter-accuracy gap (crocker minus order params): {:+.1} points\n",
            100.0 * gap
        ));
    }
    write_text(&store, "reports/report.txt", &text)?;

    print!("{text}");
    Ok(())
}

fn read_toml<T: for<'de> Deserialize<'de>>(store: &Store, rel: &str) -> Result<T> {
    let path = store.abs(rel);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn build_summary(
    config: &ExperimentConfig,
    cluster: &ClusterReport,
    classify: &ClassifyReport,
) -> Summary {
    let mut cluster_map = BTreeMap::new();
    for cell in &cluster.cells {
        cluster_map.insert(
            cell.feature.clone(),
            ClusterSummary {
                parameter_accuracy: cell.parameter_accuracy,
                phenotype_accuracy: cell.phenotype_accuracy,
            },
        );
    }

    let mut classify_map: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for cell in &classify.cells {
        classify_map
            .entry(cell.feature.clone())
            .or_default()
            .insert(cell.pca.clone(), cell.mean_accuracy);
    }

    let mut claims = Claims::default();
    let topological: Vec<String> = config
        .feature_sets
        .iter()
        .filter(|s| s.is_topological())
        .map(|s| s.name())
        .collect();
    for cell in &classify.cells {
        if cell.pca != "none" {
            continue;
        }
        let slot = if topological.contains(&cell.feature) {
            (
                &mut claims.best_supervised_topological,
                &mut claims.best_supervised_topological_feature,
            )
        } else {
            (
                &mut claims.best_supervised_order_params,
                &mut claims.best_supervised_order_params_feature,
            )
        };
        if slot.0.map(|best| cell.mean_accuracy > best).unwrap_or(true) {
            *slot.0 = Some(cell.mean_accuracy);
            *slot.1 = Some(cell.feature.clone());
        }
    }

    let crocker_name = FeatureSet::Crocker {
        betti: crate::config::BettiChoice::Both,
        delayed: false,
    }
    .name();
    let op_all_name = "op-all";
    if let (Some(a), Some(b)) = (cluster_map.get(&crocker_name), cluster_map.get(op_all_name)) {
        claims.cluster_parameter_gap = Some(a.parameter_accuracy - b.parameter_accuracy);
    }

    Summary {
        meta: Meta {
            master_seed: config.grid.master_seed,
            n_runs: config.grid.n_runs(),
            n_combos: config.grid.n_combos(),
            k: config.k,
            folds: config.folds,
        },
        cluster: cluster_map,
        classify: classify_map,
        claims,
    }
}
