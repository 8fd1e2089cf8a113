//! `swarmtopo cluster` and `swarmtopo classify`: the two experiment
//! sweeps, one report cell per configured feature set (and, for the
//! supervised sweep, per PCA treatment).
//!
//! Each command writes a machine-readable TOML report plus a plain
//! text table; confusion matrices go to separate integer text files so
//! determinism checks can compare them byte for byte.

use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use swarmtopo::io::{read_feature_table, write_atomic};
use swarmtopo::ml::{
    cross_validate, evaluate_clusters, feature_distances, pam_kmedoids, AccuracyMode,
    ConfusionMatrix, FeatureMatrix, RowLabel, SvmCvPipeline, SvmParams,
};
use swarmtopo::sim::Phenotype;

use crate::config::{ExperimentConfig, FeatureSet, PcaChoice};
use crate::store::Store;

pub const CLUSTER_REPORT_REL: &str = "reports/cluster.toml";
pub const CLASSIFY_REPORT_REL: &str = "reports/classify.toml";

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterCell {
    pub feature: String,
    pub n_rows: usize,
    pub n_features: usize,
    pub cost: f64,
    pub parameter_accuracy: f64,
    pub phenotype_accuracy: f64,
    pub parameter_confusion: String,
    pub phenotype_confusion: String,
    /// Run ids of the chosen medoids, in medoid order.
    pub medoids: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub cells: Vec<ClusterCell>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassifyCell {
    pub feature: String,
    pub pca: String,
    pub n_features: usize,
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub confusion: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub folds: usize,
    pub n_classes: usize,
    pub cells: Vec<ClassifyCell>,
}

/// Run id in the same form the library uses, from a table row label.
fn label_id(l: &RowLabel) -> String {
    format!("c{}_l{}_run{:02}", l.c, l.ell, l.run)
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

fn write_confusion(path: &Path, m: &ConfusionMatrix) -> Result<()> {
    write_atomic(path, |out| {
        writeln!(out, "swarmtopo-confusion v1")?;
        writeln!(out, "classes {}", m.n_classes)?;
        for i in 0..m.n_classes {
            let row: Vec<String> = m.row(i).iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    })?;
    Ok(())
}

pub(crate) fn write_toml<T: Serialize>(store: &Store, rel: &str, value: &T) -> Result<()> {
    store.ensure_parent(rel)?;
    let text = toml::to_string_pretty(value).context("serializing report")?;
    write_atomic(&store.abs(rel), |out| out.write_all(text.as_bytes()))?;
    Ok(())
}

pub(crate) fn write_text(store: &Store, rel: &str, text: &str) -> Result<()> {
    store.ensure_parent(rel)?;
    write_atomic(&store.abs(rel), |out| out.write_all(text.as_bytes()))?;
    Ok(())
}

/// Load one configured feature table, verifying it against the manifest.
fn load_features(store: &Store, config: &ExperimentConfig, set: &FeatureSet) -> Result<FeatureMatrix> {
    let name = set.name();
    let record = store
        .manifest
        .feature_set(&name)
        .with_context(|| format!("feature set {name} not built; run `swarmtopo features`"))?;
    if !store.artifact_valid(&record.path, &record.checksum) {
        bail!("feature table {name} is missing or corrupt; re-run features");
    }
    Ok(read_feature_table(&store.abs(&record.path), &config.grid)?)
}

// --------------------------------------------------------------- cluster

pub fn cmd_cluster(config: &ExperimentConfig) -> Result<()> {
    let store = Store::open(config)?;
    let n_combos = config.grid.n_combos();
    let mut cells = Vec::new();

    for set in &config.feature_sets {
        let x = load_features(&store, config, set)?;
        let d = feature_distances(&x)?;
        let result = pam_kmedoids(&d, config.k)?;

        let parameter = evaluate_clusters(
            &result.assignment,
            result.k,
            &x.combo_labels(),
            n_combos,
            AccuracyMode::Parameter,
        )?;
        let phenotype = evaluate_clusters(
            &result.assignment,
            result.k,
            &x.phenotype_labels(),
            Phenotype::ALL.len(),
            AccuracyMode::Phenotype,
        )?;

        let name = set.name();
        let param_rel = format!("reports/confusion/cluster-{name}-parameter.txt");
        let phen_rel = format!("reports/confusion/cluster-{name}-phenotype.txt");
        store.ensure_parent(&param_rel)?;
        write_confusion(&store.abs(&param_rel), &parameter.confusion)?;
        write_confusion(&store.abs(&phen_rel), &phenotype.confusion)?;

        println!(
            "cluster {name}: parameter {} phenotype {}",
            pct(parameter.accuracy),
            pct(phenotype.accuracy)
        );
        cells.push(ClusterCell {
            feature: name,
            n_rows: x.n_rows(),
            n_features: x.n_features(),
            cost: result.cost,
            parameter_accuracy: parameter.accuracy,
            phenotype_accuracy: phenotype.accuracy,
            parameter_confusion: param_rel,
            phenotype_confusion: phen_rel,
            medoids: result.medoids.iter().map(|&m| label_id(&x.labels()[m])).collect(),
        });
    }

    let report = ClusterReport { k: config.k, cells };
    write_toml(&store, CLUSTER_REPORT_REL, &report)?;
    write_text(&store, "reports/cluster.txt", &cluster_table(&report))?;
    Ok(())
}

pub fn cluster_table(report: &ClusterReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("unsupervised k-medoids, k = {}\n\n", report.k));
    out.push_str(&format!(
        "{:<10} {:>8} {:>11} {:>11}\n",
        "feature", "dims", "parameter", "phenotype"
    ));
    for cell in &report.cells {
        out.push_str(&format!(
            "{:<10} {:>8} {:>11} {:>11}\n",
            cell.feature,
            cell.n_features,
            pct(cell.parameter_accuracy),
            pct(cell.phenotype_accuracy)
        ));
    }
    out
}

// -------------------------------------------------------------- classify

pub fn cmd_classify(config: &ExperimentConfig, only_pca: Option<PcaChoice>) -> Result<()> {
    let store = Store::open(config)?;
    let n_classes = config.grid.n_combos();
    let pca_choices: Vec<PcaChoice> = config
        .pca
        .iter()
        .copied()
        .filter(|p| only_pca.map(|want| want == *p).unwrap_or(true))
        .collect();
    if pca_choices.is_empty() {
        bail!("--pca filter excludes every configured PCA treatment");
    }

    let mut cells = Vec::new();
    for set in &config.feature_sets {
        let x = load_features(&store, config, set)?;
        let labels = x.combo_labels();
        for &pca in &pca_choices {
            let pipeline = SvmCvPipeline {
                pca_components: pca.components(),
                svm: SvmParams { c: config.svm_c, ..SvmParams::default() },
            };
            let report = cross_validate(
                &x,
                &labels,
                n_classes,
                config.folds,
                config.grid.master_seed,
                &pipeline,
            )?;

            let name = set.name();
            let conf_rel = format!("reports/confusion/classify-{name}-{pca}.txt");
            store.ensure_parent(&conf_rel)?;
            write_confusion(&store.abs(&conf_rel), &report.confusion)?;

            println!("classify {name} pca {pca}: {}", pct(report.mean_accuracy));
            cells.push(ClassifyCell {
                feature: name,
                pca: pca.to_string(),
                n_features: x.n_features(),
                fold_accuracy: report.fold_accuracy,
                mean_accuracy: report.mean_accuracy,
                confusion: conf_rel,
            });
        }
    }

    let report = ClassifyReport { folds: config.folds, n_classes, cells };
    write_toml(&store, CLASSIFY_REPORT_REL, &report)?;
    write_text(&store, "reports/classify.txt", &classify_table(&report))?;
    Ok(())
}

pub fn classify_table(report: &ClassifyReport) -> String {
    // One row per feature set, one accuracy column per PCA treatment.
    let mut features: Vec<&str> = Vec::new();
    let mut pcas: Vec<&str> = Vec::new();
    for cell in &report.cells {
        if !features.contains(&cell.feature.as_str()) {
            features.push(&cell.feature);
        }
        if !pcas.contains(&cell.pca.as_str()) {
            pcas.push(&cell.pca);
        }
    }

    let mut out = String::new();
    out.push_str(&format!(
        "one-vs-one linear SVM, {}-fold stratified CV, {} parameter classes\n\n",
        report.folds, report.n_classes
    ));
    out.push_str(&format!("{:<10} {:>8}", "feature", "dims"));
    for pca in &pcas {
        let head = if *pca == "none" { "raw".to_string() } else { format!("pca-{pca}") };
        out.push_str(&format!(" {head:>8}"));
    }
    out.push('\n');
    for feature in features {
        let dims = report
            .cells
            .iter()
            .find(|c| c.feature == feature)
            .map(|c| c.n_features)
            .unwrap_or(0);
        out.push_str(&format!("{feature:<10} {dims:>8}"));
        for pca in &pcas {
            let text = report
                .cells
                .iter()
                .find(|c| c.feature == feature && c.pca == *pca)
                .map(|c| pct(c.mean_accuracy))
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!(" {text:>8}"));
        }
        out.push('\n');
    }
    out
}
