//! Parameter and phenotype recovery from descriptor features.
//!
//! Unsupervised: PAM k-medoids over Euclidean feature distances, scored
//! against the true labels either by optimal cluster-to-label matching
//! (parameter recovery) or by cluster-majority vote (phenotype
//! recovery). Supervised: one-vs-one linear SVMs, optionally preceded by
//! PCA, evaluated with seeded stratified k-fold cross-validation.
//!
//! Everything here is deterministic given its inputs (and the fold seed
//! where applicable); there is no internal randomness.

mod assign;
mod cv;
mod kmedoids;
mod pca;
mod svm;

pub use assign::{evaluate_clusters, AccuracyMode, ClusterEvaluation, ConfusionMatrix};
pub use cv::{cross_validate, stratified_folds, CvPipeline, CvReport, SvmCvPipeline};
pub use kmedoids::{pam_kmedoids, ClusterResult};
pub use pca::{pca_fit, pca_transform, PcaModel};
pub use svm::{train_binary, train_one_vs_one, BinaryHyperplane, OvOModel, PairMachine, SvmParams};

use thiserror::Error;

use crate::sim::Phenotype;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("feature matrix is empty")]
    EmptyMatrix,
    #[error("row has {got} features, matrix has {expected}")]
    RowLengthMismatch { got: usize, expected: usize },
    #[error("need 1 <= k <= {n} medoids, got {k}")]
    InvalidK { k: usize, n: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("{got} labels for {expected} rows")]
    LabelCountMismatch { got: usize, expected: usize },
    #[error("class {class} has {count} samples, not divisible into {folds} folds")]
    UnbalancedFolds { class: usize, count: usize, folds: usize },
    #[error("need at least two distinct classes, got {got}")]
    TooFewClasses { got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("solver did not reach tolerance {tol} within {max_epochs} epochs (gap {gap})")]
    NoConvergence { tol: f64, max_epochs: u64, gap: f64 },
    #[error("non-finite value in feature data")]
    NonFinite,
}

/// Identifying labels carried alongside each feature row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowLabel {
    pub c: f64,
    pub ell: f64,
    /// Flat index of the `(C, ell)` grid combination.
    pub combo: usize,
    /// Replicate index within the combination.
    pub run: usize,
    pub phenotype: Phenotype,
}

/// Dense row-major feature matrix with per-row provenance labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_features: usize,
    data: Vec<f64>,
    labels: Vec<RowLabel>,
}

impl FeatureMatrix {
    pub fn new(n_features: usize) -> Self {
        FeatureMatrix { n_features, data: Vec::new(), labels: Vec::new() }
    }

    pub fn push_row(&mut self, label: RowLabel, row: &[f64]) -> Result<(), MlError> {
        if row.len() != self.n_features {
            return Err(MlError::RowLengthMismatch {
                got: row.len(),
                expected: self.n_features,
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(MlError::NonFinite);
        }
        self.data.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> &[RowLabel] {
        &self.labels
    }

    /// Copy out the given rows (in the given order) into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix::new(self.n_features);
        for &i in idx {
            out.data.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i]);
        }
        out
    }

    /// Combination indices of all rows.
    pub fn combo_labels(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.combo).collect()
    }

    /// Phenotype indices of all rows.
    pub fn phenotype_labels(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.phenotype.index()).collect()
    }

    pub(crate) fn require_nonempty(&self) -> Result<(), MlError> {
        if self.n_rows() == 0 || self.n_features == 0 {
            Err(MlError::EmptyMatrix)
        } else {
            Ok(())
        }
    }
}

/// Euclidean distances between feature rows.
pub fn feature_distances(x: &FeatureMatrix) -> Result<crate::tda::DistanceMatrix, MlError> {
    x.require_nonempty()?;
    crate::tda::DistanceMatrix::from_cloud(x.data(), x.n_features())
        .map_err(|_| MlError::NonFinite)
}
