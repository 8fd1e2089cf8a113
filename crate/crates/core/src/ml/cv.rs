//! Stratified cross-validation for the classification experiments.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use super::{
    pca_fit, pca_transform, train_one_vs_one, ConfusionMatrix, FeatureMatrix, MlError, SvmParams,
};

/// Split `labels` into `n_folds` disjoint index sets with identical
/// class composition. Every class count must divide evenly by the fold
/// count; the run library is built balanced, so a remainder means the
/// caller selected rows inconsistently and deserves an error rather
/// than a silently lopsided split.
///
/// Shuffling is driven entirely by `seed`; fold contents come back
/// sorted so downstream row order never depends on shuffle internals.
pub fn stratified_folds(
    labels: &[usize],
    n_folds: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, MlError> {
    if labels.is_empty() {
        return Err(MlError::EmptyMatrix);
    }
    if n_folds < 2 {
        return Err(MlError::InvalidParams(format!("need at least 2 folds, got {n_folds}")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    for (&class, members) in &by_class {
        if members.len() % n_folds != 0 {
            return Err(MlError::UnbalancedFolds {
                class,
                count: members.len(),
                folds: n_folds,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); n_folds];
    for members in by_class.into_values() {
        let mut pool = members;
        pool.shuffle(&mut rng);
        let per_fold = pool.len() / n_folds;
        for (f, chunk) in pool.chunks(per_fold).enumerate() {
            folds[f].extend_from_slice(chunk);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Anything that can be fit on one subset of rows and predict labels
/// for another.
pub trait CvPipeline {
    fn fit_predict(
        &self,
        train: &FeatureMatrix,
        train_labels: &[usize],
        test: &FeatureMatrix,
        n_classes: usize,
    ) -> Result<Vec<usize>, MlError>;
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub n_folds: usize,
    pub fold_accuracy: Vec<f64>,
    /// Unweighted mean of the fold accuracies. Folds are equal-sized
    /// here, so this equals the pooled accuracy.
    pub mean_accuracy: f64,
    /// Pooled over all held-out predictions.
    pub confusion: ConfusionMatrix,
}

/// Run `pipeline` over a stratified `n_folds`-fold split of `x`.
pub fn cross_validate<P: CvPipeline>(
    x: &FeatureMatrix,
    labels: &[usize],
    n_classes: usize,
    n_folds: usize,
    seed: u64,
    pipeline: &P,
) -> Result<CvReport, MlError> {
    if labels.len() != x.n_rows() {
        return Err(MlError::LabelCountMismatch { got: labels.len(), expected: x.n_rows() });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(MlError::LabelOutOfRange { label: bad, n_classes });
    }
    let folds = stratified_folds(labels, n_folds, seed)?;

    let mut fold_accuracy = Vec::with_capacity(n_folds);
    let mut confusion = ConfusionMatrix::new(n_classes);
    for test_idx in &folds {
        let train_idx: Vec<usize> = (0..x.n_rows()).filter(|i| !test_idx.contains(i)).collect();
        let train = x.select_rows(&train_idx);
        let test = x.select_rows(test_idx);
        let train_labels: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
        let predicted = pipeline.fit_predict(&train, &train_labels, &test, n_classes)?;
        if predicted.len() != test_idx.len() {
            return Err(MlError::LabelCountMismatch {
                got: predicted.len(),
                expected: test_idx.len(),
            });
        }
        let mut correct = 0usize;
        for (&i, &pred) in test_idx.iter().zip(&predicted) {
            if pred >= n_classes {
                return Err(MlError::LabelOutOfRange { label: pred, n_classes });
            }
            confusion.add(labels[i], pred);
            if pred == labels[i] {
                correct += 1;
            }
        }
        fold_accuracy.push(correct as f64 / test_idx.len().max(1) as f64);
    }
    let mean_accuracy = fold_accuracy.iter().sum::<f64>() / n_folds as f64;
    Ok(CvReport { n_folds, fold_accuracy, mean_accuracy, confusion })
}

/// Per-column affine scaler fit on training rows only.
struct Scaler {
    mean: Vec<f64>,
    inv_std: Vec<f64>,
}

impl Scaler {
    fn fit(x: &FeatureMatrix) -> Scaler {
        let (n, d) = (x.n_rows(), x.n_features());
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, &v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n.max(1) as f64;
        }
        let mut var = vec![0.0; d];
        for i in 0..n {
            for (j, &v) in x.row(i).iter().enumerate() {
                let c = v - mean[j];
                var[j] += c * c;
            }
        }
        let denom = (n as f64 - 1.0).max(1.0);
        let inv_std = var
            .iter()
            .map(|&v| {
                let sd = (v / denom).sqrt();
                // Constant columns pass through unscaled.
                if sd > 0.0 { 1.0 / sd } else { 1.0 }
            })
            .collect();
        Scaler { mean, inv_std }
    }

    fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix, MlError> {
        let d = self.mean.len();
        if x.n_features() != d {
            return Err(MlError::RowLengthMismatch { got: x.n_features(), expected: d });
        }
        let mut out = FeatureMatrix::new(d);
        let mut row = vec![0.0; d];
        for i in 0..x.n_rows() {
            for (j, &v) in x.row(i).iter().enumerate() {
                row[j] = (v - self.mean[j]) * self.inv_std[j];
            }
            out.push_row(x.labels()[i], &row)?;
        }
        Ok(out)
    }
}

/// The standard classification pipeline: optional PCA (fit on the
/// training fold), per-column standardization, then a one-vs-one
/// linear SVM.
#[derive(Debug, Clone, Default)]
pub struct SvmCvPipeline {
    /// `Some(k)` projects onto the top `k` principal components first.
    pub pca_components: Option<usize>,
    pub svm: SvmParams,
}

impl CvPipeline for SvmCvPipeline {
    fn fit_predict(
        &self,
        train: &FeatureMatrix,
        train_labels: &[usize],
        test: &FeatureMatrix,
        n_classes: usize,
    ) -> Result<Vec<usize>, MlError> {
        let (train_t, test_t) = match self.pca_components {
            Some(k) => {
                let model = pca_fit(train, k)?;
                (pca_transform(&model, train)?, pca_transform(&model, test)?)
            }
            None => (train.clone(), test.clone()),
        };
        let scaler = Scaler::fit(&train_t);
        let train_s = scaler.apply(&train_t)?;
        let test_s = scaler.apply(&test_t)?;
        let model = train_one_vs_one(&train_s, train_labels, n_classes, &self.svm)?;
        Ok(model.predict_all(&test_s))
    }
}
