//! Scoring clusterings against ground-truth labels.

use super::MlError;

/// Square confusion matrix; rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix { n_classes, counts: vec![0; n_classes * n_classes] }
    }

    pub fn add(&mut self, true_class: usize, predicted: usize) {
        self.counts[true_class * self.n_classes + predicted] += 1;
    }

    pub fn get(&self, true_class: usize, predicted: usize) -> u64 {
        self.counts[true_class * self.n_classes + predicted]
    }

    pub fn row(&self, true_class: usize) -> &[u64] {
        &self.counts[true_class * self.n_classes..(true_class + 1) * self.n_classes]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Trace over total.
    pub fn accuracy(&self) -> f64 {
        let correct: u64 = (0..self.n_classes).map(|i| self.get(i, i)).sum();
        correct as f64 / self.total().max(1) as f64
    }
}

/// Minimum-cost perfect assignment of rows to columns of a square cost
/// matrix (Jonker-Volgenant style shortest augmenting paths, O(n^3)).
/// Returns for each row its assigned column.
pub(crate) fn hungarian_min(cost: &[i64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    const INF: i64 = i64::MAX / 4;
    // 1-indexed potentials/matching, standard formulation.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut match_col = vec![0usize; n + 1]; // column -> row
    for i in 1..=n {
        let mut links = vec![0usize; n + 1];
        let mut mins = vec![INF; n + 1];
        let mut visited = vec![false; n + 1];
        let mut j0 = 0usize;
        match_col[0] = i;
        loop {
            visited[j0] = true;
            let i0 = match_col[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if visited[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < mins[j] {
                    mins[j] = cur;
                    links[j] = j0;
                }
                if mins[j] < delta {
                    delta = mins[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if visited[j] {
                    u[match_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    mins[j] -= delta;
                }
            }
            j0 = j1;
            if match_col[j0] == 0 {
                break;
            }
        }
        // Augment along the alternating path.
        while j0 != 0 {
            let j1 = links[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if match_col[j] != 0 {
            row_to_col[match_col[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// How a clustering is matched to ground truth before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccuracyMode {
    /// Each cluster is matched one-to-one with a label so that the
    /// total agreement is maximal (optimal assignment). Suited to
    /// parameter recovery, where clusters and labels are both
    /// interchangeable groups of equal standing.
    Parameter,
    /// Each cluster adopts its majority label (several clusters may
    /// adopt the same one). Suited to phenotype recovery, where
    /// multiple clusters may legitimately describe one phenotype.
    Phenotype,
}

/// A scored clustering: overall accuracy, the label adopted by each
/// cluster, and the induced confusion matrix (true label x adopted
/// label of the sample's cluster).
#[derive(Debug, Clone)]
pub struct ClusterEvaluation {
    pub mode: AccuracyMode,
    pub accuracy: f64,
    /// Label index adopted by each cluster.
    pub cluster_labels: Vec<usize>,
    pub confusion: ConfusionMatrix,
}

/// Score `assignment` (values in `0..k`) against `labels` (values in
/// `0..n_labels`).
pub fn evaluate_clusters(
    assignment: &[usize],
    k: usize,
    labels: &[usize],
    n_labels: usize,
    mode: AccuracyMode,
) -> Result<ClusterEvaluation, MlError> {
    if assignment.len() != labels.len() {
        return Err(MlError::LabelCountMismatch {
            got: labels.len(),
            expected: assignment.len(),
        });
    }
    if assignment.is_empty() {
        return Err(MlError::EmptyMatrix);
    }
    if let Some(&bad) = assignment.iter().find(|&&a| a >= k) {
        return Err(MlError::LabelOutOfRange { label: bad, n_classes: k });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_labels) {
        return Err(MlError::LabelOutOfRange { label: bad, n_classes: n_labels });
    }

    let n = assignment.len();
    let mut contingency = vec![0u64; k * n_labels];
    for (&a, &l) in assignment.iter().zip(labels) {
        contingency[a * n_labels + l] += 1;
    }

    let cluster_labels: Vec<usize> = match mode {
        AccuracyMode::Parameter => {
            // Optimal one-to-one matching on the (padded) square
            // contingency; maximize agreement = minimize negated counts.
            let side = k.max(n_labels);
            let mut cost = vec![0i64; side * side];
            for a in 0..k {
                for l in 0..n_labels {
                    cost[a * side + l] = -(contingency[a * n_labels + l] as i64);
                }
            }
            hungarian_min(&cost, side).into_iter().take(k).collect()
        }
        AccuracyMode::Phenotype => (0..k)
            .map(|a| {
                // Majority label; ties go to the lowest label index.
                (0..n_labels)
                    .max_by(|&x, &y| {
                        contingency[a * n_labels + x]
                            .cmp(&contingency[a * n_labels + y])
                            .then(y.cmp(&x))
                    })
                    .unwrap()
            })
            .collect(),
    };

    let side = cluster_labels.iter().copied().max().unwrap_or(0).max(n_labels - 1) + 1;
    let mut confusion = ConfusionMatrix::new(side);
    let mut correct = 0u64;
    for (&a, &l) in assignment.iter().zip(labels) {
        let adopted = cluster_labels[a];
        confusion.add(l, adopted);
        if adopted == l {
            correct += 1;
        }
    }
    Ok(ClusterEvaluation {
        mode,
        accuracy: correct as f64 / n as f64,
        cluster_labels,
        confusion,
    })
}
