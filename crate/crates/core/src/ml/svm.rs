//! Linear support vector machines, trained in the dual.
//!
//! The bias term is folded into the kernel as a constant feature
//! (`K(x, z) = x . z + 1`), which removes the equality constraint from
//! the dual and lets plain coordinate descent solve it: each pass
//! clips `alpha_i - G_i / Q_ii` into `[0, C]`. Convergence is measured
//! by the primal-dual gap, so the returned hyperplane carries a
//! certificate of how close to optimal it is.
//!
//! One-vs-one training computes the feature Gram matrix once and lets
//! every pair machine index into it; with hundreds of wide rows the
//! Gram dominates the cost and the per-pair solves are nearly free.

use super::{FeatureMatrix, MlError};

#[derive(Debug, Clone)]
pub struct SvmParams {
    /// Box constraint on the dual variables (soft-margin strength).
    pub c: f64,
    /// Relative duality-gap tolerance.
    pub tol: f64,
    /// Upper bound on coordinate-descent passes before giving up.
    pub max_epochs: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, tol: 1e-6, max_epochs: 10_000 }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<(), MlError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(MlError::InvalidParams(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(MlError::InvalidParams(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_epochs == 0 {
            return Err(MlError::InvalidParams("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained separating hyperplane `sign(w . x + b)`.
#[derive(Debug, Clone)]
pub struct BinaryHyperplane {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Coordinate-descent passes used.
    pub epochs: u64,
    /// Final relative duality gap (optimality certificate).
    pub gap: f64,
}

impl BinaryHyperplane {
    pub fn decision(&self, row: &[f64]) -> f64 {
        let mut s = self.bias;
        for (&w, &x) in self.weights.iter().zip(row) {
            s += w * x;
        }
        s
    }
}

/// One pair machine inside a one-vs-one model. `pos` is the class on
/// the positive side of the hyperplane; `pos < neg` always.
#[derive(Debug, Clone)]
pub struct PairMachine {
    pub pos: usize,
    pub neg: usize,
    pub plane: BinaryHyperplane,
}

/// One-vs-one multiclass model: one hyperplane per unordered class
/// pair, majority vote at prediction time.
#[derive(Debug, Clone)]
pub struct OvOModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub machines: Vec<PairMachine>,
}

/// Sub-Gram view selecting `idx` rows/columns of a full n x n Gram.
struct GramView<'a> {
    data: &'a [f64],
    n: usize,
    idx: &'a [usize],
}

impl GramView<'_> {
    fn len(&self) -> usize {
        self.idx.len()
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx[i] * self.n + self.idx[j]]
    }
}

struct DualSolution {
    alpha: Vec<f64>,
    epochs: u64,
    gap: f64,
}

/// Coordinate descent on the augmented-kernel dual. `y` holds +-1.
fn solve_dual(k: &GramView<'_>, y: &[f64], params: &SvmParams) -> Result<DualSolution, MlError> {
    let n = k.len();
    let c = params.c;
    let mut alpha = vec![0.0f64; n];
    // g[i] = (Q alpha)_i with Q_ij = y_i y_j (K_ij + 1); kept incrementally.
    let mut g = vec![0.0f64; n];
    let mut last_gap = f64::INFINITY;
    for epoch in 1..=params.max_epochs {
        for i in 0..n {
            let grad = g[i] - 1.0;
            let qii = k.get(i, i) + 1.0; // >= 1: the +1 bias feature
            let next = (alpha[i] - grad / qii).clamp(0.0, c);
            let delta = next - alpha[i];
            if delta != 0.0 {
                alpha[i] = next;
                let dyi = delta * y[i];
                for j in 0..n {
                    g[j] += dyi * y[j] * (k.get(i, j) + 1.0);
                }
            }
        }
        // Duality gap from the maintained products: with f_i = y_i g_i,
        //   P = 1/2 a'Qa + C sum max(0, 1 - y_i f_i),  D = sum a - 1/2 a'Qa,
        // so P - D = sum_i [a_i g_i - a_i + C max(0, 1 - g_i)].
        let mut quad = 0.0;
        let mut linear = 0.0;
        let mut hinge = 0.0;
        for i in 0..n {
            quad += alpha[i] * g[i];
            linear += alpha[i];
            hinge += (1.0 - g[i]).max(0.0);
        }
        let primal = 0.5 * quad + c * hinge;
        let gap = quad - linear + c * hinge;
        last_gap = gap;
        if gap <= params.tol * primal.abs().max(1.0) {
            return Ok(DualSolution { alpha, epochs: epoch, gap });
        }
    }
    Err(MlError::NoConvergence {
        tol: params.tol,
        max_epochs: params.max_epochs,
        gap: last_gap,
    })
}

/// Fold a dual solution back into primal weights over the given rows.
fn recover_plane(
    x: &FeatureMatrix,
    idx: &[usize],
    y: &[f64],
    sol: &DualSolution,
) -> BinaryHyperplane {
    let d = x.n_features();
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    for (t, &i) in idx.iter().enumerate() {
        let coef = sol.alpha[t] * y[t];
        if coef != 0.0 {
            for (w, &xi) in weights.iter_mut().zip(x.row(i)) {
                *w += coef * xi;
            }
            bias += coef;
        }
    }
    BinaryHyperplane { weights, bias, epochs: sol.epochs, gap: sol.gap }
}

fn full_gram(x: &FeatureMatrix) -> Vec<f64> {
    let n = x.n_rows();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for (&a, &b) in x.row(i).iter().zip(x.row(j)) {
                s += a * b;
            }
            gram[i * n + j] = s;
            gram[j * n + i] = s;
        }
    }
    gram
}

/// Train a single hyperplane; `y` holds +-1 per row of `x`.
pub fn train_binary(
    x: &FeatureMatrix,
    y: &[f64],
    params: &SvmParams,
) -> Result<BinaryHyperplane, MlError> {
    params.validate()?;
    x.require_nonempty()?;
    if y.len() != x.n_rows() {
        return Err(MlError::LabelCountMismatch { got: y.len(), expected: x.n_rows() });
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(MlError::InvalidParams("labels must be +1 or -1".into()));
    }
    let n_pos = y.iter().filter(|&&v| v == 1.0).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(MlError::TooFewClasses { got: 1 });
    }
    let gram = full_gram(x);
    let idx: Vec<usize> = (0..x.n_rows()).collect();
    let view = GramView { data: &gram, n: x.n_rows(), idx: &idx };
    let sol = solve_dual(&view, y, params)?;
    Ok(recover_plane(x, &idx, y, &sol))
}

/// Train one machine per class pair. Classes are `labels[i] < n_classes`;
/// pairs with an empty side are skipped.
pub fn train_one_vs_one(
    x: &FeatureMatrix,
    labels: &[usize],
    n_classes: usize,
    params: &SvmParams,
) -> Result<OvOModel, MlError> {
    params.validate()?;
    x.require_nonempty()?;
    if labels.len() != x.n_rows() {
        return Err(MlError::LabelCountMismatch { got: labels.len(), expected: x.n_rows() });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(MlError::LabelOutOfRange { label: bad, n_classes });
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let present = members.iter().filter(|m| !m.is_empty()).count();
    if present < 2 {
        return Err(MlError::TooFewClasses { got: present });
    }

    let n = x.n_rows();
    let gram = full_gram(x);
    let mut machines = Vec::new();
    for a in 0..n_classes {
        for b in (a + 1)..n_classes {
            if members[a].is_empty() || members[b].is_empty() {
                continue;
            }
            let mut idx = Vec::with_capacity(members[a].len() + members[b].len());
            let mut y = Vec::with_capacity(idx.capacity());
            for &i in &members[a] {
                idx.push(i);
                y.push(1.0);
            }
            for &i in &members[b] {
                idx.push(i);
                y.push(-1.0);
            }
            let view = GramView { data: &gram, n, idx: &idx };
            let sol = solve_dual(&view, &y, params)?;
            machines.push(PairMachine { pos: a, neg: b, plane: recover_plane(x, &idx, &y, &sol) });
        }
    }
    Ok(OvOModel { n_classes, n_features: x.n_features(), machines })
}

impl OvOModel {
    /// Majority vote over all pair machines. Vote ties fall back to the
    /// head-to-head decision values among the tied classes, then to the
    /// lowest class index.
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut votes = vec![0u32; self.n_classes];
        let mut decisions = Vec::with_capacity(self.machines.len());
        for m in &self.machines {
            let s = m.plane.decision(row);
            decisions.push(s);
            if s >= 0.0 {
                votes[m.pos] += 1;
            } else {
                votes[m.neg] += 1;
            }
        }
        let top = *votes.iter().max().unwrap();
        let tied: Vec<usize> =
            (0..self.n_classes).filter(|&c| votes[c] == top).collect();
        if tied.len() == 1 {
            return tied[0];
        }
        // Head-to-head margin sum restricted to the tied classes.
        let mut score = vec![0.0f64; self.n_classes];
        for (m, &s) in self.machines.iter().zip(&decisions) {
            if tied.contains(&m.pos) && tied.contains(&m.neg) {
                score[m.pos] += s;
                score[m.neg] -= s;
            }
        }
        let mut best = tied[0];
        for &c in &tied[1..] {
            if score[c] > score[best] {
                best = c;
            }
        }
        best
    }

    pub fn predict_all(&self, x: &FeatureMatrix) -> Vec<usize> {
        (0..x.n_rows()).map(|i| self.predict(x.row(i))).collect()
    }
}
