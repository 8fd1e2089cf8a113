//! Principal component analysis for wide feature matrices.
//!
//! Feature vectors here are much wider than the sample count (tens of
//! thousands of columns, a few hundred rows), so the eigenproblem is
//! solved on the n x n Gram matrix of the centered data rather than on
//! the d x d covariance. Right singular vectors are recovered as
//! X^T u / sqrt(lambda).

use super::{FeatureMatrix, MlError};

/// Relative threshold under which a Gram eigenvalue is treated as zero.
const RANK_EPS: f64 = 1e-10;

/// A fitted PCA basis.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub n_features: usize,
    pub n_components: usize,
    /// Column means of the training data, length `n_features`.
    pub mean: Vec<f64>,
    /// Row-major `n_components x n_features`, orthonormal rows.
    pub components: Vec<f64>,
    /// Sample variance captured by each component (descending for the
    /// data-derived components; zero for any completion directions).
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j * self.n_features..(j + 1) * self.n_features]
    }
}

/// Jacobi eigendecomposition of a symmetric matrix (row-major, n x n).
/// Returns (eigenvalues, eigenvectors as columns of `v`).
fn jacobi_eigh(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n == 0 {
        return (Vec::new(), v);
    }
    let scale: f64 = (0..n)
        .map(|i| a[i * n + i].abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol * 1e-3 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eig = (0..n).map(|i| a[i * n + i]).collect();
    (eig, v)
}

/// Flip `row` so its largest-magnitude entry is positive (first such
/// entry on exact ties). Keeps component signs reproducible.
fn fix_sign(row: &mut [f64]) {
    let mut best = 0usize;
    for (i, &x) in row.iter().enumerate() {
        if x.abs() > row[best].abs() {
            best = i;
        }
    }
    if row[best] < 0.0 {
        for x in row.iter_mut() {
            *x = -*x;
        }
    }
}

/// Fit `n_components` principal directions to `x`.
///
/// If the centered data has rank below `n_components`, the basis is
/// padded with arbitrary orthonormal directions (zero explained
/// variance) so downstream code always sees the requested width.
pub fn pca_fit(x: &FeatureMatrix, n_components: usize) -> Result<PcaModel, MlError> {
    let n = x.n_rows();
    let d = x.n_features();
    if n == 0 {
        return Err(MlError::EmptyMatrix);
    }
    if n_components == 0 || n_components > d {
        return Err(MlError::InvalidParams(format!(
            "need 1 <= n_components <= {d}, got {n_components}"
        )));
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, &xi) in mean.iter_mut().zip(x.row(i)) {
            *m += xi;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut centered = vec![0.0; n * d];
    for i in 0..n {
        for (j, &xi) in x.row(i).iter().enumerate() {
            centered[i * d + j] = xi - mean[j];
        }
    }

    // Gram of the centered rows.
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            let (ri, rj) = (&centered[i * d..(i + 1) * d], &centered[j * d..(j + 1) * d]);
            for (&a, &b) in ri.iter().zip(rj) {
                s += a * b;
            }
            gram[i * n + j] = s;
            gram[j * n + i] = s;
        }
    }
    let (eig, vecs) = jacobi_eigh(&mut gram, n);

    // Eigenpairs by descending eigenvalue; index breaks exact ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig[b].total_cmp(&eig[a]).then(a.cmp(&b)));
    let lambda_max = eig[order[0]].max(0.0);
    let cutoff = lambda_max * RANK_EPS;

    let mut components = Vec::with_capacity(n_components * d);
    let mut explained = Vec::with_capacity(n_components);
    for &idx in order.iter().take(n_components) {
        let lambda = eig[idx];
        if lambda <= cutoff {
            break;
        }
        let inv = 1.0 / lambda.sqrt();
        let mut row = vec![0.0; d];
        for i in 0..n {
            let w = vecs[i * n + idx] * inv;
            if w != 0.0 {
                for (r, &c) in row.iter_mut().zip(&centered[i * d..(i + 1) * d]) {
                    *r += w * c;
                }
            }
        }
        fix_sign(&mut row);
        components.extend_from_slice(&row);
        explained.push(lambda / (n as f64 - 1.0).max(1.0));
    }

    // Orthonormal completion when rank < n_components: Gram-Schmidt the
    // standard basis against what we already have.
    let mut basis_e = 0usize;
    while explained.len() < n_components {
        if basis_e >= d {
            return Err(MlError::InvalidParams(
                "could not complete an orthonormal basis".into(),
            ));
        }
        let mut row = vec![0.0; d];
        row[basis_e] = 1.0;
        basis_e += 1;
        for k in 0..explained.len() {
            let comp = &components[k * d..(k + 1) * d];
            let dot: f64 = row.iter().zip(comp).map(|(&a, &b)| a * b).sum();
            for (r, &c) in row.iter_mut().zip(comp) {
                *r -= dot * c;
            }
        }
        let norm: f64 = row.iter().map(|&a| a * a).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue; // basis vector already spanned, try the next
        }
        for r in row.iter_mut() {
            *r /= norm;
        }
        fix_sign(&mut row);
        components.extend_from_slice(&row);
        explained.push(0.0);
    }

    Ok(PcaModel {
        n_features: d,
        n_components,
        mean,
        components,
        explained_variance: explained,
    })
}

/// Project rows of `x` onto the fitted basis; labels carry over.
pub fn pca_transform(model: &PcaModel, x: &FeatureMatrix) -> Result<FeatureMatrix, MlError> {
    if x.n_features() != model.n_features {
        return Err(MlError::RowLengthMismatch {
            got: x.n_features(),
            expected: model.n_features,
        });
    }
    let d = model.n_features;
    let mut out = FeatureMatrix::new(model.n_components);
    let mut proj = vec![0.0; model.n_components];
    for i in 0..x.n_rows() {
        let row = x.row(i);
        for (j, p) in proj.iter_mut().enumerate() {
            let comp = &model.components[j * d..(j + 1) * d];
            let mut s = 0.0;
            for k in 0..d {
                s += (row[k] - model.mean[k]) * comp[k];
            }
            *p = s;
        }
        out.push_row(x.labels()[i], &proj)?;
    }
    Ok(out)
}
