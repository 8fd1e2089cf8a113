//! Dense pairwise distance matrices.

use super::TdaError;

/// Symmetric distance matrix stored in full square form.
///
/// Full storage costs twice the memory of a condensed triangle but lets
/// the persistence kernel scan two rows simultaneously with unit stride,
/// which dominates its running time.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Euclidean distances of a point cloud given as `n * dim`
    /// row-major coordinates.
    pub fn from_cloud(coords: &[f64], dim: usize) -> Result<Self, TdaError> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(TdaError::InvalidCloud(format!(
                "coordinate buffer of length {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(TdaError::InvalidCloud("non-finite coordinate".into()));
        }
        let n = coords.len() / dim;
        if n == 0 {
            return Err(TdaError::InvalidCloud("empty cloud".into()));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let pi = &coords[i * dim..(i + 1) * dim];
            for j in (i + 1)..n {
                let pj = &coords[j * dim..(j + 1) * dim];
                let d2: f64 = pi.iter().zip(pj).map(|(a, b)| (a - b) * (a - b)).sum();
                let d = d2.sqrt();
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    /// Build from an arbitrary metric-like function evaluated once per
    /// unordered pair.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, TdaError> {
        if n == 0 {
            return Err(TdaError::InvalidCloud("empty cloud".into()));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = f(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(TdaError::InvalidDistances(format!("d({i},{j}) = {d}")));
                }
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}
