//! Crocker matrices: Betti curves stacked over time.

use rayon::prelude::*;

use super::{
    betti_curve, vr_persistence, CloudSequence, DistanceMatrix, EpsilonGrid, TdaError,
};

/// A `scales x times` matrix of Betti numbers for one homology
/// dimension, stored row-major with one row per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Crocker {
    pub betti_dim: usize,
    pub times: Vec<f64>,
    pub grid: EpsilonGrid,
    counts: Vec<u32>,
}

impl Crocker {
    /// Assemble from raw counts (row-major, `grid.len() * times.len()`).
    pub fn from_counts(
        betti_dim: usize,
        times: Vec<f64>,
        grid: EpsilonGrid,
        counts: Vec<u32>,
    ) -> Result<Self, TdaError> {
        if counts.len() != grid.len() * times.len() {
            return Err(TdaError::IncompatibleCrockers(format!(
                "{} counts for {} scales x {} times",
                counts.len(),
                grid.len(),
                times.len()
            )));
        }
        Ok(Crocker { betti_dim, times, grid, counts })
    }

    pub fn n_scales(&self) -> usize {
        self.grid.len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// Betti number at scale index `q` and time index `t`.
    pub fn get(&self, q: usize, t: usize) -> u32 {
        self.counts[q * self.n_times() + t]
    }

    /// One scale row across all times.
    pub fn row(&self, q: usize) -> &[u32] {
        let t = self.n_times();
        &self.counts[q * t..(q + 1) * t]
    }

    /// Row-major backing storage.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

/// Compute the b0 and b1 crocker matrices of a cloud sequence over the
/// given scale grid. The largest grid value doubles as diameter cap of
/// each filtration; loops still alive there count at every remaining
/// scale. Frames are processed in parallel.
pub fn crocker_matrices(
    seq: &CloudSequence,
    grid: &EpsilonGrid,
) -> Result<(Crocker, Crocker), TdaError> {
    if seq.clouds.is_empty() {
        return Err(TdaError::InvalidCloud("empty cloud sequence".into()));
    }
    for c in &seq.clouds {
        if c.len() != seq.n * seq.dim {
            return Err(TdaError::InvalidCloud(format!(
                "cloud of length {} does not match {} points x dim {}",
                c.len(),
                seq.n,
                seq.dim
            )));
        }
    }
    let cap = grid.max();
    let curves: Vec<(Vec<u32>, Vec<u32>)> = seq
        .clouds
        .par_iter()
        .map(|cloud| {
            let d = DistanceMatrix::from_cloud(cloud, seq.dim)?;
            let diagrams = vr_persistence(&d, cap)?;
            Ok((
                betti_curve(&diagrams.h0, grid),
                betti_curve(&diagrams.h1, grid),
            ))
        })
        .collect::<Result<_, TdaError>>()?;

    let (n_scales, n_times) = (grid.len(), seq.clouds.len());
    let mut b0 = vec![0u32; n_scales * n_times];
    let mut b1 = vec![0u32; n_scales * n_times];
    for (t, (c0, c1)) in curves.iter().enumerate() {
        for q in 0..n_scales {
            b0[q * n_times + t] = c0[q];
            b1[q * n_times + t] = c1[q];
        }
    }
    Ok((
        Crocker {
            betti_dim: 0,
            times: seq.times.clone(),
            grid: grid.clone(),
            counts: b0,
        },
        Crocker {
            betti_dim: 1,
            times: seq.times.clone(),
            grid: grid.clone(),
            counts: b1,
        },
    ))
}

/// Flatten one or two crocker matrices into a single feature vector.
///
/// Matrices are flattened row-major (scale-major) and concatenated in
/// increasing homology dimension, so `(b0, b1)` yields the b0 block
/// followed by the b1 block. All parts must share the scale grid and
/// the time axis.
pub fn crocker_features(parts: &[&Crocker]) -> Result<Vec<f64>, TdaError> {
    if parts.is_empty() || parts.len() > 2 {
        return Err(TdaError::IncompatibleCrockers(format!(
            "expected 1 or 2 matrices, got {}",
            parts.len()
        )));
    }
    if parts.len() == 2 {
        if parts[0].betti_dim >= parts[1].betti_dim {
            return Err(TdaError::IncompatibleCrockers(
                "parts must be in increasing homology dimension".into(),
            ));
        }
        if parts[0].grid != parts[1].grid || parts[0].times.len() != parts[1].times.len() {
            return Err(TdaError::IncompatibleCrockers(
                "parts disagree on scale grid or time axis".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(parts.iter().map(|c| c.counts.len()).sum());
    for c in parts {
        out.extend(c.counts.iter().map(|&v| v as f64));
    }
    Ok(out)
}
