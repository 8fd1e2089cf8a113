//! The logarithmic scale grid shared by all Betti curves.

use super::TdaError;

/// Strictly increasing scale values at which Betti numbers are sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGrid {
    values: Vec<f64>,
}

impl EpsilonGrid {
    /// The study grid: 200 points log-spaced with exponents
    /// `-4 + q * 0.02` for `q = 1..=200`, i.e. `(1e-4, 1]` ending
    /// exactly at 1.
    pub fn standard() -> Self {
        EpsilonGrid::log10(-4.0, 0.0, 200).unwrap()
    }

    /// `count` points with exponents spaced uniformly on
    /// `(min_exp, max_exp]`.
    pub fn log10(min_exp: f64, max_exp: f64, count: usize) -> Result<Self, TdaError> {
        if count == 0 {
            return Err(TdaError::InvalidGrid("count must be >= 1".into()));
        }
        if !(min_exp.is_finite() && max_exp.is_finite() && min_exp < max_exp) {
            return Err(TdaError::InvalidGrid(format!(
                "need finite min_exp < max_exp, got {min_exp} and {max_exp}"
            )));
        }
        let values = (1..=count)
            .map(|q| {
                let e = min_exp + q as f64 * (max_exp - min_exp) / count as f64;
                10f64.powf(e)
            })
            .collect();
        EpsilonGrid::from_values(values)
    }

    /// A grid from explicit values, which must be finite, positive and
    /// strictly increasing.
    pub fn from_values(values: Vec<f64>) -> Result<Self, TdaError> {
        if values.is_empty() {
            return Err(TdaError::InvalidGrid("grid is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(TdaError::InvalidGrid(
                "grid values must be finite and positive".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TdaError::InvalidGrid(
                "grid values must be strictly increasing".into(),
            ));
        }
        Ok(EpsilonGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest scale; doubles as the diameter cap of the filtration.
    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Index of the first grid value `>= x` (equals `len()` when `x`
    /// exceeds every grid value).
    pub fn index_at_or_above(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v < x)
    }
}
