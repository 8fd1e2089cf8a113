//! Vietoris-Rips persistent homology and crocker matrices.
//!
//! For each sampled frame the agent configuration is treated as a point
//! cloud, its Vietoris-Rips filtration is built over a fixed logarithmic
//! scale grid, and the Betti numbers b0 (components) and b1 (loops) are
//! recorded per scale. Stacking the per-frame Betti curves over time
//! yields a *crocker matrix*, the topological descriptor fed to the
//! learning stage.
//!
//! Escaping agents are clamped before analysis so that a handful of
//! runaway individuals cannot dominate the scale axis, and coordinates
//! are brought to order one by a fixed normalization constant shared by
//! the whole library.

mod betti;
mod crocker;
mod dist;
mod embed;
mod grid;
mod persistence;
mod preprocess;

pub use betti::betti_curve;
pub use crocker::{crocker_features, crocker_matrices, Crocker};
pub use dist::DistanceMatrix;
pub use embed::{delay_embed, position_clouds, CloudSequence};
pub use grid::EpsilonGrid;
pub use persistence::{vr_persistence, Diagrams, Interval, PersistenceDiagram};
pub use preprocess::{clamp_escapes, normalize_library, normalize_sequence, ClampReport};

use thiserror::Error;

/// Default clamping threshold on agent coordinates (max-norm).
pub const CLAMP_THRESHOLD: f64 = 10.0;
/// Default normalization constant dividing all coordinates.
pub const NORMALIZE_CONSTANT: f64 = 10.0;
/// Default delay (in sample steps) of the delay embedding.
pub const DELAY_STEPS: usize = 5;

#[derive(Debug, Error)]
pub enum TdaError {
    #[error("invalid scale grid: {0}")]
    InvalidGrid(String),
    #[error("invalid point cloud: {0}")]
    InvalidCloud(String),
    #[error("distances must be finite, non-negative and symmetric: {0}")]
    InvalidDistances(String),
    #[error(
        "normalized coordinate {value} exceeds 1 (agent {point}, frame {frame}); \
         clamp before normalizing"
    )]
    NotNormalizable { value: f64, point: usize, frame: usize },
    #[error("delay embedding needs {needed} leading frames but the first retained index is {first}")]
    DelayTooLarge { needed: usize, first: usize },
    #[error("trajectory has {got} frames, expected {expected}")]
    WrongFrameCount { got: usize, expected: usize },
    #[error("incompatible crocker matrices: {0}")]
    IncompatibleCrockers(String),
}
