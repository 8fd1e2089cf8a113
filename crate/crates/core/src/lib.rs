//! Collective-motion simulation and topological data analysis toolkit.
//!
//! The crate is organized as a pipeline:
//!
//! 1. [`sim`] integrates the self-propelled particle model over a grid of
//!    interaction parameters and produces sampled trajectories.
//! 2. [`descriptors`] reduces trajectories to classical order-parameter
//!    time series.
//! 3. [`tda`] computes Vietoris-Rips persistent homology for each sampled
//!    frame and assembles crocker matrices (Betti curves over time).
//! 4. [`ml`] recovers parameters and phenotypes from either descriptor
//!    family via k-medoids clustering and linear SVM classification.
//! 5. [`io`] defines the on-disk formats used by the pipeline driver.

pub mod descriptors;
pub mod io;
pub mod ml;
pub mod sim;
pub mod tda;
