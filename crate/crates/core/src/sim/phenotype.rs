//! Phenotype labels over the `(C, ell)` study grid.

use std::fmt;
use std::str::FromStr;

/// The interaction-parameter values used on both grid axes.
pub const GRID_VALUES: [f64; 5] = [0.1, 0.5, 0.9, 2.0, 3.0];

/// Long-time collective state reached from small random initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phenotype {
    SingleMill,
    DoubleMill,
    DoubleRing,
    CollectiveSwarm,
    EscapeSymmetric,
    EscapeUnsymmetric,
    EscapeCollective,
}

impl Phenotype {
    pub const ALL: [Phenotype; 7] = [
        Phenotype::SingleMill,
        Phenotype::DoubleMill,
        Phenotype::DoubleRing,
        Phenotype::CollectiveSwarm,
        Phenotype::EscapeSymmetric,
        Phenotype::EscapeUnsymmetric,
        Phenotype::EscapeCollective,
    ];

    /// Stable index into [`Phenotype::ALL`].
    pub fn index(self) -> usize {
        Phenotype::ALL.iter().position(|&p| p == self).unwrap()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phenotype::SingleMill => "single-mill",
            Phenotype::DoubleMill => "double-mill",
            Phenotype::DoubleRing => "double-ring",
            Phenotype::CollectiveSwarm => "collective-swarm",
            Phenotype::EscapeSymmetric => "escape-symmetric",
            Phenotype::EscapeUnsymmetric => "escape-unsymmetric",
            Phenotype::EscapeCollective => "escape-collective",
        }
    }
}

impl fmt::Display for Phenotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phenotype {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phenotype::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown phenotype {s:?}"))
    }
}

// Observed phenotype for each grid combination, row = C index and
// column = ell index, both over [0.1, 0.5, 0.9, 2.0, 3.0].
const TABLE: [[Phenotype; 5]; 5] = {
    use Phenotype::*;
    [
        [DoubleRing, CollectiveSwarm, CollectiveSwarm, CollectiveSwarm, CollectiveSwarm],
        [SingleMill, DoubleRing, CollectiveSwarm, CollectiveSwarm, CollectiveSwarm],
        [SingleMill, DoubleMill, DoubleRing, CollectiveSwarm, CollectiveSwarm],
        [SingleMill, SingleMill, EscapeSymmetric, EscapeUnsymmetric, EscapeCollective],
        [SingleMill, EscapeCollective, EscapeSymmetric, EscapeUnsymmetric, EscapeUnsymmetric],
    ]
};

/// Phenotype at grid indices `(c_idx, ell_idx)`.
///
/// # Panics
/// If either index is out of range.
pub fn grid_phenotype(c_idx: usize, ell_idx: usize) -> Phenotype {
    TABLE[c_idx][ell_idx]
}

/// Phenotype for parameter values, or `None` when `(c, ell)` is not a
/// grid combination. Values are matched with a small absolute tolerance
/// so that round-tripped floats still resolve.
pub fn phenotype_for_params(c: f64, ell: f64) -> Option<Phenotype> {
    let idx = |v: f64| GRID_VALUES.iter().position(|&g| (g - v).abs() < 1e-9);
    Some(TABLE[idx(c)?][idx(ell)?])
}
