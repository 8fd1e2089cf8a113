//! Enumeration of the run library over the parameter grid.

use super::{
    derive_run_seed, phenotype_for_params, simulate, Phenotype, SimError, SwarmParams,
    Trajectory, GRID_VALUES,
};

/// The parameter grid and replication count for a library of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub ell_values: Vec<f64>,
    pub runs_per_combo: usize,
    pub master_seed: u64,
}

impl GridSpec {
    /// The full 5x5 study grid.
    pub fn standard(runs_per_combo: usize, master_seed: u64) -> Self {
        GridSpec {
            c_values: GRID_VALUES.to_vec(),
            ell_values: GRID_VALUES.to_vec(),
            runs_per_combo,
            master_seed,
        }
    }

    pub fn n_combos(&self) -> usize {
        self.c_values.len() * self.ell_values.len()
    }

    pub fn n_runs(&self) -> usize {
        self.n_combos() * self.runs_per_combo
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.c_values.is_empty() || self.ell_values.is_empty() {
            return Err(SimError::InvalidParams("empty parameter grid".into()));
        }
        if self.runs_per_combo == 0 {
            return Err(SimError::InvalidParams("runs_per_combo must be >= 1".into()));
        }
        for (name, vals) in [("C", &self.c_values), ("ell", &self.ell_values)] {
            if vals.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(SimError::InvalidParams(format!(
                    "{name} grid values must be finite and positive"
                )));
            }
        }
        Ok(())
    }
}

/// One planned run: grid coordinates plus the concrete parameter set.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub c_idx: usize,
    pub ell_idx: usize,
    pub run_idx: usize,
    pub params: SwarmParams,
    pub phenotype: Option<Phenotype>,
}

impl RunSpec {
    /// Stable identifier used for file names and manifest entries.
    pub fn id(&self) -> String {
        format!(
            "c{}_l{}_run{:02}",
            self.params.c, self.params.ell, self.run_idx
        )
    }

    /// Flat combination index (`c_idx * n_ell + ell_idx`) for labelling.
    pub fn combo_idx(&self, grid: &GridSpec) -> usize {
        self.c_idx * grid.ell_values.len() + self.ell_idx
    }
}

/// Enumerate every run of the library in a fixed order (C outer, ell
/// middle, replicate inner), with per-run seeds derived from the master
/// seed and the grid coordinates.
pub fn run_specs(grid: &GridSpec, base: &SwarmParams) -> Result<Vec<RunSpec>, SimError> {
    grid.validate()?;
    base.validate()?;
    let mut specs = Vec::with_capacity(grid.n_runs());
    for (c_idx, &c) in grid.c_values.iter().enumerate() {
        for (ell_idx, &ell) in grid.ell_values.iter().enumerate() {
            for run_idx in 0..grid.runs_per_combo {
                let mut params = base.clone();
                params.c = c;
                params.ell = ell;
                params.seed = derive_run_seed(grid.master_seed, c_idx, ell_idx, run_idx);
                specs.push(RunSpec {
                    c_idx,
                    ell_idx,
                    run_idx,
                    params,
                    phenotype: phenotype_for_params(c, ell),
                });
            }
        }
    }
    Ok(specs)
}

/// Simulate the whole library in memory.
///
/// Convenient for small grids and tests; the pipeline driver instead
/// iterates [`run_specs`] and streams each trajectory to disk.
pub fn generate_library(grid: &GridSpec, base: &SwarmParams) -> Result<Vec<Trajectory>, SimError> {
    run_specs(grid, base)?
        .iter()
        .map(|spec| simulate(&spec.params))
        .collect()
}
