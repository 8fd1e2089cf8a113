//! Self-propelled particle model with pairwise Morse-type interactions.
//!
//! Each of the `n` agents obeys
//!
//! ```text
//! dx_i/dt = v_i
//! dv_i/dt = (alpha - beta |v_i|^2) v_i - grad_i U(x_i)
//! U(x_i)  = sum_{j != i} [ C exp(-|x_i-x_j|/ell) - exp(-|x_i-x_j|) ]
//! ```
//!
//! in nondimensional units (unit mass, unit attraction strength and range).
//! Trajectories are integrated with an adaptive Dormand-Prince 5(4) scheme
//! and sampled on a uniform time grid via dense output, so the reported
//! frames do not depend on the internal step sequence beyond the local
//! error tolerance.

mod dopri5;
mod force;
mod library;
mod phenotype;
mod seed;

pub use dopri5::IntegrationStats;
pub use force::{rhs, social_force, total_pair_energy};
pub use library::{generate_library, run_specs, GridSpec, RunSpec};
pub use phenotype::{grid_phenotype, phenotype_for_params, Phenotype, GRID_VALUES};
pub use seed::{derive_run_seed, initial_frame};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("step size underflow at t = {t:.6e} (h = {h:.6e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("state became non-finite near t = {t:.6e}")]
    NonFiniteState { t: f64 },
    #[error("integration exceeded {max_steps} steps at t = {t:.6e}")]
    StepLimit { t: f64, max_steps: u64 },
}

/// Full parameter set for one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmParams {
    /// Self-propulsion strength.
    pub alpha: f64,
    /// Nonlinear drag coefficient.
    pub beta: f64,
    /// Repulsion strength (attraction strength is normalized to 1).
    pub c: f64,
    /// Repulsion length scale (attraction range is normalized to 1).
    pub ell: f64,
    /// Number of agents.
    pub n: usize,
    /// Spatial dimension; only 2 is supported.
    pub dim: usize,
    /// RNG seed for the initial condition.
    pub seed: u64,
    /// Integration time span `[0, t_end]`.
    pub t_end: f64,
    /// Uniform sampling interval for output frames.
    pub sample_dt: f64,
    /// Relative tolerance of the adaptive integrator.
    pub rtol: f64,
    /// Absolute tolerance of the adaptive integrator.
    pub atol: f64,
}

impl Default for SwarmParams {
    /// Baseline study parameters; `c` and `ell` must still be chosen.
    fn default() -> Self {
        SwarmParams {
            alpha: 1.5,
            beta: 0.5,
            c: 1.0,
            ell: 1.0,
            n: 200,
            dim: 2,
            seed: 0,
            t_end: 100.0,
            sample_dt: 0.05,
            rtol: 1e-3,
            atol: 1e-6,
        }
    }
}

impl SwarmParams {
    pub fn validate(&self) -> Result<(), SimError> {
        fn positive(name: &str, v: f64) -> Result<(), SimError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SimError::InvalidParams(format!(
                    "{name} must be finite and positive, got {v}"
                )))
            }
        }
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("C", self.c)?;
        positive("ell", self.ell)?;
        positive("t_end", self.t_end)?;
        positive("sample_dt", self.sample_dt)?;
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        if self.n == 0 {
            return Err(SimError::InvalidParams("n must be at least 1".into()));
        }
        if self.dim != 2 {
            return Err(SimError::InvalidParams(format!(
                "only dim = 2 is supported, got {}",
                self.dim
            )));
        }
        let ratio = self.t_end / self.sample_dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(SimError::InvalidParams(format!(
                "t_end ({}) must be an integer multiple of sample_dt ({})",
                self.t_end, self.sample_dt
            )));
        }
        Ok(())
    }

    /// Number of sampled frames, including the initial condition.
    pub fn frame_count(&self) -> usize {
        (self.t_end / self.sample_dt).round() as usize + 1
    }

    /// The uniform sample times `0, dt, 2 dt, ...`.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.frame_count())
            .map(|j| j as f64 * self.sample_dt)
            .collect()
    }
}

/// One sampled snapshot of the swarm.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
}

impl Frame {
    pub fn n(&self) -> usize {
        self.positions.len()
    }
}

/// Counters reported by one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimStats {
    pub rhs_evaluations: u64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    /// Agent pairs found at identical positions during force evaluation.
    pub coincident_pairs: u64,
}

/// A fully sampled simulation run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: SwarmParams,
    /// Phenotype label when `(C, ell)` lies on the study grid.
    pub phenotype: Option<Phenotype>,
    pub frames: Vec<Frame>,
    pub stats: SimStats,
}

impl Trajectory {
    pub fn n_agents(&self) -> usize {
        self.params.n
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }
}

/// Integrate one run from its seeded initial condition.
pub fn simulate(params: &SwarmParams) -> Result<Trajectory, SimError> {
    params.validate()?;
    let first = initial_frame(params);
    simulate_from(params, first)
}

/// Integrate one run from an explicit initial frame (`first.t` is ignored;
/// integration always starts at t = 0).
pub fn simulate_from(params: &SwarmParams, first: Frame) -> Result<Trajectory, SimError> {
    params.validate()?;
    if first.positions.len() != params.n || first.velocities.len() != params.n {
        return Err(SimError::InvalidParams(format!(
            "initial frame has {} agents, params say {}",
            first.positions.len(),
            params.n
        )));
    }
    let n = params.n;
    let mut y0 = vec![0.0; 4 * n];
    for (i, p) in first.positions.iter().enumerate() {
        y0[2 * i] = p[0];
        y0[2 * i + 1] = p[1];
    }
    for (i, v) in first.velocities.iter().enumerate() {
        y0[2 * n + 2 * i] = v[0];
        y0[2 * n + 2 * i + 1] = v[1];
    }

    let times = params.sample_times();
    let mut coincident = 0u64;
    let fp = force::ForceParams::new(params.c, params.ell);
    let (alpha, beta) = (params.alpha, params.beta);
    let f = |_t: f64, y: &[f64], dydt: &mut [f64]| {
        force::rhs_flat(n, alpha, beta, &fp, y, dydt, &mut coincident);
    };
    let (states, stats) = dopri5::integrate_sampled(f, y0, &times, params.rtol, params.atol)?;

    let frames = times
        .iter()
        .zip(states)
        .map(|(&t, y)| {
            let mut positions = Vec::with_capacity(n);
            let mut velocities = Vec::with_capacity(n);
            for i in 0..n {
                positions.push([y[2 * i], y[2 * i + 1]]);
                velocities.push([y[2 * n + 2 * i], y[2 * n + 2 * i + 1]]);
            }
            Frame { t, positions, velocities }
        })
        .collect();

    Ok(Trajectory {
        params: params.clone(),
        phenotype: phenotype_for_params(params.c, params.ell),
        frames,
        stats: SimStats {
            rhs_evaluations: stats.nfev,
            steps_accepted: stats.accepted,
            steps_rejected: stats.rejected,
            coincident_pairs: coincident,
        },
    })
}
