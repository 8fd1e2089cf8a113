//! Pairwise interaction forces and the model right-hand side.

use super::SwarmParams;

/// Precomputed constants for the pair interaction at fixed `(C, ell)`.
///
/// Beyond `r_cut` both exponentials are below ~1e-19 and the pair is
/// skipped; this is far beneath integration tolerances but saves a large
/// fraction of `exp` calls once a swarm disperses.
pub(crate) struct ForceParams {
    c: f64,
    c_over_ell: f64,
    inv_ell: f64,
    r2_cut: f64,
}

impl ForceParams {
    pub(crate) fn new(c: f64, ell: f64) -> Self {
        let arg = 45.0 + (c / ell).max(1.0).ln();
        let r_cut = (ell * arg).max(45.0);
        ForceParams {
            c,
            c_over_ell: c / ell,
            inv_ell: 1.0 / ell,
            r2_cut: r_cut * r_cut,
        }
    }

    /// Magnitude of the radial force between two agents at distance `r`,
    /// positive when repulsive.
    #[inline]
    fn magnitude(&self, r: f64) -> f64 {
        self.c_over_ell * (-r * self.inv_ell).exp() - (-r).exp()
    }

    /// Pair potential at distance `r`.
    #[inline]
    fn energy(&self, r: f64) -> f64 {
        self.c * (-r * self.inv_ell).exp() - (-r).exp()
    }
}

/// Accumulate `-grad_i U` for every agent into `out` (length `2n`,
/// `[fx0, fy0, fx1, fy1, ...]`). Coincident pairs contribute nothing and
/// bump `coincident`.
pub(crate) fn accumulate_forces(
    n: usize,
    fp: &ForceParams,
    pos: &[f64],
    out: &mut [f64],
    coincident: &mut u64,
) {
    out[..2 * n].fill(0.0);
    for i in 0..n {
        let xi = pos[2 * i];
        let yi = pos[2 * i + 1];
        let mut fx = 0.0;
        let mut fy = 0.0;
        for j in (i + 1)..n {
            let dx = xi - pos[2 * j];
            let dy = yi - pos[2 * j + 1];
            let r2 = dx * dx + dy * dy;
            if r2 >= fp.r2_cut {
                continue;
            }
            if r2 == 0.0 {
                *coincident += 1;
                continue;
            }
            let r = r2.sqrt();
            let s = fp.magnitude(r) / r;
            let gx = s * dx;
            let gy = s * dy;
            fx += gx;
            fy += gy;
            // Newton's third law: j receives the opposite contribution.
            out[2 * j] -= gx;
            out[2 * j + 1] -= gy;
        }
        out[2 * i] += fx;
        out[2 * i + 1] += fy;
    }
}

/// Model right-hand side on the flat state `[x..., v...]`.
pub(crate) fn rhs_flat(
    n: usize,
    alpha: f64,
    beta: f64,
    fp: &ForceParams,
    y: &[f64],
    dydt: &mut [f64],
    coincident: &mut u64,
) {
    let (pos, vel) = y.split_at(2 * n);
    let (dpos, dvel) = dydt.split_at_mut(2 * n);
    dpos.copy_from_slice(vel);
    accumulate_forces(n, fp, pos, dvel, coincident);
    for i in 0..n {
        let vx = vel[2 * i];
        let vy = vel[2 * i + 1];
        let drive = alpha - beta * (vx * vx + vy * vy);
        dvel[2 * i] += drive * vx;
        dvel[2 * i + 1] += drive * vy;
    }
}

/// Social force on each agent for a given configuration.
///
/// Returns the per-agent force vectors together with the number of
/// coincident pairs encountered (which contribute zero force).
pub fn social_force(positions: &[[f64; 2]], params: &SwarmParams) -> (Vec<[f64; 2]>, u64) {
    let n = positions.len();
    let fp = ForceParams::new(params.c, params.ell);
    let flat: Vec<f64> = positions.iter().flatten().copied().collect();
    let mut out = vec![0.0; 2 * n];
    let mut coincident = 0;
    accumulate_forces(n, &fp, &flat, &mut out, &mut coincident);
    let forces = (0..n).map(|i| [out[2 * i], out[2 * i + 1]]).collect();
    (forces, coincident)
}

/// Time derivative of `(positions, velocities)` under the model.
pub fn rhs(
    positions: &[[f64; 2]],
    velocities: &[[f64; 2]],
    params: &SwarmParams,
) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    assert_eq!(positions.len(), velocities.len());
    let (forces, _) = social_force(positions, params);
    let dv = velocities
        .iter()
        .zip(&forces)
        .map(|(v, f)| {
            let drive = params.alpha - params.beta * (v[0] * v[0] + v[1] * v[1]);
            [drive * v[0] + f[0], drive * v[1] + f[1]]
        })
        .collect();
    (velocities.to_vec(), dv)
}

/// Total pair interaction energy `sum_{i<j} C e^{-r/ell} - e^{-r}`.
///
/// The force on agent `i` equals minus the gradient of this sum with
/// respect to `x_i`, which makes it a convenient oracle for finite
/// difference checks.
pub fn total_pair_energy(positions: &[[f64; 2]], params: &SwarmParams) -> f64 {
    let fp = ForceParams::new(params.c, params.ell);
    let mut e = 0.0;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let r2 = dx * dx + dy * dy;
            if r2 == 0.0 || r2 >= fp.r2_cut {
                continue;
            }
            e += fp.energy(r2.sqrt());
        }
    }
    e
}
