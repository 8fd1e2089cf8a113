//! Escape clamping and coordinate normalization.

use crate::sim::Trajectory;

use super::TdaError;

/// Which agents were clamped and at which frame it first happened.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClampReport {
    /// `(agent index, first frame index at or beyond the threshold)`.
    pub clamped: Vec<(usize, usize)>,
}

impl ClampReport {
    pub fn n_clamped(&self) -> usize {
        self.clamped.len()
    }
}

/// Freeze escaping agents.
///
/// An agent counts as escaped at the first sampled frame where its
/// position max-norm reaches `threshold`. From that frame on its
/// position is held constant at the escape position, with coordinates
/// clipped into `[-threshold, threshold]` (the integrator samples
/// continuously, so the crossing frame can slightly overshoot the
/// threshold). Velocities are left untouched; only positions feed the
/// topological analysis.
pub fn clamp_escapes(traj: &Trajectory, threshold: f64) -> (Trajectory, ClampReport) {
    assert!(threshold > 0.0 && threshold.is_finite());
    let mut out = traj.clone();
    let mut report = ClampReport::default();
    let n = traj.n_agents();
    let m = traj.n_frames();
    for agent in 0..n {
        let escaped_at = (0..m).find(|&f| {
            let p = traj.frames[f].positions[agent];
            p[0].abs().max(p[1].abs()) >= threshold
        });
        if let Some(f0) = escaped_at {
            let p = traj.frames[f0].positions[agent];
            let frozen = [
                p[0].clamp(-threshold, threshold),
                p[1].clamp(-threshold, threshold),
            ];
            for frame in out.frames.iter_mut().skip(f0) {
                frame.positions[agent] = frozen;
            }
            report.clamped.push((agent, f0));
        }
    }
    (out, report)
}

/// Divide all coordinates of a cloud sequence by `constant`, verifying
/// that the result lies in `[-1, 1]` up to rounding slack. Nothing is
/// modified when the check fails.
pub fn normalize_sequence(
    seq: &mut super::CloudSequence,
    constant: f64,
) -> Result<(), TdaError> {
    assert!(constant > 0.0 && constant.is_finite());
    let limit = constant * (1.0 + 1e-12);
    for (frame, cloud) in seq.clouds.iter().enumerate() {
        for (idx, &c) in cloud.iter().enumerate() {
            if c.abs() > limit {
                return Err(TdaError::NotNormalizable {
                    value: c / constant,
                    point: idx / seq.dim,
                    frame,
                });
            }
        }
    }
    for cloud in &mut seq.clouds {
        for c in cloud.iter_mut() {
            *c /= constant;
        }
    }
    Ok(())
}

/// Normalize a whole library of sequences by the shared constant.
pub fn normalize_library(
    seqs: &mut [super::CloudSequence],
    constant: f64,
) -> Result<(), TdaError> {
    for seq in seqs.iter_mut() {
        normalize_sequence(seq, constant)?;
    }
    Ok(())
}
