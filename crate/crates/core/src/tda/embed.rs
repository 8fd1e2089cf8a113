//! Point-cloud extraction from trajectories, with optional delay
//! embedding.

use crate::descriptors::{downsample_indices, DOWNSAMPLE_FACTOR, STANDARD_FRAMES};
use crate::sim::Trajectory;

use super::TdaError;

/// A time-indexed sequence of equally sized point clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudSequence {
    /// Coordinates per point.
    pub dim: usize,
    /// Points per cloud.
    pub n: usize,
    /// Sample time of each cloud.
    pub times: Vec<f64>,
    /// One `n * dim` row-major coordinate buffer per time.
    pub clouds: Vec<Vec<f64>>,
}

impl CloudSequence {
    pub fn n_frames(&self) -> usize {
        self.clouds.len()
    }
}

fn require_standard(traj: &Trajectory) -> Result<(), TdaError> {
    if traj.n_frames() != STANDARD_FRAMES {
        return Err(TdaError::WrongFrameCount {
            got: traj.n_frames(),
            expected: STANDARD_FRAMES,
        });
    }
    Ok(())
}

/// Downsampled position clouds (dimension 2) of a standard-sampling
/// trajectory: every 23rd frame is retained, 87 clouds in total.
pub fn position_clouds(traj: &Trajectory) -> Result<CloudSequence, TdaError> {
    require_standard(traj)?;
    let idx = downsample_indices(STANDARD_FRAMES, DOWNSAMPLE_FACTOR).unwrap();
    let n = traj.n_agents();
    let mut times = Vec::with_capacity(idx.len());
    let mut clouds = Vec::with_capacity(idx.len());
    for &j in &idx {
        let frame = &traj.frames[j];
        times.push(frame.t);
        let mut cloud = Vec::with_capacity(2 * n);
        for p in &frame.positions {
            cloud.extend_from_slice(p);
        }
        clouds.push(cloud);
    }
    Ok(CloudSequence { dim: 2, n, times, clouds })
}

/// Delay-embedded position clouds (dimension 4): each agent becomes the
/// point `(x(t), y(t), x(t - delay dt), y(t - delay dt))`.
///
/// The first downsampled frame is always dropped, so every admissible
/// delay produces the same 86-cloud sequence shape and the history
/// index never precedes the start of the run. `delay` is measured in
/// sample steps and must satisfy `1 <= delay <= 45` (the index of the
/// first retained frame).
pub fn delay_embed(traj: &Trajectory, delay: usize) -> Result<CloudSequence, TdaError> {
    require_standard(traj)?;
    let idx = downsample_indices(STANDARD_FRAMES, DOWNSAMPLE_FACTOR).unwrap();
    let first_retained = idx[1];
    if delay == 0 || delay > first_retained {
        return Err(TdaError::DelayTooLarge { needed: delay, first: first_retained });
    }
    let n = traj.n_agents();
    let mut times = Vec::with_capacity(idx.len() - 1);
    let mut clouds = Vec::with_capacity(idx.len() - 1);
    for &j in &idx[1..] {
        let now = &traj.frames[j];
        let past = &traj.frames[j - delay];
        times.push(now.t);
        let mut cloud = Vec::with_capacity(4 * n);
        for (p, q) in now.positions.iter().zip(&past.positions) {
            cloud.extend_from_slice(p);
            cloud.extend_from_slice(q);
        }
        clouds.push(cloud);
    }
    Ok(CloudSequence { dim: 4, n, times, clouds })
}
