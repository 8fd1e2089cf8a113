//! Classical order parameters summarizing each frame of a trajectory.
//!
//! Four scalar descriptors are tracked over time:
//!
//! * **polarization** `P` - alignment of the velocity directions,
//! * **angular momentum** `M_ang` - net rotation about the center of mass,
//! * **absolute angular momentum** `M_abs` - rotation magnitude ignoring
//!   direction (a double mill has high `M_abs` but low `M_ang`),
//! * **mean nearest-neighbour distance** `D_nn`.
//!
//! All four lie in a bounded range (the first three in `[0, 1]`) and are
//! invariant under translations and rotations of the configuration.

use thiserror::Error;

use crate::sim::{Frame, Trajectory};

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("trajectory has {got} frames, expected {expected}")]
    WrongFrameCount { got: usize, expected: usize },
    #[error("downsample factor must be >= 1")]
    BadFactor,
}

/// Order-parameter values for a single frame.
///
/// Degenerate denominators (all agents at rest, or all at the center of
/// mass) are reported as zero with the corresponding flag set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParams {
    pub polarization: f64,
    pub ang_momentum: f64,
    pub abs_ang_momentum: f64,
    pub mean_nn_dist: f64,
    /// True when `sum |v_i| = 0` forced `polarization` to zero.
    pub degenerate_speed: bool,
    /// True when `sum |r_i||v_i| = 0` forced the momenta to zero.
    pub degenerate_moment: bool,
}

/// Compute all four order parameters for one frame.
pub fn order_params(frame: &Frame) -> OrderParams {
    let n = frame.n();
    assert!(n > 0, "frame must contain at least one agent");
    let pos = &frame.positions;
    let vel = &frame.velocities;

    let mut cm = [0.0, 0.0];
    for p in pos {
        cm[0] += p[0];
        cm[1] += p[1];
    }
    cm[0] /= n as f64;
    cm[1] /= n as f64;

    let mut v_sum = [0.0, 0.0];
    let mut speed_sum = 0.0;
    let mut cross_sum = 0.0;
    let mut abs_cross_sum = 0.0;
    let mut moment_sum = 0.0;
    for i in 0..n {
        let v = vel[i];
        let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
        v_sum[0] += v[0];
        v_sum[1] += v[1];
        speed_sum += speed;

        let r = [pos[i][0] - cm[0], pos[i][1] - cm[1]];
        let cross = r[0] * v[1] - r[1] * v[0];
        cross_sum += cross;
        abs_cross_sum += cross.abs();
        moment_sum += (r[0] * r[0] + r[1] * r[1]).sqrt() * speed;
    }

    let degenerate_speed = speed_sum == 0.0;
    let degenerate_moment = moment_sum == 0.0;
    let polarization = if degenerate_speed {
        0.0
    } else {
        (v_sum[0] * v_sum[0] + v_sum[1] * v_sum[1]).sqrt() / speed_sum
    };
    let (ang_momentum, abs_ang_momentum) = if degenerate_moment {
        (0.0, 0.0)
    } else {
        (cross_sum.abs() / moment_sum, abs_cross_sum / moment_sum)
    };

    OrderParams {
        polarization,
        ang_momentum,
        abs_ang_momentum,
        mean_nn_dist: mean_nn_dist(pos),
        degenerate_speed,
        degenerate_moment,
    }
}

/// Mean over agents of the distance to the nearest other agent.
///
/// A single agent has no neighbour; its distance is taken as zero.
pub fn mean_nn_dist(positions: &[[f64; 2]]) -> f64 {
    let n = positions.len();
    if n < 2 {
        return 0.0;
    }
    let mut nearest = vec![f64::INFINITY; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let d = (dx * dx + dy * dy).sqrt();
            if d < nearest[i] {
                nearest[i] = d;
            }
            if d < nearest[j] {
                nearest[j] = d;
            }
        }
    }
    nearest.iter().sum::<f64>() / n as f64
}

/// Order parameters for every frame of a trajectory.
#[derive(Debug, Clone)]
pub struct OrderParamSeries {
    pub times: Vec<f64>,
    pub values: Vec<OrderParams>,
}

pub fn order_param_series(traj: &Trajectory) -> OrderParamSeries {
    OrderParamSeries {
        times: traj.frames.iter().map(|f| f.t).collect(),
        values: traj.frames.iter().map(order_params).collect(),
    }
}

/// Frame count of the standard sampling (t_end 100, dt 0.05).
pub const STANDARD_FRAMES: usize = 2001;
/// Downsampling stride applied to descriptor time series.
pub const DOWNSAMPLE_FACTOR: usize = 23;
/// Length of a downsampled series.
pub const DOWNSAMPLED_LEN: usize = STANDARD_FRAMES / DOWNSAMPLE_FACTOR;

/// Indices retained by downsampling every `factor`-th frame: `factor - 1`,
/// `2 * factor - 1`, ... (the initial frame is never retained).
pub fn downsample_indices(len: usize, factor: usize) -> Result<Vec<usize>, DescriptorError> {
    if factor == 0 {
        return Err(DescriptorError::BadFactor);
    }
    Ok((1..=len / factor).map(|m| m * factor - 1).collect())
}

/// One named order-parameter channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Polarization,
    AngMomentum,
    AbsAngMomentum,
    MeanNnDist,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::Polarization,
        Channel::AngMomentum,
        Channel::AbsAngMomentum,
        Channel::MeanNnDist,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Channel::Polarization => "pol",
            Channel::AngMomentum => "mang",
            Channel::AbsAngMomentum => "mabs",
            Channel::MeanNnDist => "dnn",
        }
    }

    fn get(self, op: &OrderParams) -> f64 {
        match self {
            Channel::Polarization => op.polarization,
            Channel::AngMomentum => op.ang_momentum,
            Channel::AbsAngMomentum => op.abs_ang_momentum,
            Channel::MeanNnDist => op.mean_nn_dist,
        }
    }
}

/// Downsampled feature vector for one run and one channel subset.
///
/// The trajectory must use the standard sampling (2001 frames). Each
/// selected channel contributes `DOWNSAMPLED_LEN` values; channels are
/// concatenated in the order given.
pub fn order_param_features(
    series: &OrderParamSeries,
    channels: &[Channel],
) -> Result<Vec<f64>, DescriptorError> {
    if series.values.len() != STANDARD_FRAMES {
        return Err(DescriptorError::WrongFrameCount {
            got: series.values.len(),
            expected: STANDARD_FRAMES,
        });
    }
    let idx = downsample_indices(STANDARD_FRAMES, DOWNSAMPLE_FACTOR)?;
    debug_assert_eq!(idx.len(), DOWNSAMPLED_LEN);
    let mut out = Vec::with_capacity(channels.len() * idx.len());
    for &ch in channels {
        out.extend(idx.iter().map(|&j| ch.get(&series.values[j])));
    }
    Ok(out)
}
