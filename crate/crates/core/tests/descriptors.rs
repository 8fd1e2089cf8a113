//! Order-parameter definitions checked on hand-built configurations
//! with known exact values, plus their symmetry properties.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swarmtopo::descriptors::{
    downsample_indices, mean_nn_dist, order_param_features, order_param_series, order_params,
    Channel, DescriptorError, OrderParamSeries, OrderParams, DOWNSAMPLED_LEN, DOWNSAMPLE_FACTOR,
    STANDARD_FRAMES,
};
use swarmtopo::sim::{simulate, Frame, SwarmParams};

fn frame(positions: Vec<[f64; 2]>, velocities: Vec<[f64; 2]>) -> Frame {
    Frame { t: 0.0, positions, velocities }
}

fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> Frame {
    let draw = |rng: &mut ChaCha8Rng| {
        [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]
    };
    frame(
        (0..n).map(|_| draw(rng)).collect(),
        (0..n).map(|_| draw(rng)).collect(),
    )
}

#[test]
fn aligned_flock_is_polarized_but_not_rotating() {
    // A rigid lattice translating along +x.
    let positions = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let velocities = vec![[2.0, 0.0]; 4];
    let op = order_params(&frame(positions, velocities));
    assert_eq!(op.polarization, 1.0);
    // Positions relative to the center of mass sum to zero, so the net
    // angular momentum vanishes identically.
    assert!(op.ang_momentum < 1e-15, "M_ang = {}", op.ang_momentum);
    assert!(op.abs_ang_momentum > 0.5, "M_abs = {}", op.abs_ang_momentum);
    // Unit square: every agent's nearest neighbour sits at distance 1.
    assert!((op.mean_nn_dist - 1.0).abs() < 1e-15);
    assert!(!op.degenerate_speed);
    assert!(!op.degenerate_moment);
}

#[test]
fn rigid_rotation_is_a_perfect_mill() {
    // Agents evenly spaced on a circle, velocities tangential: every
    // cross product has the same sign, so M_ang = M_abs = 1, while the
    // velocity vectors cancel pairwise, so P = 0.
    let n = 12;
    let omega = 0.7;
    let mut positions = Vec::new();
    let mut velocities = Vec::new();
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let (s, c) = a.sin_cos();
        positions.push([2.0 * c, 2.0 * s]);
        velocities.push([-2.0 * omega * s, 2.0 * omega * c]);
    }
    let op = order_params(&frame(positions, velocities));
    assert!(op.polarization < 1e-12, "P = {}", op.polarization);
    assert!((op.ang_momentum - 1.0).abs() < 1e-12);
    assert!((op.abs_ang_momentum - 1.0).abs() < 1e-12);
}

#[test]
fn counter_rotating_rings_cancel_net_momentum_only() {
    // Two concentric rings spinning in opposite directions. Each
    // agent's cross product is +-|r||v|, so matching that product
    // between the rings (1 * 4 inside, 2 * 2 outside) cancels the net
    // momentum exactly while the absolute momentum stays at 1.
    let n = 8;
    let mut positions = Vec::new();
    let mut velocities = Vec::new();
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let (s, c) = a.sin_cos();
        positions.push([c, s]);
        velocities.push([-4.0 * s, 4.0 * c]); // counter-clockwise
        positions.push([2.0 * c, 2.0 * s]);
        velocities.push([2.0 * s, -2.0 * c]); // clockwise
    }
    let op = order_params(&frame(positions, velocities));
    assert!(op.ang_momentum < 1e-12, "M_ang = {}", op.ang_momentum);
    assert!((op.abs_ang_momentum - 1.0).abs() < 1e-12);
}

#[test]
fn order_params_are_rigid_motion_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..25 {
        let f = random_frame(&mut rng, 17);
        let base = order_params(&f);

        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        let shift = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let rot = |p: &[f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        let moved = frame(
            f.positions.iter().map(|p| {
                let r = rot(p);
                [r[0] + shift[0], r[1] + shift[1]]
            }).collect(),
            f.velocities.iter().map(&rot).collect(),
        );
        let got = order_params(&moved);
        assert!((got.polarization - base.polarization).abs() < 1e-12);
        assert!((got.ang_momentum - base.ang_momentum).abs() < 1e-12);
        assert!((got.abs_ang_momentum - base.abs_ang_momentum).abs() < 1e-12);
        assert!((got.mean_nn_dist - base.mean_nn_dist).abs() < 1e-12);
    }
}

#[test]
fn degenerate_configurations_are_flagged_not_nan() {
    // Everything at rest: both denominators vanish.
    let op = order_params(&frame(
        vec![[0.0, 0.0], [1.0, 0.0]],
        vec![[0.0, 0.0], [0.0, 0.0]],
    ));
    assert!(op.degenerate_speed && op.degenerate_moment);
    assert_eq!(op.polarization, 0.0);
    assert_eq!(op.ang_momentum, 0.0);
    assert_eq!(op.abs_ang_momentum, 0.0);
    assert!(op.polarization.is_finite());

    // All agents stacked on the center of mass: moments degenerate but
    // polarization is still well defined.
    let op = order_params(&frame(
        vec![[2.0, 3.0], [2.0, 3.0]],
        vec![[1.0, 0.0], [1.0, 0.0]],
    ));
    assert!(!op.degenerate_speed && op.degenerate_moment);
    assert_eq!(op.polarization, 1.0);
    assert_eq!(op.ang_momentum, 0.0);
    assert_eq!(op.mean_nn_dist, 0.0);
}

#[test]
fn mean_nn_dist_hand_cases() {
    assert_eq!(mean_nn_dist(&[[0.0, 0.0]]), 0.0);
    assert_eq!(mean_nn_dist(&[]), 0.0);
    assert!((mean_nn_dist(&[[0.0, 0.0], [3.0, 4.0]]) - 5.0).abs() < 1e-15);
    // Collinear 0, 1, 3: nearest distances 1, 1, 2.
    let d = mean_nn_dist(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]);
    assert!((d - 4.0 / 3.0).abs() < 1e-15);
    // A duplicated point contributes zero for both copies.
    let d = mean_nn_dist(&[[0.0, 0.0], [0.0, 0.0], [7.0, 0.0]]);
    assert!((d - 7.0 / 3.0).abs() < 1e-15);
}

#[test]
fn downsample_keeps_every_factor_th_frame() {
    let idx = downsample_indices(STANDARD_FRAMES, DOWNSAMPLE_FACTOR).unwrap();
    assert_eq!(idx.len(), DOWNSAMPLED_LEN);
    assert_eq!(idx.len(), 87);
    assert_eq!(idx[0], 22);
    assert_eq!(*idx.last().unwrap(), 2000);
    assert!(idx.windows(2).all(|w| w[1] - w[0] == DOWNSAMPLE_FACTOR));

    assert_eq!(downsample_indices(10, 3).unwrap(), vec![2, 5, 8]);
    assert_eq!(downsample_indices(4, 1).unwrap(), vec![0, 1, 2, 3]);
    assert_eq!(downsample_indices(2, 5).unwrap(), Vec::<usize>::new());
    assert!(matches!(downsample_indices(10, 0), Err(DescriptorError::BadFactor)));
}

#[test]
fn channel_names_are_stable() {
    let names: Vec<&str> = Channel::ALL.iter().map(|c| c.short_name()).collect();
    assert_eq!(names, vec!["pol", "mang", "mabs", "dnn"]);
}

/// A synthetic series whose four channels encode the frame index in
/// different thousands blocks, making concatenation order visible.
fn coded_series(frames: usize) -> OrderParamSeries {
    let values = (0..frames)
        .map(|i| OrderParams {
            polarization: i as f64,
            ang_momentum: 1000.0 + i as f64,
            abs_ang_momentum: 2000.0 + i as f64,
            mean_nn_dist: 3000.0 + i as f64,
            degenerate_speed: false,
            degenerate_moment: false,
        })
        .collect();
    OrderParamSeries {
        times: (0..frames).map(|i| i as f64 * 0.05).collect(),
        values,
    }
}

#[test]
fn features_concatenate_channels_in_given_order() {
    let series = coded_series(STANDARD_FRAMES);
    let feats = order_param_features(&series, &Channel::ALL).unwrap();
    assert_eq!(feats.len(), 4 * DOWNSAMPLED_LEN);
    for (c, base) in [0.0, 1000.0, 2000.0, 3000.0].into_iter().enumerate() {
        for m in 0..DOWNSAMPLED_LEN {
            let want = base + ((m + 1) * DOWNSAMPLE_FACTOR - 1) as f64;
            assert_eq!(feats[c * DOWNSAMPLED_LEN + m], want, "channel {c} sample {m}");
        }
    }

    // Subsets and reorderings are honoured literally.
    let feats = order_param_features(&series, &[Channel::MeanNnDist, Channel::Polarization])
        .unwrap();
    assert_eq!(feats.len(), 2 * DOWNSAMPLED_LEN);
    assert_eq!(feats[0], 3000.0 + 22.0);
    assert_eq!(feats[DOWNSAMPLED_LEN], 22.0);

    let short = coded_series(100);
    assert!(matches!(
        order_param_features(&short, &Channel::ALL),
        Err(DescriptorError::WrongFrameCount { got: 100, expected: 2001 })
    ));
}

#[test]
fn series_follows_the_trajectory() {
    let params = SwarmParams {
        n: 6,
        t_end: 1.0,
        seed: 99,
        ..SwarmParams::default()
    };
    let traj = simulate(&params).unwrap();
    let series = order_param_series(&traj);
    assert_eq!(series.times.len(), traj.frames.len());
    assert_eq!(series.values.len(), traj.frames.len());
    for (i, f) in traj.frames.iter().enumerate() {
        assert_eq!(series.times[i], f.t);
        assert_eq!(series.values[i], order_params(f));
    }
    // Physical ranges hold on real data.
    for op in &series.values {
        assert!((0.0..=1.0).contains(&op.polarization));
        assert!((0.0..=1.0).contains(&op.ang_momentum));
        assert!(op.ang_momentum <= op.abs_ang_momentum + 1e-12);
        assert!(op.mean_nn_dist >= 0.0);
    }
}
