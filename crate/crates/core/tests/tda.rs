//! Topology-layer tests. The persistence kernel is checked against an
//! independent brute-force oracle that computes Betti numbers per scale
//! from boundary-matrix ranks over GF(2), plus closed-form diagrams of
//! known shapes and metric stability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmtopo::sim::{Frame, SimStats, SwarmParams, Trajectory};
use swarmtopo::tda::{
    betti_curve, clamp_escapes, crocker_features, crocker_matrices, delay_embed,
    normalize_sequence, position_clouds, vr_persistence, CloudSequence, DistanceMatrix,
    EpsilonGrid, Interval, TdaError,
};

// --- brute-force oracle ---------------------------------------------------

/// Rank over GF(2) of a matrix given as bitmask rows (max 64 columns).
fn rank_gf2(rows: impl IntoIterator<Item = u64>) -> usize {
    let mut pivot_by_bit: Vec<Option<u64>> = vec![None; 64];
    let mut rank = 0;
    for mut r in rows {
        while r != 0 {
            let bit = r.trailing_zeros() as usize;
            match pivot_by_bit[bit] {
                Some(p) => r ^= p,
                None => {
                    pivot_by_bit[bit] = Some(r);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Betti numbers (b0, b1) of the Vietoris-Rips complex of `d` at scale
/// `eps` (simplices of diameter <= eps, dimensions 0..=2), computed from
/// boundary ranks: b0 = V - rank d1, b1 = (E - rank d1) - rank d2.
/// Supports up to 11 points (55 edges fit in a u64 row).
fn oracle_betti(d: &DistanceMatrix, eps: f64) -> (usize, usize) {
    let n = d.n();
    assert!(n <= 11);
    let mut edges = Vec::new();
    let mut edge_idx = vec![vec![usize::MAX; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if d.get(i, j) <= eps {
                edge_idx[i][j] = edges.len();
                edges.push((i, j));
            }
        }
    }
    let rank1 = rank_gf2(edges.iter().map(|&(i, j)| (1u64 << i) | (1 << j)));
    let mut tri_rows = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if d.get(i, j) > eps {
                continue;
            }
            for k in (j + 1)..n {
                if d.get(i, k) <= eps && d.get(j, k) <= eps {
                    tri_rows.push(
                        (1u64 << edge_idx[i][j])
                            | (1 << edge_idx[i][k])
                            | (1 << edge_idx[j][k]),
                    );
                }
            }
        }
    }
    let rank2 = rank_gf2(tri_rows);
    (n - rank1, (edges.len() - rank1) - rank2)
}

/// Scale values probing every distinct distance, the gaps between them,
/// and the far side of the largest distance.
fn probe_scales(d: &DistanceMatrix, cap: f64) -> Vec<f64> {
    let n = d.n();
    let mut vals: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            vals.push(d.get(i, j));
        }
    }
    vals.retain(|v| *v > 0.0);
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals.dedup();
    let mut scales = vec![1e-9];
    for w in 0..vals.len() {
        scales.push(vals[w]);
        let next = if w + 1 < vals.len() { vals[w + 1] } else { vals[w] * 1.25 };
        scales.push((vals[w] + next) / 2.0);
    }
    scales.dedup();
    scales.retain(|s| *s <= cap);
    scales
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, lattice: bool) -> Vec<f64> {
    (0..2 * n)
        .map(|_| {
            if lattice {
                // Snap to a coarse lattice to force distance ties and
                // duplicate points.
                (rng.random_range(-3i32..=3) as f64) / 2.0
            } else {
                rng.random_range(-2.0..=2.0)
            }
        })
        .collect()
}

/// The central correctness test: on random clouds (generic and
/// tie-heavy), the diagrams sampled at any scale must reproduce the
/// brute-force Betti numbers, both uncapped and with a diameter cap.
#[test]
fn diagrams_match_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..150 {
        let n = 2 + case % 10;
        let cloud = random_cloud(&mut rng, n, case % 3 == 0);
        let d = DistanceMatrix::from_cloud(&cloud, 2).unwrap();
        let max_d = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| d.get(i, j))
            .fold(0.0f64, f64::max);
        let cap = if case % 2 == 0 { f64::INFINITY } else { 0.6 * max_d.max(1e-6) };

        let diag = vr_persistence(&d, cap).unwrap();
        let scales = probe_scales(&d, if cap.is_finite() { cap } else { f64::MAX });
        let grid = EpsilonGrid::from_values(scales.clone()).unwrap();
        let curve0 = betti_curve(&diag.h0, &grid);
        let curve1 = betti_curve(&diag.h1, &grid);
        for (s, &eps) in scales.iter().enumerate() {
            let (b0, b1) = oracle_betti(&d, eps);
            assert_eq!(
                curve0[s] as usize, b0,
                "case {case} n {n} cap {cap}: b0 at eps {eps}"
            );
            assert_eq!(
                curve1[s] as usize, b1,
                "case {case} n {n} cap {cap}: b1 at eps {eps}"
            );
        }

        // Exactly one infinite component, always.
        assert_eq!(diag.h0.intervals.iter().filter(|iv| iv.is_infinite()).count(), 1);
        // Open loops at the cap are exactly the oracle's b1 there.
        if cap.is_finite() {
            let open = diag.h1.intervals.iter().filter(|iv| iv.is_infinite()).count();
            assert_eq!(open, oracle_betti(&d, cap).1, "case {case}: open loops at cap");
        } else {
            assert!(diag.h1.intervals.iter().all(|iv| !iv.is_infinite()));
        }
        // All intervals are strictly increasing pairs.
        for iv in diag.h0.intervals.iter().chain(&diag.h1.intervals) {
            assert!(iv.birth < iv.death);
        }
    }
}

// --- known shapes ---------------------------------------------------------

#[test]
fn unit_square_has_one_loop() {
    let d = DistanceMatrix::from_cloud(&[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0], 2).unwrap();
    let diag = vr_persistence(&d, f64::INFINITY).unwrap();
    assert_eq!(diag.h1.intervals.len(), 1);
    let iv = diag.h1.intervals[0];
    assert!((iv.birth - 1.0).abs() < 1e-15);
    assert!((iv.death - 2f64.sqrt()).abs() < 1e-15);
    // components: 4 -> 1 at scale 1
    assert_eq!(diag.h0.intervals.len(), 4);
    assert_eq!(
        diag.h0.intervals.iter().filter(|iv| (iv.death - 1.0).abs() < 1e-15).count(),
        3
    );
}

#[test]
fn regular_hexagon_loop_dies_at_sqrt3() {
    let pts: Vec<f64> = (0..6)
        .flat_map(|k| {
            let a = std::f64::consts::PI / 3.0 * k as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    let d = DistanceMatrix::from_cloud(&pts, 2).unwrap();
    let diag = vr_persistence(&d, f64::INFINITY).unwrap();
    // Side length 1 closes the loop; the first filling triangles appear
    // at the medium diagonal sqrt(3).
    assert_eq!(diag.h1.intervals.len(), 1);
    let iv = diag.h1.intervals[0];
    assert!((iv.birth - 1.0).abs() < 1e-12);
    assert!((iv.death - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn circle_of_points_has_a_persistent_loop() {
    let n = 20;
    let pts: Vec<f64> = (0..n)
        .flat_map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    let d = DistanceMatrix::from_cloud(&pts, 2).unwrap();
    let diag = vr_persistence(&d, f64::INFINITY).unwrap();
    let side = 2.0 * (std::f64::consts::PI / n as f64).sin();
    let main: Vec<_> = diag
        .h1
        .intervals
        .iter()
        .filter(|iv| iv.persistence() > 0.5)
        .collect();
    assert_eq!(main.len(), 1, "{:?}", diag.h1.intervals);
    assert!((main[0].birth - side).abs() < 1e-12);
    assert!(main[0].death > 1.5 && main[0].death < 1.8);
}

#[test]
fn two_far_squares_have_two_loops_and_two_components() {
    let mut pts = vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    for p in [[50.0, 0.0], [51.0, 0.0], [51.0, 1.0], [50.0, 1.0]] {
        pts.extend_from_slice(&p);
    }
    let d = DistanceMatrix::from_cloud(&pts, 2).unwrap();
    // Cap below the bridging distance: the two components never join.
    let diag = vr_persistence(&d, 10.0).unwrap();
    assert_eq!(diag.h1.intervals.len(), 2);
    for iv in &diag.h1.intervals {
        assert!((iv.birth - 1.0).abs() < 1e-15);
        assert!((iv.death - 2f64.sqrt()).abs() < 1e-15);
    }
    let grid = EpsilonGrid::from_values(vec![1.5, 20.0, 60.0]).unwrap();
    assert_eq!(betti_curve(&diag.h0, &grid), vec![2, 2, 1]);
}

#[test]
fn collinear_points_have_no_loops() {
    let pts: Vec<f64> = (0..8).flat_map(|k| [k as f64 * 0.3, 0.0]).collect();
    let d = DistanceMatrix::from_cloud(&pts, 2).unwrap();
    let diag = vr_persistence(&d, f64::INFINITY).unwrap();
    assert!(diag.h1.intervals.is_empty());
}

#[test]
fn single_point_and_duplicates() {
    let d = DistanceMatrix::from_cloud(&[0.5, 0.5], 2).unwrap();
    let diag = vr_persistence(&d, 1.0).unwrap();
    assert_eq!(diag.h0.intervals.len(), 1);
    assert!(diag.h0.intervals[0].is_infinite());
    assert!(diag.h1.intervals.is_empty());

    // Three coincident points: merges at distance zero are not features.
    let d = DistanceMatrix::from_cloud(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 2).unwrap();
    let diag = vr_persistence(&d, 1.0).unwrap();
    assert_eq!(diag.h0.intervals.len(), 1);
    let grid = EpsilonGrid::from_values(vec![1e-6, 1.0]).unwrap();
    assert_eq!(betti_curve(&diag.h0, &grid), vec![1, 1]);
}

// --- invariances ----------------------------------------------------------

fn sorted_intervals(ivs: &[Interval]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = ivs.iter().map(|iv| (iv.birth, iv.death)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn permuting_points_leaves_diagrams_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let cloud = random_cloud(&mut rng, 9, false);
        let d = DistanceMatrix::from_cloud(&cloud, 2).unwrap();
        let a = vr_persistence(&d, f64::INFINITY).unwrap();

        let mut order: Vec<usize> = (0..9).collect();
        for i in (1..9).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let permuted: Vec<f64> = order
            .iter()
            .flat_map(|&i| [cloud[2 * i], cloud[2 * i + 1]])
            .collect();
        let dp = DistanceMatrix::from_cloud(&permuted, 2).unwrap();
        let b = vr_persistence(&dp, f64::INFINITY).unwrap();
        assert_eq!(sorted_intervals(&a.h1.intervals), sorted_intervals(&b.h1.intervals));
        assert_eq!(sorted_intervals(&a.h0.intervals), sorted_intervals(&b.h0.intervals));
    }
}

#[test]
fn scaling_scales_diagrams() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cloud = random_cloud(&mut rng, 8, false);
    let d = vr_persistence(&DistanceMatrix::from_cloud(&cloud, 2).unwrap(), f64::INFINITY)
        .unwrap();
    let s = 3.7;
    let scaled: Vec<f64> = cloud.iter().map(|c| c * s).collect();
    let ds = vr_persistence(&DistanceMatrix::from_cloud(&scaled, 2).unwrap(), f64::INFINITY)
        .unwrap();
    let (a, b) = (sorted_intervals(&d.h1.intervals), sorted_intervals(&ds.h1.intervals));
    assert_eq!(a.len(), b.len());
    for ((b1, d1), (b2, d2)) in a.iter().zip(&b) {
        assert!((b1 * s - b2).abs() < 1e-12 * s);
        assert!((d1 * s - d2).abs() < 1e-12 * s);
    }
}

#[test]
fn rigid_motion_leaves_diagrams_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cloud = random_cloud(&mut rng, 8, false);
    let d = vr_persistence(&DistanceMatrix::from_cloud(&cloud, 2).unwrap(), f64::INFINITY)
        .unwrap();
    let (c, s) = (0.6f64.cos(), 0.6f64.sin());
    let moved: Vec<f64> = cloud
        .chunks(2)
        .flat_map(|p| [c * p[0] - s * p[1] + 5.0, s * p[0] + c * p[1] - 2.0])
        .collect();
    let dm = vr_persistence(&DistanceMatrix::from_cloud(&moved, 2).unwrap(), f64::INFINITY)
        .unwrap();
    let (a, b) = (sorted_intervals(&d.h1.intervals), sorted_intervals(&dm.h1.intervals));
    assert_eq!(a.len(), b.len());
    for ((b1, d1), (b2, d2)) in a.iter().zip(&b) {
        assert!((b1 - b2).abs() < 1e-9 && (d1 - d2).abs() < 1e-9);
    }
}

// --- stability ------------------------------------------------------------

/// Can every interval of `a` be matched to one of `b` within `t` in the
/// max-norm, unmatched intervals going to the diagonal (allowed when
/// persistence <= 2t)? Checked by bipartite augmenting paths; a `true`
/// answer certifies bottleneck distance <= t.
fn bottleneck_at_most(a: &[Interval], b: &[Interval], t: f64) -> bool {
    let close = |x: &Interval, y: &Interval| {
        (x.birth - y.birth).abs().max((x.death - y.death).abs()) <= t
    };
    let low = |x: &Interval| x.persistence() <= 2.0 * t;
    // Every high-persistence interval on either side must be matched to
    // a real interval on the other side; low-persistence ones may also
    // pair with the diagonal. Build the matching over `a`'s intervals.
    let mut match_of_b: Vec<Option<usize>> = vec![None; b.len()];
    let mut match_of_a: Vec<Option<usize>> = vec![None; a.len()];

    fn augment(
        i: usize,
        a: &[Interval],
        b: &[Interval],
        close: &dyn Fn(&Interval, &Interval) -> bool,
        seen: &mut [bool],
        match_of_a: &mut [Option<usize>],
        match_of_b: &mut [Option<usize>],
    ) -> bool {
        for j in 0..b.len() {
            if !seen[j] && close(&a[i], &b[j]) {
                seen[j] = true;
                let free = match match_of_b[j] {
                    None => true,
                    Some(prev) => augment(prev, a, b, close, seen, match_of_a, match_of_b),
                };
                if free {
                    match_of_b[j] = Some(i);
                    match_of_a[i] = Some(j);
                    return true;
                }
            }
        }
        false
    }

    for i in 0..a.len() {
        if low(&a[i]) {
            continue;
        }
        let mut seen = vec![false; b.len()];
        if !augment(i, a, b, &close, &mut seen, &mut match_of_a, &mut match_of_b) {
            return false;
        }
    }
    // High-persistence intervals of b must have been claimed, or be
    // claimable by some remaining low-persistence a interval.
    for j in 0..b.len() {
        if low(&b[j]) || match_of_b[j].is_some() {
            continue;
        }
        let mut found = false;
        for i in 0..a.len() {
            if match_of_a[i].is_none() && close(&a[i], &b[j]) {
                match_of_a[i] = Some(j);
                match_of_b[j] = Some(i);
                found = true;
                break;
            }
        }
        if !found {
            return false;
        }
    }
    true
}

/// Perturbing every point by at most delta moves both diagrams by at
/// most 2 delta in bottleneck distance.
#[test]
fn small_perturbations_move_diagrams_little() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..15 {
        let n = 6 + case % 5;
        let cloud = random_cloud(&mut rng, n, false);
        let delta = 0.005;
        let noisy: Vec<f64> = cloud
            .iter()
            .map(|c| c + rng.random_range(-delta..=delta))
            .collect();
        let a = vr_persistence(&DistanceMatrix::from_cloud(&cloud, 2).unwrap(), f64::INFINITY)
            .unwrap();
        let b = vr_persistence(&DistanceMatrix::from_cloud(&noisy, 2).unwrap(), f64::INFINITY)
            .unwrap();
        // Each point moved by at most delta * sqrt(2) in Euclidean norm.
        let bound = 2.0 * delta * 2f64.sqrt() + 1e-12;
        assert!(
            bottleneck_at_most(&a.h1.intervals, &b.h1.intervals, bound),
            "case {case}: h1 moved more than {bound}"
        );
        let fin_a: Vec<Interval> =
            a.h0.intervals.iter().copied().filter(|iv| !iv.is_infinite()).collect();
        let fin_b: Vec<Interval> =
            b.h0.intervals.iter().copied().filter(|iv| !iv.is_infinite()).collect();
        assert!(
            bottleneck_at_most(&fin_a, &fin_b, bound),
            "case {case}: h0 moved more than {bound}"
        );
    }
}

// --- preprocessing and crocker assembly -----------------------------------

/// A synthetic standard-sampling trajectory: four agents on a slowly
/// growing square, one of which escapes along +x at constant speed.
fn synthetic_trajectory(escaper: bool) -> Trajectory {
    let mut params = SwarmParams { c: 0.7, ell: 0.7, ..SwarmParams::default() };
    params.n = 4;
    let m = params.frame_count();
    let frames: Vec<Frame> = (0..m)
        .map(|j| {
            let t = j as f64 * params.sample_dt;
            let half = 1.0 + 0.01 * t;
            let mut positions = vec![
                [-half, -half],
                [half, -half],
                [half, half],
                [-half, half],
            ];
            if escaper {
                positions[2] = [0.3 * t, 0.3 * t * 0.5];
            }
            Frame {
                t,
                positions,
                velocities: vec![[0.0, 0.0]; 4],
            }
        })
        .collect();
    Trajectory { params, phenotype: None, frames, stats: SimStats::default() }
}

#[test]
fn clamp_freezes_escapers_only() {
    let traj = synthetic_trajectory(true);
    let (clamped, report) = clamp_escapes(&traj, 10.0);
    assert_eq!(report.clamped.len(), 1);
    let (agent, first) = report.clamped[0];
    assert_eq!(agent, 2);
    // 0.3 t reaches 10 at t = 100/3, i.e. frame ceil((100/3)/0.05).
    assert_eq!(first, 667);
    let frozen = clamped.frames[first].positions[2];
    assert!(frozen[0] <= 10.0 && frozen[0] >= 10.0 - 1e-9 || frozen[0] == 10.0);
    for f in first..clamped.n_frames() {
        assert_eq!(clamped.frames[f].positions[2], frozen);
        // other agents untouched
        assert_eq!(clamped.frames[f].positions[0], traj.frames[f].positions[0]);
    }
    // before the escape, everything is untouched
    assert_eq!(clamped.frames[first - 1], traj.frames[first - 1]);
    // velocities are never modified
    for (a, b) in clamped.frames.iter().zip(&traj.frames) {
        assert_eq!(a.velocities, b.velocities);
    }

    let (same, empty) = clamp_escapes(&synthetic_trajectory(false), 10.0);
    assert_eq!(empty.n_clamped(), 0);
    assert_eq!(same.frames, synthetic_trajectory(false).frames);
}

#[test]
fn clamp_clips_overshoot_into_the_box() {
    let mut traj = synthetic_trajectory(false);
    traj.frames[500].positions[1] = [10.04, -3.0];
    let (clamped, report) = clamp_escapes(&traj, 10.0);
    assert_eq!(report.clamped, vec![(1, 500)]);
    assert_eq!(clamped.frames[500].positions[1], [10.0, -3.0]);
    assert_eq!(clamped.frames[2000].positions[1], [10.0, -3.0]);
}

#[test]
fn position_clouds_take_every_23rd_frame() {
    let traj = synthetic_trajectory(false);
    let seq = position_clouds(&traj).unwrap();
    assert_eq!(seq.n_frames(), 87);
    assert_eq!(seq.dim, 2);
    assert_eq!(seq.n, 4);
    // Frame 0-based 22 is the first retained one.
    assert_eq!(seq.times[0], traj.frames[22].t);
    assert_eq!(seq.times[86], traj.frames[2000].t);
    assert_eq!(seq.clouds[0][0], traj.frames[22].positions[0][0]);

    let mut short = traj.clone();
    short.frames.truncate(100);
    assert!(matches!(
        position_clouds(&short),
        Err(TdaError::WrongFrameCount { got: 100, .. })
    ));
}

#[test]
fn delay_embedding_pairs_present_with_past() {
    let traj = synthetic_trajectory(false);
    let seq = delay_embed(&traj, 5).unwrap();
    assert_eq!(seq.n_frames(), 86);
    assert_eq!(seq.dim, 4);
    // First embedded frame is the second retained index (0-based 45).
    assert_eq!(seq.times[0], traj.frames[45].t);
    for (w, &j) in [45usize, 68, 2000].iter().enumerate() {
        let t_idx = [0usize, 1, 85][w];
        let cloud = &seq.clouds[t_idx];
        for agent in 0..4 {
            assert_eq!(cloud[4 * agent], traj.frames[j].positions[agent][0]);
            assert_eq!(cloud[4 * agent + 1], traj.frames[j].positions[agent][1]);
            assert_eq!(cloud[4 * agent + 2], traj.frames[j - 5].positions[agent][0]);
            assert_eq!(cloud[4 * agent + 3], traj.frames[j - 5].positions[agent][1]);
        }
    }
    assert!(delay_embed(&traj, 0).is_err());
    assert!(delay_embed(&traj, 45).is_ok());
    assert!(matches!(
        delay_embed(&traj, 46),
        Err(TdaError::DelayTooLarge { needed: 46, first: 45 })
    ));
}

#[test]
fn normalization_divides_and_validates() {
    let mut seq = CloudSequence {
        dim: 2,
        n: 2,
        times: vec![0.0, 1.0],
        clouds: vec![vec![10.0, -5.0, 0.0, 2.5], vec![1.0, 1.0, -10.0, 0.0]],
    };
    normalize_sequence(&mut seq, 10.0).unwrap();
    assert_eq!(seq.clouds[0], vec![1.0, -0.5, 0.0, 0.25]);
    assert_eq!(seq.clouds[1][2], -1.0);

    let mut bad = CloudSequence {
        dim: 2,
        n: 1,
        times: vec![0.0, 1.0],
        clouds: vec![vec![3.0, 0.0], vec![0.0, -10.5]],
    };
    let before = bad.clouds.clone();
    let err = normalize_sequence(&mut bad, 10.0).unwrap_err();
    match err {
        TdaError::NotNormalizable { point, frame, .. } => {
            assert_eq!((point, frame), (0, 1));
        }
        other => panic!("unexpected error {other}"),
    }
    // failed normalization leaves the data untouched
    assert_eq!(bad.clouds, before);
}

#[test]
fn crocker_shapes_and_columns() {
    let traj = synthetic_trajectory(false);
    let seq = position_clouds(&traj).unwrap();
    let grid = EpsilonGrid::from_values(vec![0.5, 2.1, 3.0, 5.0]).unwrap();
    let (b0, b1) = crocker_matrices(&seq, &grid).unwrap();
    assert_eq!((b0.n_scales(), b0.n_times()), (4, 87));
    assert_eq!((b1.betti_dim, b0.betti_dim), (1, 0));
    // The square has side ~2 + 0.02 t and diagonal sqrt(2) times that:
    // at scale 0.5 all four corners are separate, at 2.1 (above the side
    // for early frames) they form a loop, which the diagonal closes.
    assert_eq!(b0.get(0, 0), 4);
    assert_eq!(b0.get(1, 0), 1);
    assert_eq!(b1.get(1, 0), 1);
    assert_eq!(b1.get(3, 0), 0);
    // Per-column values equal an independent per-frame computation.
    for &t in &[0usize, 40, 86] {
        let d = DistanceMatrix::from_cloud(&seq.clouds[t], 2).unwrap();
        let diag = vr_persistence(&d, grid.max()).unwrap();
        let c0 = betti_curve(&diag.h0, &grid);
        let c1 = betti_curve(&diag.h1, &grid);
        for q in 0..grid.len() {
            assert_eq!(b0.get(q, t), c0[q]);
            assert_eq!(b1.get(q, t), c1[q]);
        }
    }
    // row-major flattening, b0 block then b1 block
    let feats = crocker_features(&[&b0, &b1]).unwrap();
    assert_eq!(feats.len(), 2 * 4 * 87);
    assert_eq!(feats[0], b0.get(0, 0) as f64);
    assert_eq!(feats[87], b0.get(1, 0) as f64);
    assert_eq!(feats[4 * 87], b1.get(0, 0) as f64);
    assert_eq!(feats[4 * 87 + 87 + 1], b1.get(1, 1) as f64);

    let only0 = crocker_features(&[&b0]).unwrap();
    assert_eq!(only0.len(), 4 * 87);
    assert_eq!(only0[3 * 87 + 2], f64::from(b0.row(3)[2]));

    assert!(crocker_features(&[]).is_err());
    assert!(crocker_features(&[&b1, &b0]).is_err());
    assert!(crocker_features(&[&b0, &b0]).is_err());
}

/// End-to-end shape check at study dimensions: 200-scale grid over the
/// synthetic run gives 200 x 87 position and 200 x 86 delayed matrices,
/// and flattened combined features of length 2 * 200 * T.
#[test]
fn standard_grid_feature_dimensions() {
    let traj = synthetic_trajectory(false);
    let grid = EpsilonGrid::standard();

    let mut pos = position_clouds(&traj).unwrap();
    normalize_sequence(&mut pos, 10.0).unwrap();
    let (b0, b1) = crocker_matrices(&pos, &grid).unwrap();
    assert_eq!(crocker_features(&[&b0]).unwrap().len(), 17400);
    assert_eq!(crocker_features(&[&b0, &b1]).unwrap().len(), 34800);

    let mut del = delay_embed(&traj, 5).unwrap();
    normalize_sequence(&mut del, 10.0).unwrap();
    let (d0, d1) = crocker_matrices(&del, &grid).unwrap();
    assert_eq!(crocker_features(&[&d0]).unwrap().len(), 17200);
    assert_eq!(crocker_features(&[&d0, &d1]).unwrap().len(), 34400);

    // At the top of the grid (scale 1 after normalization) the four
    // agents sit within an order-0.2 box, so they form one component.
    assert_eq!(b0.get(199, 0), 1);
}
