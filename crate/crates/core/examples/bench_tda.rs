use std::time::Instant;
use swarmtopo::sim::{simulate, SwarmParams};
use swarmtopo::tda::*;

fn main() {
    for (c, ell) in [(0.5, 0.1), (0.9, 0.5), (2.0, 0.9), (3.0, 3.0)] {
        let p = SwarmParams { c, ell, seed: 1, ..SwarmParams::default() };
        let t0 = Instant::now();
        let traj = simulate(&p).unwrap();
        let sim_t = t0.elapsed();
        let (clamped, rep) = clamp_escapes(&traj, CLAMP_THRESHOLD);
        let grid = EpsilonGrid::standard();

        let mut pos = position_clouds(&clamped).unwrap();
        normalize_sequence(&mut pos, NORMALIZE_CONSTANT).unwrap();
        let t1 = Instant::now();
        let (b0, b1) = crocker_matrices(&pos, &grid).unwrap();
        let pos_t = t1.elapsed();

        let mut del = delay_embed(&clamped, DELAY_STEPS).unwrap();
        normalize_sequence(&mut del, NORMALIZE_CONSTANT).unwrap();
        let t2 = Instant::now();
        let (d0, d1) = crocker_matrices(&del, &grid).unwrap();
        let del_t = t2.elapsed();

        println!(
            "c={c} ell={ell}: sim {:.1?}  pos-crocker {:.2?} ({:.1?}/frame)  delay-crocker {:.2?}  clamped={}  b0[199,86]={} b1@mid={} d1@mid={}",
            sim_t, pos_t, pos_t / 87, del_t, rep.n_clamped(),
            b0.get(199, 86), b1.get(100, 86), d1.get(100, 85)
        );
        let _ = (d0, b1);
    }
}
