use std::time::Instant;
use swarmtopo::sim::{simulate, SwarmParams};
fn main() {
    for (c, ell) in [(0.5, 0.1), (0.9, 0.5), (3.0, 3.0)] {
        let p = SwarmParams { c, ell, seed: 1, ..SwarmParams::default() };
        let t0 = Instant::now();
        let traj = simulate(&p).unwrap();
        let dt = t0.elapsed();
        let last = traj.frames.last().unwrap();
        let ext = last.positions.iter().flatten().fold(0.0f64, |m, &x| m.max(x.abs()));
        println!(
            "c={c} ell={ell}: {:.2?}  steps={} rej={} nfev={} extent={ext:.1}",
            dt, traj.stats.steps_accepted, traj.stats.steps_rejected, traj.stats.rhs_evaluations
        );
    }
}
