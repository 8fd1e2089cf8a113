//! Betti curves: persistence diagrams sampled on a scale grid.

use super::{EpsilonGrid, PersistenceDiagram};

/// Number of classes alive at each grid scale. A class with interval
/// `[birth, death)` is alive at scale `eps` iff `birth <= eps < death`,
/// so a class dying exactly on a grid value is not counted there.
pub fn betti_curve(diagram: &PersistenceDiagram, grid: &EpsilonGrid) -> Vec<u32> {
    let t = grid.len();
    let mut diff = vec![0i64; t + 1];
    for iv in &diagram.intervals {
        let b = grid.index_at_or_above(iv.birth);
        if b >= t {
            continue;
        }
        diff[b] += 1;
        if iv.death.is_finite() {
            diff[grid.index_at_or_above(iv.death)] -= 1;
        }
    }
    let mut out = Vec::with_capacity(t);
    let mut acc = 0i64;
    for d in &diff[..t] {
        acc += d;
        debug_assert!(acc >= 0);
        out.push(acc as u32);
    }
    out
}
