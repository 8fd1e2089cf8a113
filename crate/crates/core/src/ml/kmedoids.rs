//! PAM (partitioning around medoids) clustering.
//!
//! The core is the classic two-phase algorithm: BUILD greedily
//! accumulates medoids by largest cost decrease, then SWAP repeatedly
//! applies the single best (medoid, non-medoid) exchange until no
//! exchange lowers the total cost. Two adjustments tighten it up:
//!
//! * Tiny instances (at most [`EXACT_SUBSET_LIMIT`] medoid subsets)
//!   are solved exactly by enumeration. Single-swap search can stall
//!   on a cost plateau a two-element exchange away from the optimum --
//!   real six-point instances exhibit this -- and at that size
//!   enumeration is cheaper than one SWAP pass anyway.
//! * Larger instances run SWAP from two deterministic starts, classic
//!   BUILD and a farthest-first sweep, keeping the cheaper converged
//!   solution.
//!
//! Every start and every tie-break is index-ordered, so the result is
//! fully deterministic and there is no seed parameter.

use crate::tda::DistanceMatrix;

use super::MlError;

/// A clustering of `n` items around `k` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub k: usize,
    /// Item indices of the medoids, ascending.
    pub medoids: Vec<usize>,
    /// For each item, the index into `medoids` of its cluster.
    pub assignment: Vec<usize>,
    /// Sum over items of the distance to their medoid.
    pub cost: f64,
}

/// Instances with at most this many k-subsets are solved exactly.
const EXACT_SUBSET_LIMIT: u64 = 2000;

/// `C(n, k)` saturating at `u64::MAX`.
fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc
            .saturating_mul((n - i) as u64)
            .checked_div((i + 1) as u64)
            .unwrap_or(u64::MAX);
        // Exact at every step because C(n, i + 1) is an integer.
    }
    acc
}

/// Exhaustive minimum-cost medoid subset, lexicographically first on
/// ties.
fn exact_medoids(d: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = d.n();
    let mut current: Vec<usize> = (0..k).collect();
    let mut best = current.clone();
    let mut best_cost = f64::INFINITY;
    loop {
        let cost: f64 = (0..n)
            .map(|j| {
                current
                    .iter()
                    .map(|&m| d.get(m, j))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        if cost < best_cost {
            best_cost = cost;
            best.copy_from_slice(&current);
        }
        // Advance to the next k-combination in lexicographic order.
        let mut idx = k;
        loop {
            if idx == 0 {
                return best;
            }
            idx -= 1;
            if current[idx] < n - (k - idx) {
                current[idx] += 1;
                for j in (idx + 1)..k {
                    current[j] = current[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The item minimizing total distance to all items (lowest index on
/// ties).
fn one_median(d: &DistanceMatrix) -> usize {
    let n = d.n();
    (0..n)
        .min_by(|&a, &b| {
            let sa: f64 = (0..n).map(|j| d.get(a, j)).sum();
            let sb: f64 = (0..n).map(|j| d.get(b, j)).sum();
            sa.partial_cmp(&sb).unwrap().then(a.cmp(&b))
        })
        .unwrap()
}

/// Classic BUILD: grow from the 1-median by largest cost decrease.
fn build_start(d: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = d.n();
    let mut medoids = Vec::with_capacity(k);
    let mut is_medoid = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];

    let first = one_median(d);
    medoids.push(first);
    is_medoid[first] = true;
    for (j, nj) in nearest.iter_mut().enumerate() {
        *nj = d.get(first, j);
    }

    while medoids.len() < k {
        let mut best = usize::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        for cand in (0..n).filter(|&c| !is_medoid[c]) {
            let gain: f64 = (0..n)
                .map(|j| (nearest[j] - d.get(cand, j)).max(0.0))
                .sum();
            if gain > best_gain {
                best_gain = gain;
                best = cand;
            }
        }
        medoids.push(best);
        is_medoid[best] = true;
        for (j, nj) in nearest.iter_mut().enumerate() {
            *nj = nj.min(d.get(best, j));
        }
    }
    medoids
}

/// Farthest-first start: grow from the 1-median by maximin distance.
/// Lands in different basins than BUILD when clusters have very
/// different spreads.
fn spread_start(d: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = d.n();
    let mut medoids = Vec::with_capacity(k);
    let mut is_medoid = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];

    let first = one_median(d);
    medoids.push(first);
    is_medoid[first] = true;
    for (j, nj) in nearest.iter_mut().enumerate() {
        *nj = d.get(first, j);
    }

    while medoids.len() < k {
        let mut best = usize::MAX;
        let mut best_dist = f64::NEG_INFINITY;
        for cand in (0..n).filter(|&c| !is_medoid[c]) {
            if nearest[cand] > best_dist {
                best_dist = nearest[cand];
                best = cand;
            }
        }
        medoids.push(best);
        is_medoid[best] = true;
        for (j, nj) in nearest.iter_mut().enumerate() {
            *nj = nj.min(d.get(best, j));
        }
    }
    medoids
}

/// Run SWAP to convergence from the given medoid set; returns the
/// final set and its total cost.
fn swap_to_convergence(d: &DistanceMatrix, mut medoids: Vec<usize>) -> (Vec<usize>, f64) {
    let n = d.n();
    let k = medoids.len();
    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }

    // nearest1/nearest2: distance to the closest and second-closest
    // medoid; who1 is the position (in `medoids`) of the closest.
    let mut nearest1 = vec![0.0; n];
    let mut nearest2 = vec![0.0; n];
    let mut who1 = vec![0usize; n];
    let recompute = |medoids: &[usize],
                     nearest1: &mut [f64],
                     nearest2: &mut [f64],
                     who1: &mut [usize]| {
        for j in 0..n {
            let mut d1 = f64::INFINITY;
            let mut d2 = f64::INFINITY;
            let mut w1 = 0;
            for (mi, &m) in medoids.iter().enumerate() {
                let dist = d.get(m, j);
                if dist < d1 {
                    d2 = d1;
                    d1 = dist;
                    w1 = mi;
                } else if dist < d2 {
                    d2 = dist;
                }
            }
            nearest1[j] = d1;
            nearest2[j] = d2;
            who1[j] = w1;
        }
    };
    recompute(&medoids, &mut nearest1, &mut nearest2, &mut who1);

    loop {
        let mut best_delta = 0.0;
        let mut best_swap: Option<(usize, usize)> = None;
        for mi in 0..k {
            for h in (0..n).filter(|&h| !is_medoid[h]) {
                let mut delta = 0.0;
                for j in 0..n {
                    let dh = d.get(h, j);
                    if who1[j] == mi {
                        // j loses its medoid; it moves to h or to its
                        // second choice, whichever is closer.
                        delta += dh.min(nearest2[j]) - nearest1[j];
                    } else if dh < nearest1[j] {
                        delta += dh - nearest1[j];
                    }
                }
                if delta < best_delta {
                    best_delta = delta;
                    best_swap = Some((mi, h));
                }
            }
        }
        let Some((mi, h)) = best_swap else { break };
        is_medoid[medoids[mi]] = false;
        is_medoid[h] = true;
        medoids[mi] = h;
        recompute(&medoids, &mut nearest1, &mut nearest2, &mut who1);
    }

    let cost = nearest1.iter().sum();
    (medoids, cost)
}

pub fn pam_kmedoids(d: &DistanceMatrix, k: usize) -> Result<ClusterResult, MlError> {
    let n = d.n();
    if k == 0 || k > n {
        return Err(MlError::InvalidK { k, n });
    }

    let mut medoids = if binomial(n, k) <= EXACT_SUBSET_LIMIT {
        exact_medoids(d, k)
    } else {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for start in [build_start(d, k), spread_start(d, k)] {
            let (medoids, cost) = swap_to_convergence(d, start);
            if best.as_ref().map_or(true, |(_, c)| cost < *c) {
                best = Some((medoids, cost));
            }
        }
        best.unwrap().0
    };

    // --- finalize -----------------------------------------------------
    medoids.sort_unstable();
    let mut assignment = vec![0usize; n];
    let mut cost = 0.0;
    for (j, slot) in assignment.iter_mut().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (mi, &m) in medoids.iter().enumerate() {
            let dist = d.get(m, j);
            if dist < best_d {
                best_d = dist;
                best = mi;
            }
        }
        *slot = best;
        cost += best_d;
    }
    Ok(ClusterResult { k, medoids, assignment, cost })
}
