//! Adaptive Dormand-Prince 5(4) integration with dense output.
//!
//! This is a straightforward port of the classic DOPRI5 scheme: embedded
//! 5th/4th order error estimate, PI step-size control with Lund
//! stabilization, FSAL reuse of the last stage, and the standard quartic
//! interpolant for dense output. Output states are produced at caller
//! supplied sample times, independent of the accepted step sequence.

use super::SimError;

// Butcher tableau (nodes C, stage coefficients A, error weights E) and the
// dense-output coefficients D of the Dormand-Prince 5(4) pair. The seventh
// stage row of A equals the 5th-order weights B, giving the FSAL property.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

// Step-size controller constants.
const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FACC1: f64 = 5.0; // largest growth factor
const FACC2: f64 = 0.1; // reciprocal of largest shrink factor

const MAX_STEPS: u64 = 5_000_000;
const MAX_BAD_STEPS: u32 = 64;

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    pub nfev: u64,
    pub accepted: u64,
    pub rejected: u64,
}

/// Integrate `y' = f(t, y)` from `sample_times[0]` to the last sample
/// time, returning the dense-output state at every sample time.
///
/// `sample_times` must be strictly increasing; the first entry is the
/// initial time of `y0`.
pub(crate) fn integrate_sampled<F>(
    mut f: F,
    y0: Vec<f64>,
    sample_times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<(Vec<Vec<f64>>, IntegrationStats), SimError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    assert!(sample_times.len() >= 2, "need at least two sample times");
    assert!(
        sample_times.windows(2).all(|w| w[0] < w[1]),
        "sample times must be strictly increasing"
    );
    let n = y0.len();
    let t0 = sample_times[0];
    let t_final = *sample_times.last().unwrap();
    let span = t_final - t0;

    let mut stats = IntegrationStats::default();
    let mut y = y0;
    let mut t = t0;
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut y_stage = vec![0.0; n];
    let mut y_next = vec![0.0; n];
    let mut cont = vec![0.0; 5 * n];

    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(sample_times.len());
    samples.push(y.clone());
    let mut next_sample = 1;

    f(t, &y, &mut k[0]);
    stats.nfev += 1;

    let mut h = initial_step(&mut f, t, &y, &k[0].clone(), span, rtol, atol, &mut stats);
    let mut facold: f64 = 1e-4;
    let mut rejected_last = false;
    let mut bad_steps = 0u32;

    while next_sample < sample_times.len() {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(SimError::StepLimit { t, max_steps: MAX_STEPS });
        }
        if h < 1e-13 * t.abs().max(1.0) {
            // Distinguish "shrank because trial steps kept producing
            // non-finite values" from plain step-size collapse.
            return Err(if bad_steps > 0 {
                SimError::NonFiniteState { t }
            } else {
                SimError::StepUnderflow { t, h }
            });
        }
        let last = t + 1.0001 * h >= t_final;
        if last {
            h = t_final - t;
        }

        // Stages 2..6, then the 5th-order solution, then the FSAL stage.
        stage(&mut y_stage, &y, h, &A2, &k);
        f(t + C[1] * h, &y_stage, &mut k[1]);
        stage(&mut y_stage, &y, h, &A3, &k);
        f(t + C[2] * h, &y_stage, &mut k[2]);
        stage(&mut y_stage, &y, h, &A4, &k);
        f(t + C[3] * h, &y_stage, &mut k[3]);
        stage(&mut y_stage, &y, h, &A5, &k);
        f(t + C[4] * h, &y_stage, &mut k[4]);
        stage(&mut y_stage, &y, h, &A6, &k);
        f(t + C[5] * h, &y_stage, &mut k[5]);
        stage(&mut y_next, &y, h, &B, &k);
        f(t + h, &y_next, &mut k[6]);
        stats.nfev += 6;

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = h
                * (E[0] * k[0][i]
                    + E[2] * k[2][i]
                    + E[3] * k[3][i]
                    + E[4] * k[4][i]
                    + E[5] * k[5][i]
                    + E[6] * k[6][i]);
            let sc = atol + rtol * y[i].abs().max(y_next[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / n as f64).sqrt();

        if !err.is_finite() {
            // The trial step blew up; treat it as a hard rejection.
            bad_steps += 1;
            if bad_steps > MAX_BAD_STEPS {
                return Err(SimError::NonFiniteState { t });
            }
            stats.rejected += 1;
            rejected_last = true;
            h *= 0.25;
            continue;
        }
        bad_steps = 0;

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accepted. Interpolate any sample times inside this step.
            let t_new = if last { t_final } else { t + h };
            if next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                build_interpolant(&mut cont, &y, &y_next, h, &k);
                while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                    let ts = sample_times[next_sample];
                    samples.push(eval_interpolant(&cont, n, (ts - t) / h));
                    next_sample += 1;
                }
            }
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            facold = err.max(1e-4);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
            k.swap(0, 6); // FSAL: last stage is the next first stage
            std::mem::swap(&mut y, &mut y_next);
            t = t_new;
            h = h_new;
            stats.accepted += 1;
        } else {
            h /= (fac11 / SAFE).min(FACC1);
            rejected_last = true;
            stats.rejected += 1;
        }
    }

    Ok((samples, stats))
}

/// `out = y + h * sum a[j] k[j]`.
#[inline]
fn stage(out: &mut [f64], y: &[f64], h: f64, a: &[f64], k: &[Vec<f64>]) {
    out.copy_from_slice(y);
    for (j, &aj) in a.iter().enumerate() {
        if aj == 0.0 {
            continue;
        }
        let kj = &k[j];
        for (o, kv) in out.iter_mut().zip(kj) {
            *o += h * aj * kv;
        }
    }
}

/// Coefficients of the quartic dense-output polynomial on one step.
fn build_interpolant(cont: &mut [f64], y: &[f64], y_next: &[f64], h: f64, k: &[Vec<f64>]) {
    let n = y.len();
    let (c0, rest) = cont.split_at_mut(n);
    let (c1, rest) = rest.split_at_mut(n);
    let (c2, rest) = rest.split_at_mut(n);
    let (c3, c4) = rest.split_at_mut(n);
    for i in 0..n {
        let ydiff = y_next[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        c0[i] = y[i];
        c1[i] = ydiff;
        c2[i] = bspl;
        c3[i] = ydiff - h * k[6][i] - bspl;
        c4[i] = h
            * (D[0] * k[0][i]
                + D[2] * k[2][i]
                + D[3] * k[3][i]
                + D[4] * k[4][i]
                + D[5] * k[5][i]
                + D[6] * k[6][i]);
    }
}

/// Evaluate the interpolant at fraction `s` of the step (`0 <= s <= 1`).
fn eval_interpolant(cont: &[f64], n: usize, s: f64) -> Vec<f64> {
    let s1 = 1.0 - s;
    (0..n)
        .map(|i| {
            let c0 = cont[i];
            let c1 = cont[n + i];
            let c2 = cont[2 * n + i];
            let c3 = cont[3 * n + i];
            let c4 = cont[4 * n + i];
            c0 + s * (c1 + s1 * (c2 + s * (c3 + s1 * c4)))
        })
        .collect()
}

/// Starting step size estimate following Hairer, Norsett & Wanner.
#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    rtol: f64,
    atol: f64,
    stats: &mut IntegrationStats,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let sc: Vec<f64> = y0.iter().map(|yi| atol + rtol * yi.abs()).collect();
    let rms = |v: &[f64]| {
        (v.iter()
            .zip(&sc)
            .map(|(vi, s)| (vi / s) * (vi / s))
            .sum::<f64>()
            / n as f64)
            .sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * (d0 / d1)
    };
    h0 = h0.min(span);

    let y1: Vec<f64> = y0.iter().zip(f0).map(|(yi, fi)| yi + h0 * fi).collect();
    let mut f1 = vec![0.0; n];
    f(t0 + h0, &y1, &mut f1);
    stats.nfev += 1;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&df) / h0;

    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}
