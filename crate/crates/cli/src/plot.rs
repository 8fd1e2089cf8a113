//! `swarmtopo plot`: vector images from store artifacts.
//!
//! A crocker file becomes a filled contour over (t, log eps): marching
//! squares on the integer matrix with half-integer thresholds (which
//! never hit a node value, so no degenerate cases), one color band per
//! integer level, and values above the saturation cap rendered white.
//! A trajectory file becomes a final-frame scatter with velocity
//! arrows, or, with `--delay`, the six 2-D coordinate-pair projections
//! of the last delayed cloud exactly as the persistence stage sees it.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use swarmtopo::io::{read_crocker, read_trajectory, write_atomic};
use swarmtopo::sim::Trajectory;
use swarmtopo::tda::{
    clamp_escapes, delay_embed, normalize_sequence, Crocker, CLAMP_THRESHOLD,
    NORMALIZE_CONSTANT,
};

/// Default saturation caps, by Betti dimension.
pub fn default_cap(betti_dim: usize) -> u32 {
    match betti_dim {
        0 => 150,
        _ => 2,
    }
}

pub fn cmd_plot(
    input: &Path,
    out: Option<&Path>,
    delayed: bool,
    cap: Option<u32>,
    delay_steps: usize,
) -> Result<()> {
    let first_line = {
        let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
        let mut line = String::new();
        BufReader::new(file).read_line(&mut line)?;
        line.trim_end().to_string()
    };

    let (svg, default_name) = match first_line.as_str() {
        "swarmtopo-crocker v1" => {
            let (id, crocker) = read_crocker(input)?;
            let cap = cap.unwrap_or_else(|| default_cap(crocker.betti_dim));
            (render_crocker(&id, &crocker, cap)?, swap_ext(input, "svg"))
        }
        "swarmtopo-trajectory v1" => {
            let traj = read_trajectory(input)?;
            if delayed {
                (render_projections(&traj, delay_steps)?, swap_ext(input, "proj.svg"))
            } else {
                (render_snapshot(&traj)?, swap_ext(input, "svg"))
            }
        }
        other => bail!(
            "{}: unrecognized header {:?} (expected a trajectory or crocker file)",
            input.display(),
            other
        ),
    };

    let out_path = out.map(Path::to_path_buf).unwrap_or(default_name);
    write_atomic(&out_path, |w| w.write_all(svg.as_bytes()))?;
    println!("plot: wrote {}", out_path.display());
    Ok(())
}

fn swap_ext(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

// ------------------------------------------------------------ svg basics

struct Svg {
    w: f64,
    h: f64,
    body: String,
}

impl Svg {
    fn new(w: f64, h: f64) -> Self {
        Svg { w, h, body: String::new() }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}"/>"#
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width:.2}"/>"#
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{fill}"/>"#
        );
    }

    fn polygon(&mut self, pts: &[(f64, f64)], fill: &str) {
        let mut spec = String::new();
        for (x, y) in pts {
            let _ = write!(spec, "{x:.2},{y:.2} ");
        }
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}"/>"#,
            spec.trim_end()
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="monospace" font-size="{size:.1}">{s}</text>"#
        );
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" \
             width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n{}</svg>\n",
            self.w, self.h, self.w, self.h, self.body
        )
    }
}

/// Classic jet ramp for `v` in [0, 1].
fn jet(v: f64) -> String {
    let v = v.clamp(0.0, 1.0);
    let chan = |center: f64| (1.5 - (4.0 * v - center).abs()).clamp(0.0, 1.0);
    let (r, g, b) = (chan(3.0), chan(2.0), chan(1.0));
    format!(
        "#{:02x}{:02x}{:02x}",
        (r * 255.0).round() as u8,
        (g * 255.0).round() as u8,
        (b * 255.0).round() as u8
    )
}

/// A tick step of 1/2/5 x 10^k roughly dividing `range` into 5.
fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let frac = raw / mag;
    let step = if frac < 1.5 {
        1.0
    } else if frac < 3.5 {
        2.0
    } else if frac < 7.5 {
        5.0
    } else {
        10.0
    };
    step * mag
}

// --------------------------------------------------------------- crocker

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

fn render_crocker(id: &str, crocker: &Crocker, cap: u32) -> Result<String> {
    let (pw, ph) = (720.0, 480.0);
    let mut svg = Svg::new(pw + MARGIN_L + MARGIN_R, ph + MARGIN_T + MARGIN_B);

    let times = &crocker.times;
    let logs: Vec<f64> = crocker.grid.values().iter().map(|e| e.log10()).collect();
    if times.len() < 2 || logs.len() < 2 {
        bail!("crocker too small to contour ({} x {})", logs.len(), times.len());
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let (l0, l1) = (logs[0], logs[logs.len() - 1]);
    let sx = |t: f64| MARGIN_L + (t - t0) / (t1 - t0) * pw;
    let sy = |l: f64| MARGIN_T + ph - (l - l0) / (l1 - l0) * ph;

    // Node values, saturated one level above the cap; that extra level
    // renders white.
    let white_level = cap + 1;
    let value = |q: usize, j: usize| crocker.get(q, j).min(white_level) as f64;
    let color_of = |level: u32| -> String {
        if level > cap {
            "#ffffff".to_string()
        } else if cap == 0 {
            jet(0.0)
        } else {
            jet(level as f64 / cap as f64)
        }
    };

    for q in 0..logs.len() - 1 {
        for j in 0..times.len() - 1 {
            // Cell corners in cyclic order, starting bottom-left.
            let corner = [
                (sx(times[j]), sy(logs[q]), value(q, j)),
                (sx(times[j + 1]), sy(logs[q]), value(q, j + 1)),
                (sx(times[j + 1]), sy(logs[q + 1]), value(q + 1, j + 1)),
                (sx(times[j]), sy(logs[q + 1]), value(q + 1, j)),
            ];
            let vmin = corner.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            let vmax = corner.iter().map(|c| c.2).fold(0.0, f64::max);

            // The whole cell sits at or above its minimum level.
            let base: Vec<(f64, f64)> = corner.iter().map(|c| (c.0, c.1)).collect();
            svg.polygon(&base, &color_of(vmin as u32));

            for level in (vmin as u32 + 1)..=(vmax as u32) {
                let thr = level as f64 - 0.5;
                fill_cell_band(&mut svg, &corner, thr, &color_of(level));
            }
        }
    }

    axes(&mut svg, pw, ph, t0, t1, l0, l1);
    let dim = crocker.betti_dim;
    svg.text(
        MARGIN_L + pw / 2.0,
        MARGIN_T - 14.0,
        "middle",
        14.0,
        &format!("{id} b{dim} (cap {cap})"),
    );
    Ok(svg.finish())
}

/// Fill the part of one cell with value >= `thr` in color `fill`.
fn fill_cell_band(svg: &mut Svg, corner: &[(f64, f64, f64); 4], thr: f64, fill: &str) {
    let inside: Vec<bool> = corner.iter().map(|c| c.2 >= thr).collect();
    let lerp = |a: &(f64, f64, f64), b: &(f64, f64, f64)| {
        let t = (thr - a.2) / (b.2 - a.2);
        (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
    };

    // Walk the cell boundary, keeping corners above the threshold and
    // every edge crossing; remember which vertices were corners.
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(6);
    let mut is_corner: Vec<bool> = Vec::with_capacity(6);
    for e in 0..4 {
        let next = (e + 1) % 4;
        if inside[e] {
            poly.push((corner[e].0, corner[e].1));
            is_corner.push(true);
        }
        if inside[e] != inside[next] {
            poly.push(lerp(&corner[e], &corner[next]));
            is_corner.push(false);
        }
    }
    if poly.len() < 3 {
        return;
    }

    // Diagonal saddle: two opposite corners inside. Whether they join
    // across the middle follows the cell-center average; if they do
    // not, each corner keeps only its two adjacent crossings.
    let diagonal = (inside[0] && inside[2] && !inside[1] && !inside[3])
        || (inside[1] && inside[3] && !inside[0] && !inside[2]);
    if diagonal {
        let center = corner.iter().map(|c| c.2).sum::<f64>() / 4.0;
        if center < thr {
            let m = poly.len(); // always 6 here
            for (i, &corner_here) in is_corner.iter().enumerate() {
                if corner_here {
                    svg.polygon(&[poly[(i + m - 1) % m], poly[i], poly[(i + 1) % m]], fill);
                }
            }
            return;
        }
    }
    svg.polygon(&poly, fill);
}

fn axes(svg: &mut Svg, pw: f64, ph: f64, t0: f64, t1: f64, l0: f64, l1: f64) {
    let bottom = MARGIN_T + ph;
    svg.line(MARGIN_L, bottom, MARGIN_L + pw, bottom, "#000000", 1.0);
    svg.line(MARGIN_L, MARGIN_T, MARGIN_L, bottom, "#000000", 1.0);

    let step = nice_step(t1 - t0);
    let mut tick = (t0 / step).ceil() * step;
    while tick <= t1 + 1e-9 {
        let x = MARGIN_L + (tick - t0) / (t1 - t0) * pw;
        svg.line(x, bottom, x, bottom + 5.0, "#000000", 1.0);
        svg.text(x, bottom + 20.0, "middle", 12.0, &format!("{tick:.0}"));
        tick += step;
    }
    svg.text(MARGIN_L + pw / 2.0, bottom + 40.0, "middle", 13.0, "t");

    let mut dec = l0.ceil() as i32;
    while (dec as f64) <= l1 + 1e-9 {
        let y = MARGIN_T + ph - (dec as f64 - l0) / (l1 - l0) * ph;
        svg.line(MARGIN_L - 5.0, y, MARGIN_L, y, "#000000", 1.0);
        svg.text(MARGIN_L - 8.0, y + 4.0, "end", 12.0, &format!("1e{dec}"));
        dec += 1;
    }
    svg.text(16.0, MARGIN_T + ph / 2.0, "middle", 13.0, "eps");
}

// -------------------------------------------------------------- snapshot

fn render_snapshot(traj: &Trajectory) -> Result<String> {
    let frame = traj.frames.last().context("trajectory has no frames")?;
    let (pw, ph) = (540.0, 540.0);
    let mut svg = Svg::new(pw + 80.0, ph + 80.0);

    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &frame.positions {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let pad = 0.05 * ((xmax - xmin).max(ymax - ymin)).max(1e-9);
    let (xmin, xmax, ymin, ymax) = (xmin - pad, xmax + pad, ymin - pad, ymax + pad);
    let scale = (pw / (xmax - xmin)).min(ph / (ymax - ymin));
    let ox = 40.0 + (pw - scale * (xmax - xmin)) / 2.0;
    let oy = 40.0 + (ph - scale * (ymax - ymin)) / 2.0;
    let sx = |x: f64| ox + (x - xmin) * scale;
    let sy = |y: f64| oy + (ymax - y) * scale;

    let vmax = frame
        .velocities
        .iter()
        .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
        .fold(0.0, f64::max)
        .max(1e-12);
    let arrow = 0.04 * pw.min(ph) / vmax / scale;

    for (p, v) in frame.positions.iter().zip(&frame.velocities) {
        let (x0, y0) = (sx(p[0]), sy(p[1]));
        let (x1, y1) = (sx(p[0] + arrow * v[0]), sy(p[1] + arrow * v[1]));
        svg.line(x0, y0, x1, y1, "#777777", 1.0);
        head(&mut svg, x0, y0, x1, y1);
        svg.circle(x0, y0, 2.0, "#1f4da0");
    }

    svg.text(
        40.0 + pw / 2.0,
        24.0,
        "middle",
        14.0,
        &format!("t = {:.1}, N = {}", frame.t, frame.n()),
    );
    Ok(svg.finish())
}

/// Small arrowhead at the tip of the segment (x0,y0)->(x1,y1).
fn head(svg: &mut Svg, x0: f64, y0: f64, x1: f64, y1: f64) {
    let (dx, dy) = (x1 - x0, y1 - y0);
    let len = (dx * dx + dy * dy).sqrt();
    if len < 1.0 {
        return;
    }
    let (ux, uy) = (dx / len, dy / len);
    let s = (0.35 * len).min(5.0);
    for side in [-1.0, 1.0] {
        // Unit vector rotated ~150 degrees off the shaft direction.
        let (rx, ry) = (
            -0.866 * ux - side * 0.5 * uy,
            side * 0.5 * ux - 0.866 * uy,
        );
        svg.line(x1, y1, x1 + s * rx, y1 + s * ry, "#777777", 1.0);
    }
}

// ----------------------------------------------------------- projections

fn render_projections(traj: &Trajectory, delay: usize) -> Result<String> {
    let (clamped, _) = clamp_escapes(traj, CLAMP_THRESHOLD);
    let mut seq = delay_embed(&clamped, delay)?;
    normalize_sequence(&mut seq, NORMALIZE_CONSTANT)?;
    let cloud = seq.clouds.last().context("no delayed clouds")?;
    let t = *seq.times.last().unwrap();

    let names = ["x", "y", "xd", "yd"];
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let panel = 240.0;
    let gap = 46.0;
    let cols = 3.0;
    let rows = 2.0;
    let mut svg = Svg::new(
        cols * panel + (cols + 1.0) * gap,
        rows * panel + (rows + 1.0) * gap + 20.0,
    );

    for (i, &(a, b)) in pairs.iter().enumerate() {
        let col = (i % 3) as f64;
        let row = (i / 3) as f64;
        let x0 = gap + col * (panel + gap);
        let y0 = 20.0 + gap + row * (panel + gap);

        let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for point in cloud.chunks(seq.dim) {
            amin = amin.min(point[a]);
            amax = amax.max(point[a]);
            bmin = bmin.min(point[b]);
            bmax = bmax.max(point[b]);
        }
        let pad = 0.05 * ((amax - amin).max(bmax - bmin)).max(1e-9);
        let (amin, amax, bmin, bmax) = (amin - pad, amax + pad, bmin - pad, bmax + pad);
        let scale = (panel / (amax - amin)).min(panel / (bmax - bmin));
        let cx = x0 + (panel - scale * (amax - amin)) / 2.0;
        let cy = y0 + (panel - scale * (bmax - bmin)) / 2.0;

        svg.rect(x0, y0, panel, panel, "#f7f7f7");
        for point in cloud.chunks(seq.dim) {
            svg.circle(
                cx + (point[a] - amin) * scale,
                cy + (bmax - point[b]) * scale,
                1.5,
                "#1f4da0",
            );
        }
        svg.text(
            x0 + panel / 2.0,
            y0 + panel + 16.0,
            "middle",
            12.0,
            &format!("{} vs {}", names[a], names[b]),
        );
    }

    svg.text(
        svg.w / 2.0,
        26.0,
        "middle",
        14.0,
        &format!("delayed cloud at t = {t:.1} (delay {delay})"),
    );
    Ok(svg.finish())
}
