//! Plain-text encodings of the pipeline artifacts.
//!
//! Every float is written in scientific notation with 17 significant
//! digits, which round-trips IEEE 754 doubles exactly; re-reading a
//! file therefore reproduces the in-memory values bit for bit. All
//! writers stage into a `.tmp` sibling and rename over the target, so
//! a crash never leaves a half-written artifact behind.
//!
//! Three formats live here: trajectory files (one per run), crocker
//! files (one per run and homology dimension), and feature tables (one
//! row per run with identifying label columns). Integration counters
//! are deliberately not part of the trajectory format; they belong to
//! the store manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ml::{FeatureMatrix, RowLabel};
use crate::sim::{Frame, GridSpec, Phenotype, SimStats, SwarmParams, Trajectory};
use crate::tda::{Crocker, EpsilonGrid};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }

    fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        IoError::Parse { path: path.to_path_buf(), line, msg: msg.into() }
    }
}

/// Canonical float encoding: 17 significant digits, round-trip exact.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Stage `write` into `<path>.tmp`, then atomically rename onto `path`.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<(), IoError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    let file = File::create(&tmp).map_err(|e| IoError::io(&tmp, e))?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    write(&mut out)
        .and_then(|()| out.flush())
        .map_err(|e| IoError::io(&tmp, e))?;
    drop(out);
    fs::rename(&tmp, path).map_err(|e| IoError::io(path, e))
}

/// Hex SHA-256 of a file's contents, streamed.
pub fn sha256_hex(path: &Path) -> Result<String, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf).map_err(|e| IoError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

// ------------------------------------------------------------ trajectory

const TRAJECTORY_MAGIC: &str = "swarmtopo-trajectory v1";

/// Write one run: a header of parameters, then per-frame blocks of
/// `x y vx vy` agent rows.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), IoError> {
    let p = &traj.params;
    let phenotype = traj.phenotype.map_or("-", |ph| ph.as_str());
    write_atomic(path, |out| {
        writeln!(out, "{TRAJECTORY_MAGIC}")?;
        writeln!(out, "alpha {}", format_float(p.alpha))?;
        writeln!(out, "beta {}", format_float(p.beta))?;
        writeln!(out, "c {}", format_float(p.c))?;
        writeln!(out, "ell {}", format_float(p.ell))?;
        writeln!(out, "n {}", p.n)?;
        writeln!(out, "dim {}", p.dim)?;
        writeln!(out, "seed {}", p.seed)?;
        writeln!(out, "t_end {}", format_float(p.t_end))?;
        writeln!(out, "sample_dt {}", format_float(p.sample_dt))?;
        writeln!(out, "rtol {}", format_float(p.rtol))?;
        writeln!(out, "atol {}", format_float(p.atol))?;
        writeln!(out, "phenotype {phenotype}")?;
        writeln!(out, "frames {}", traj.frames.len())?;
        for frame in &traj.frames {
            writeln!(out, "frame {}", format_float(frame.t))?;
            for (pos, vel) in frame.positions.iter().zip(&frame.velocities) {
                writeln!(
                    out,
                    "{} {} {} {}",
                    format_float(pos[0]),
                    format_float(pos[1]),
                    format_float(vel[0]),
                    format_float(vel[1]),
                )?;
            }
        }
        Ok(())
    })
}

/// Line-by-line reader tracking position for error messages.
struct Lines<'a> {
    path: &'a Path,
    reader: BufReader<File>,
    line_no: usize,
    buf: String,
}

impl<'a> Lines<'a> {
    fn open(path: &'a Path) -> Result<Self, IoError> {
        let file = File::open(path).map_err(|e| IoError::io(path, e))?;
        Ok(Lines {
            path,
            reader: BufReader::with_capacity(1 << 20, file),
            line_no: 0,
            buf: String::new(),
        })
    }

    fn next(&mut self) -> Result<&str, IoError> {
        self.buf.clear();
        let n = self
            .reader
            .read_line(&mut self.buf)
            .map_err(|e| IoError::io(self.path, e))?;
        if n == 0 {
            return Err(IoError::parse(self.path, self.line_no + 1, "unexpected end of file"));
        }
        self.line_no += 1;
        Ok(self.buf.trim_end_matches(['\n', '\r']))
    }

    fn at_end(&mut self) -> Result<bool, IoError> {
        Ok(self.reader.fill_buf().map_err(|e| IoError::io(self.path, e))?.is_empty())
    }

    fn error(&self, msg: impl Into<String>) -> IoError {
        IoError::parse(self.path, self.line_no, msg)
    }
}

fn parse_num<T: FromStr>(lines: &Lines<'_>, token: &str, what: &str) -> Result<T, IoError> {
    token
        .parse()
        .map_err(|_| lines.error(format!("bad {what}: {token:?}")))
}

/// Expect `key value` and return the value token.
fn keyed<'b>(lines: &Lines<'_>, line: &'b str, key: &str) -> Result<&'b str, IoError> {
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(lines.error(format!("expected `{key} ...`, got {line:?}"))),
    }
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, IoError> {
    let mut lines = Lines::open(path)?;
    if lines.next()? != TRAJECTORY_MAGIC {
        return Err(lines.error("not a trajectory file"));
    }

    macro_rules! field {
        ($key:literal, $what:literal) => {{
            let line = lines.next()?.to_string();
            let v = keyed(&lines, &line, $key)?;
            parse_num(&lines, v, $what)?
        }};
    }
    let alpha: f64 = field!("alpha", "float");
    let beta: f64 = field!("beta", "float");
    let c: f64 = field!("c", "float");
    let ell: f64 = field!("ell", "float");
    let n: usize = field!("n", "integer");
    let dim: usize = field!("dim", "integer");
    let seed: u64 = field!("seed", "integer");
    let t_end: f64 = field!("t_end", "float");
    let sample_dt: f64 = field!("sample_dt", "float");
    let rtol: f64 = field!("rtol", "float");
    let atol: f64 = field!("atol", "float");

    let line = lines.next()?.to_string();
    let phen_token = keyed(&lines, &line, "phenotype")?;
    let phenotype = if phen_token == "-" {
        None
    } else {
        Some(
            Phenotype::from_str(phen_token)
                .map_err(|e| lines.error(format!("bad phenotype: {e}")))?,
        )
    };
    let n_frames: usize = field!("frames", "integer");

    let mut frames = Vec::with_capacity(n_frames);
    for _ in 0..n_frames {
        let line = lines.next()?.to_string();
        let t_token = keyed(&lines, &line, "frame")?;
        let t: f64 = parse_num(&lines, t_token, "frame time")?;
        let mut positions = Vec::with_capacity(n);
        let mut velocities = Vec::with_capacity(n);
        for _ in 0..n {
            let ln = lines.line_no + 1;
            let row = lines.next()?;
            let mut it = row.split_ascii_whitespace();
            let mut four = [0.0f64; 4];
            for slot in &mut four {
                let token = it
                    .next()
                    .ok_or_else(|| IoError::parse(path, ln, "short agent row"))?;
                *slot = token
                    .parse()
                    .map_err(|_| IoError::parse(path, ln, format!("bad float: {token:?}")))?;
            }
            if it.next().is_some() {
                return Err(IoError::parse(path, ln, "trailing tokens on agent row"));
            }
            positions.push([four[0], four[1]]);
            velocities.push([four[2], four[3]]);
        }
        frames.push(Frame { t, positions, velocities });
    }
    if !lines.at_end()? {
        return Err(lines.error("trailing content after final frame"));
    }

    Ok(Trajectory {
        params: SwarmParams {
            alpha,
            beta,
            c,
            ell,
            n,
            dim,
            seed,
            t_end,
            sample_dt,
            rtol,
            atol,
        },
        phenotype,
        frames,
        stats: SimStats::default(),
    })
}

// --------------------------------------------------------------- crocker

const CROCKER_MAGIC: &str = "swarmtopo-crocker v1";

/// Write one Betti matrix with its full scale grid and time axis; the
/// grid is stored explicitly so readers never assume it.
pub fn write_crocker(path: &Path, id: &str, crocker: &Crocker) -> Result<(), IoError> {
    write_atomic(path, |out| {
        writeln!(out, "{CROCKER_MAGIC}")?;
        writeln!(out, "id {id}")?;
        writeln!(out, "betti_dim {}", crocker.betti_dim)?;
        writeln!(out, "scales {}", crocker.n_scales())?;
        writeln!(out, "times {}", crocker.n_times())?;
        write_row(out, "grid", crocker.grid.values(), format_float)?;
        write_row(out, "time", &crocker.times, format_float)?;
        for q in 0..crocker.n_scales() {
            write_row(out, "row", crocker.row(q), |v| v.to_string())?;
        }
        Ok(())
    })
}

fn write_row<T: Copy>(
    out: &mut impl Write,
    key: &str,
    values: &[T],
    fmt: impl Fn(T) -> String,
) -> std::io::Result<()> {
    write!(out, "{key}")?;
    for &v in values {
        write!(out, " {}", fmt(v))?;
    }
    writeln!(out)
}

pub fn read_crocker(path: &Path) -> Result<(String, Crocker), IoError> {
    let mut lines = Lines::open(path)?;
    if lines.next()? != CROCKER_MAGIC {
        return Err(lines.error("not a crocker file"));
    }
    let line = lines.next()?.to_string();
    let id = keyed(&lines, &line, "id")?.to_string();
    let line = lines.next()?.to_string();
    let betti_dim: usize = parse_num(&lines, keyed(&lines, &line, "betti_dim")?, "integer")?;
    let line = lines.next()?.to_string();
    let scales: usize = parse_num(&lines, keyed(&lines, &line, "scales")?, "integer")?;
    let line = lines.next()?.to_string();
    let times_len: usize = parse_num(&lines, keyed(&lines, &line, "times")?, "integer")?;

    let parse_f64_row = |lines: &mut Lines<'_>, key: &str, want: usize| {
        let line = lines.next()?.to_string();
        let body = keyed(lines, &line, key)?;
        let vals: Result<Vec<f64>, IoError> = body
            .split_ascii_whitespace()
            .map(|t| parse_num(lines, t, "float"))
            .collect();
        let vals = vals?;
        if vals.len() != want {
            return Err(lines.error(format!("{key} has {} entries, want {want}", vals.len())));
        }
        Ok(vals)
    };
    let grid_values = parse_f64_row(&mut lines, "grid", scales)?;
    let times = parse_f64_row(&mut lines, "time", times_len)?;
    let grid = EpsilonGrid::from_values(grid_values)
        .map_err(|e| lines.error(format!("bad grid: {e}")))?;

    let mut counts = Vec::with_capacity(scales * times_len);
    for _ in 0..scales {
        let line = lines.next()?.to_string();
        let body = keyed(&lines, &line, "row")?;
        let before = counts.len();
        for token in body.split_ascii_whitespace() {
            counts.push(parse_num::<u32>(&lines, token, "count")?);
        }
        if counts.len() - before != times_len {
            return Err(lines.error(format!(
                "row has {} entries, want {times_len}",
                counts.len() - before
            )));
        }
    }
    if !lines.at_end()? {
        return Err(lines.error("trailing content after final row"));
    }
    let crocker = Crocker::from_counts(betti_dim, times, grid, counts)
        .map_err(|e| lines.error(e.to_string()))?;
    Ok((id, crocker))
}

// -------------------------------------------------------- feature tables

const FEATURES_MAGIC: &str = "swarmtopo-features v1";

/// One row per run: tab-separated `c ell run phenotype` labels followed
/// by the feature values.
pub fn write_feature_table(path: &Path, x: &FeatureMatrix) -> Result<(), IoError> {
    write_atomic(path, |out| {
        writeln!(out, "{FEATURES_MAGIC}")?;
        writeln!(out, "rows {}", x.n_rows())?;
        writeln!(out, "features {}", x.n_features())?;
        writeln!(out, "columns c\tell\trun\tphenotype\tvalues...")?;
        for i in 0..x.n_rows() {
            let l = &x.labels()[i];
            write!(
                out,
                "{}\t{}\t{}\t{}",
                format_float(l.c),
                format_float(l.ell),
                l.run,
                l.phenotype.as_str()
            )?;
            for &v in x.row(i) {
                write!(out, "\t{}", format_float(v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    })
}

/// Read a feature table back. The grid recovers each row's flat combo
/// index from its exact `(c, ell)` values, which round-trip losslessly.
pub fn read_feature_table(path: &Path, grid: &GridSpec) -> Result<FeatureMatrix, IoError> {
    let mut lines = Lines::open(path)?;
    if lines.next()? != FEATURES_MAGIC {
        return Err(lines.error("not a feature table"));
    }
    let line = lines.next()?.to_string();
    let rows: usize = parse_num(&lines, keyed(&lines, &line, "rows")?, "integer")?;
    let line = lines.next()?.to_string();
    let n_features: usize = parse_num(&lines, keyed(&lines, &line, "features")?, "integer")?;
    let line = lines.next()?.to_string();
    keyed(&lines, &line, "columns")?;

    let mut x = FeatureMatrix::new(n_features);
    let mut values = Vec::with_capacity(n_features);
    let mut row_buf = String::new();
    for _ in 0..rows {
        row_buf.clear();
        row_buf.push_str(lines.next()?);
        let mut it = row_buf.split('\t');
        let mut take = |what: &str| {
            it.next()
                .ok_or_else(|| IoError::parse(path, lines.line_no, format!("missing {what}")))
        };
        let c: f64 = parse_num(&lines, take("c")?, "float")?;
        let ell: f64 = parse_num(&lines, take("ell")?, "float")?;
        let run: usize = parse_num(&lines, take("run")?, "integer")?;
        let phen_token = take("phenotype")?;
        let phenotype = Phenotype::from_str(phen_token)
            .map_err(|e| lines.error(format!("bad phenotype: {e}")))?;

        let c_idx = grid
            .c_values
            .iter()
            .position(|&v| v == c)
            .ok_or_else(|| lines.error(format!("c = {c} not on the grid")))?;
        let ell_idx = grid
            .ell_values
            .iter()
            .position(|&v| v == ell)
            .ok_or_else(|| lines.error(format!("ell = {ell} not on the grid")))?;
        let combo = c_idx * grid.ell_values.len() + ell_idx;

        values.clear();
        for token in it {
            values.push(
                token
                    .parse::<f64>()
                    .map_err(|_| lines.error(format!("bad float: {token:?}")))?,
            );
        }
        if values.len() != n_features {
            return Err(lines.error(format!(
                "row has {} features, header says {n_features}",
                values.len()
            )));
        }
        let label = RowLabel { c, ell, combo, run, phenotype };
        x.push_row(label, &values).map_err(|e| lines.error(e.to_string()))?;
    }
    if !lines.at_end()? {
        return Err(lines.error("trailing content after final row"));
    }
    Ok(x)
}
