//! LIBSVM ingestion, preprocessing and loss-sequence generators.
//!
//! The LIBSVM text format is one example per line:
//!
//! ```text
//! +1 1:0.5 3:-2   # optional comment
//! -1 2:1
//! ```
//!
//! Feature indices are 1-based and strictly ascending within a line.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MirrorSetup;
use crate::linalg::{dot, norm};
use crate::losses::Loss;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classification" | "class" => Ok(Task::Classification),
            "regression" | "reg" => Ok(Task::Regression),
            other => Err(Error::InvalidConfig(format!("unknown task '{other}'"))),
        }
    }
}

/// Sparse row with 1-based, strictly ascending indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self, d: usize) -> Vec<f64> {
        let mut z = vec![0.0; d];
        for (i, v) in self.iter() {
            z[i - 1] = v;
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<SparseRow>,
    pub labels: Vec<f64>,
    /// Largest feature index.
    pub d: usize,
    pub task: Task,
    /// Set once [`preprocess`] appended the constant feature at index `d`.
    pub has_bias: bool,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Per-example losses: hinge for classification, absolute for regression.
    pub fn losses(&self) -> Result<Vec<Loss>> {
        if self.rows.is_empty() {
            return Err(Error::EmptySequence);
        }
        self.rows
            .iter()
            .zip(&self.labels)
            .map(|(row, &y)| {
                let z = row.to_dense(self.d);
                match self.task {
                    Task::Classification => Loss::hinge(z, y),
                    Task::Regression => Loss::absolute(z, y),
                }
            })
            .collect()
    }

    /// Losses in the example order of repeat `repeat`: a shuffle seeded
    /// with `seed ^ repeat`.
    pub fn shuffled_losses(&self, seed: u64, repeat: u64) -> Result<Vec<Loss>> {
        let mut losses = self.losses()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ repeat);
        losses.shuffle(&mut rng);
        Ok(losses)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses LIBSVM text. For classification, labels `{0, 1}` are mapped to
/// `{-1, +1}`; any other label set must already be `{-1, +1}`.
pub fn parse_libsvm<R: BufRead>(reader: R, task: Task) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut d = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid label '{label_tok}'")))?;
        if !label.is_finite() {
            return Err(parse_err(lineno, format!("non-finite label '{label_tok}'")));
        }
        let mut row = SparseRow::default();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("malformed feature '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid feature index '{idx}'")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid feature value '{val}'")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("non-finite feature value '{val}'")));
            }
            if let Some(&last) = row.indices.last() {
                if idx == last {
                    return Err(parse_err(lineno, format!("duplicate feature index {idx}")));
                }
                if idx < last {
                    return Err(parse_err(lineno, format!("feature index {idx} after {last}")));
                }
            }
            d = d.max(idx);
            row.indices.push(idx);
            row.values.push(val);
        }
        rows.push(row);
        labels.push(label);
    }

    if task == Task::Classification {
        let zero_one = labels.iter().all(|&y| y == 0.0 || y == 1.0);
        if zero_one {
            for y in &mut labels {
                *y = 2.0 * *y - 1.0;
            }
        } else if let Some(pos) = labels.iter().position(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "classification label {} of example {} is not in {{-1, +1}} or {{0, 1}}",
                    labels[pos],
                    pos + 1
                ),
            });
        }
    }
    Ok(Dataset { rows, labels, d, task, has_bias: false })
}

/// Serializes a dataset in LIBSVM format; [`parse_libsvm`] reads it back
/// bit-identically.
pub fn write_libsvm(ds: &Dataset) -> String {
    let mut out = String::new();
    for (row, y) in ds.rows.iter().zip(&ds.labels) {
        write!(out, "{y:?}").unwrap();
        for (i, v) in row.iter() {
            write!(out, " {i}:{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Scales each feature by its maximum absolute value and appends a constant
/// bias feature of value 1. Columns that are identically zero are left
/// unchanged. Running it on its own output changes nothing.
pub fn preprocess(ds: &Dataset) -> Dataset {
    let mut max_abs = vec![0.0f64; ds.d];
    for row in &ds.rows {
        for (i, v) in row.iter() {
            max_abs[i - 1] = max_abs[i - 1].max(v.abs());
        }
    }
    let rows = ds
        .rows
        .iter()
        .map(|row| {
            let mut out = SparseRow::default();
            for (i, v) in row.iter() {
                let m = max_abs[i - 1];
                out.indices.push(i);
                out.values.push(if m > 0.0 { v / m } else { v });
            }
            if !ds.has_bias {
                out.indices.push(ds.d + 1);
                out.values.push(1.0);
            }
            out
        })
        .collect();
    Dataset {
        rows,
        labels: ds.labels.clone(),
        d: if ds.has_bias { ds.d } else { ds.d + 1 },
        task: ds.task,
        has_bias: true,
    }
}

/// `0.25 (x - y_t)^2` with `y_t = 100 sin(pi t / (10 T))`, `t = 1..=T`.
pub fn gen_sine(horizon: usize) -> Vec<Loss> {
    let t_max = horizon as f64;
    (1..=horizon)
        .map(|t| Loss::Quad1D { y: 100.0 * (std::f64::consts::PI * t as f64 / (10.0 * t_max)).sin() })
        .collect()
}

/// Sequence whose regret against the best comparator equals its temporal
/// variability `v_target` for any deterministic learner started at `x1`:
/// `l_1(x) = L <g, x>` with `||g|| = 1`, `<g, x1> = 0`, `L = 2 v_target / D`,
/// followed by `T - 1` zero losses.
pub fn gen_lower_bound(v_target: f64, setup: &MirrorSetup, x1: &[f64], horizon: usize) -> Result<Vec<Loss>> {
    let d = x1.len();
    if d < 2 {
        return Err(Error::InvalidConfig("the lower-bound sequence needs d >= 2".into()));
    }
    if !(v_target.is_finite() && v_target >= 0.0) {
        return Err(Error::InvalidConfig(format!("target variability must be >= 0, got {v_target}")));
    }
    if horizon == 0 {
        return Err(Error::EmptySequence);
    }
    let diameter = setup
        .ball_diameter()
        .ok_or_else(|| Error::InvalidDomain("the lower-bound sequence needs a ball".into()))?;
    let g = orthogonal_unit(x1);
    let scale = 2.0 * v_target / diameter;
    let mut seq = Vec::with_capacity(horizon);
    seq.push(Loss::linear(g.clone(), scale)?);
    for _ in 1..horizon {
        seq.push(Loss::linear(g.clone(), 0.0)?);
    }
    Ok(seq)
}

/// Unit vector orthogonal to `x` (`e_1` when `x = 0`): the standard basis
/// vector least aligned with `x`, with its `x` component removed.
fn orthogonal_unit(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let nx2 = dot(x, x);
    let k = (0..d)
        .min_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .expect("d >= 2");
    let mut g = vec![0.0; d];
    g[k] = 1.0;
    if nx2 > 0.0 {
        let c = x[k] / nx2;
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi -= c * xi;
        }
    }
    let n = norm(&g);
    g.iter_mut().for_each(|v| *v /= n);
    g
}

pub fn gen_fixed(loss: &Loss, horizon: usize) -> Vec<Loss> {
    vec![loss.clone(); horizon]
}
