//! Synthetic runs and `beta` sweeps.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::PathBuf;
use std::time::Instant;

use implicit_online::data::{self, parse_libsvm, preprocess};
use implicit_online::learners::run;
use implicit_online::metrics::{certify_adaimplicit, certify_adaimplicit_lambda};
use implicit_online::{Algorithm, BoundCertificate, Dataset, Error, LearnerConfig, Loss, MirrorSetup, Task, Trace};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{ensure_dir, num, write_csv, write_json, write_text, SWEEP_PLOT, SYNTHETIC_PLOT};
use crate::{CliError, Result, THREADS_ENV};

pub const BUNDLED_CLASSIFICATION: &str = include_str!("../data/mini_classification.libsvm");
pub const BUNDLED_REGRESSION: &str = include_str!("../data/mini_regression.libsvm");

/// Name of the extra AdaImplicit run with `beta` at the Bregman diameter.
pub const THEORY_RUN: &str = "adaimplicit-theory";

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    /// Final `L_T` per run (synthetic mode).
    pub final_cumulative_loss: BTreeMap<String, f64>,
    pub summary: Vec<SummaryRow>,
    pub certificates: Vec<BoundCertificate>,
    pub outputs: Vec<PathBuf>,
}

impl RunReport {
    fn new(command: &str, config: &ExperimentConfig) -> Self {
        RunReport {
            command: command.to_string(),
            config: config.clone(),
            seed: config.seed,
            wall_clock_seconds: 0.0,
            final_cumulative_loss: BTreeMap::new(),
            summary: Vec::new(),
            certificates: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

/// Learner settings for `algorithm` at hyperparameter `beta`. `ImplicitConst`
/// uses `beta` as its step size; `DoublingImplicit` takes the largest
/// Lipschitz constant in the sequence.
pub fn learner_config(
    algorithm: Algorithm,
    beta: f64,
    x_init: Vec<f64>,
    setup: &MirrorSetup,
    losses: &[Loss],
) -> implicit_online::Result<LearnerConfig> {
    let cfg = LearnerConfig::new(algorithm, beta, x_init, setup.clone());
    Ok(match algorithm {
        Algorithm::ImplicitConst => cfg.with_eta(beta),
        Algorithm::DoublingImplicit => {
            let mut l = 0.0f64;
            for loss in losses {
                let li = loss.lipschitz_on(setup).ok_or_else(|| {
                    Error::InvalidConfig(format!("{} loss has no Lipschitz constant here", loss.family()))
                })?;
                l = l.max(li);
            }
            cfg.with_lipschitz(if l > 0.0 { l } else { 1.0 })
        }
        _ => cfg,
    })
}

/// A completed run on the synthetic sequence.
#[derive(Debug, Clone)]
pub struct NamedTrace {
    pub name: String,
    pub trace: Trace,
}

/// Runs every configured algorithm on the sine sequence.
pub fn synthetic_runs(cfg: &ExperimentConfig) -> Result<(Vec<Loss>, MirrorSetup, Vec<NamedTrace>)> {
    let losses = data::gen_sine(cfg.horizon);
    let setup = MirrorSetup::from_radius(cfg.ball_radius)?;
    let mut runs = Vec::new();
    for &algo in &cfg.algorithms {
        let lc = learner_config(algo, cfg.beta, vec![0.0], &setup, &losses)?;
        runs.push(NamedTrace { name: algo.name().to_string(), trace: run(&lc, &losses)? });
    }
    if cfg.theory_beta {
        let lc = LearnerConfig::ada_implicit_theory(vec![0.0], setup.clone())?;
        runs.push(NamedTrace { name: THEORY_RUN.to_string(), trace: run(&lc, &losses)? });
    }
    Ok((losses, setup, runs))
}

/// Runs the sine-sequence experiment and writes `synthetic.csv`
/// (`t, algorithm, cumulative_loss`), a plot script and a JSON report into
/// `cfg.out`.
pub fn cmd_synthetic(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let (losses, setup, runs) = synthetic_runs(cfg)?;
    let mut report = RunReport::new("synthetic", cfg);

    for nt in &runs {
        report.final_cumulative_loss.insert(nt.name.clone(), nt.trace.cumulative_loss());
        if nt.trace.config.algorithm == Algorithm::AdaImplicit {
            for mut cert in [
                certify_adaimplicit(&nt.trace, &losses, &setup)?,
                certify_adaimplicit_lambda(&nt.trace, &losses, &setup)?,
            ] {
                cert.name = format!("{} [{}]", cert.name, nt.name);
                report.certificates.push(cert);
            }
        }
    }

    ensure_dir(&cfg.out)?;
    let rows = runs.iter().flat_map(|nt| {
        nt.trace
            .cumulative_losses()
            .into_iter()
            .enumerate()
            .map(move |(i, l)| vec![(i + 1).to_string(), nt.name.clone(), num(l)])
    });
    report.outputs.push(write_csv(&cfg.out.join("synthetic.csv"), &["t", "algorithm", "cumulative_loss"], rows)?);
    report.outputs.push(write_text(&cfg.out.join("plot_synthetic.py"), SYNTHETIC_PLOT)?);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    let path = cfg.out.join("synthetic_report.json");
    report.outputs.push(path.clone());
    write_json(&path, &report)?;
    Ok(report)
}

/// Loads the configured dataset (or the bundled sample for the task) and
/// applies max-abs scaling plus a bias feature.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let raw = match &cfg.dataset {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            parse_libsvm(BufReader::new(file), cfg.task).map_err(|e| match e {
                Error::Parse { line, message } => CliError::Parse { path: path.clone(), line, message },
                other => other.into(),
            })?
        }
        None => {
            let text = match cfg.task {
                Task::Classification => BUNDLED_CLASSIFICATION,
                Task::Regression => BUNDLED_REGRESSION,
            };
            parse_libsvm(text.as_bytes(), cfg.task)?
        }
    };
    if raw.n() == 0 {
        return Err(Error::EmptySequence.into());
    }
    Ok(preprocess(&raw))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub beta: f64,
    pub repeat: usize,
    /// `L_T / T` after one pass.
    pub avg_cumulative_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub beta: f64,
    pub mean: f64,
    /// Population standard deviation over repeats.
    pub std: f64,
}

pub(crate) fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CliError::Config(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

/// One pass per (algorithm, beta, repeat) cell. Repeat `r` visits the
/// examples in the order of a shuffle seeded with `seed ^ r`. Rows come back
/// sorted by algorithm, then beta, then repeat.
pub fn sweep_rows(cfg: &ExperimentConfig, ds: &Dataset) -> Result<Vec<SweepRow>> {
    let setup = MirrorSetup::from_radius(cfg.ball_radius)?;
    let orders: Vec<Vec<Loss>> = (0..cfg.repeats)
        .map(|r| ds.shuffled_losses(cfg.seed, r as u64))
        .collect::<implicit_online::Result<_>>()?;
    let betas = cfg.beta_grid.values();
    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();
    let cells: Vec<(Algorithm, f64, usize)> = algorithms
        .iter()
        .flat_map(|&a| betas.iter().flat_map(move |&b| (0..cfg.repeats).map(move |r| (a, b, r))))
        .collect();

    let x0 = vec![0.0; ds.d];
    let pool = worker_pool()?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(algorithm, beta, repeat)| {
                let losses = &orders[repeat];
                let lc = learner_config(algorithm, beta, x0.clone(), &setup, losses)?;
                let trace = run(&lc, losses)?;
                let avg = trace.cumulative_loss() / losses.len() as f64;
                Ok(SweepRow { algorithm, beta, repeat, avg_cumulative_loss: avg })
            })
            .collect::<Result<_>>()
    })?;
    rows.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.beta.total_cmp(&b.beta)).then(a.repeat.cmp(&b.repeat)));
    Ok(rows)
}

/// Mean and population standard deviation per (algorithm, beta).
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let (a, b) = (rows[i].algorithm, rows[i].beta);
        let j = rows[i..].iter().position(|r| r.algorithm != a || r.beta != b).map_or(rows.len(), |k| i + k);
        let vals: Vec<f64> = rows[i..j].iter().map(|r| r.avg_cumulative_loss).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        out.push(SummaryRow { algorithm: a, beta: b, mean, std: var.sqrt() });
        i = j;
    }
    out
}

/// Runs the `beta` sweep and writes `sweep.csv`
/// (`algorithm, beta, repeat, avg_cumulative_loss`), `sweep_summary.csv`
/// (`algorithm, beta, mean, std`), a plot script and a JSON report into
/// `cfg.out`.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let ds = load_dataset(cfg)?;
    let rows = sweep_rows(cfg, &ds)?;
    let mut report = RunReport::new("sweep", cfg);
    report.summary = summarize(&rows);

    ensure_dir(&cfg.out)?;
    let csv_rows = rows.iter().map(|r| {
        vec![r.algorithm.name().to_string(), num(r.beta), r.repeat.to_string(), num(r.avg_cumulative_loss)]
    });
    report.outputs.push(write_csv(
        &cfg.out.join("sweep.csv"),
        &["algorithm", "beta", "repeat", "avg_cumulative_loss"],
        csv_rows,
    )?);
    let summary_rows =
        report.summary.iter().map(|s| vec![s.algorithm.name().to_string(), num(s.beta), num(s.mean), num(s.std)]);
    report.outputs.push(write_csv(
        &cfg.out.join("sweep_summary.csv"),
        &["algorithm", "beta", "mean", "std"],
        summary_rows,
    )?);
    report.outputs.push(write_text(&cfg.out.join("plot_sweep.py"), SWEEP_PLOT)?);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    let path = cfg.out.join("sweep_report.json");
    report.outputs.push(path.clone());
    write_json(&path, &report)?;
    Ok(report)
}
