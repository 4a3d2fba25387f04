//! Experiment configuration: built-in defaults, overlaid by a TOML file,
//! overlaid by command-line flags.

use std::path::{Path, PathBuf};

use implicit_online::{Algorithm, Task};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGrid {
    pub lo_exp: i32,
    pub hi_exp: i32,
    pub points: usize,
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid { lo_exp: -20, hi_exp: 20, points: 41 }
    }
}

impl BetaGrid {
    /// `points` values of `beta`, uniform in `log2` from `2^lo_exp` to
    /// `2^hi_exp` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![2f64.powi(self.lo_exp)];
        }
        let span = f64::from(self.hi_exp - self.lo_exp);
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| 2f64.powf(f64::from(self.lo_exp) + span * k as f64 / last))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossFamily {
    Hinge,
    Absolute,
}

impl LossFamily {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Classification => LossFamily::Hinge,
            Task::Regression => LossFamily::Absolute,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub loss_family: LossFamily,
    /// Single `beta` of a synthetic run.
    pub beta: f64,
    pub beta_grid: BetaGrid,
    pub repeats: usize,
    pub seed: u64,
    /// Horizon of the synthetic sequence.
    pub horizon: usize,
    /// Radius of the feasible ball; `None` means unconstrained.
    pub ball_radius: Option<f64>,
    pub algorithms: Vec<Algorithm>,
    /// LIBSVM file for sweeps; `None` selects the bundled sample.
    pub dataset: Option<PathBuf>,
    /// Also run AdaImplicit with `beta` equal to the Bregman diameter.
    pub theory_beta: bool,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn synthetic_defaults() -> Self {
        ExperimentConfig {
            task: Task::Regression,
            loss_family: LossFamily::Absolute,
            beta: 1.0,
            beta_grid: BetaGrid::default(),
            repeats: 1,
            seed: DEFAULT_SEED,
            horizon: 2000,
            ball_radius: Some(75.0),
            algorithms: vec![Algorithm::Ogd, Algorithm::AdaOgd, Algorithm::ImplicitDecay, Algorithm::AdaImplicit],
            dataset: None,
            theory_beta: false,
            out: PathBuf::from("results"),
        }
    }

    pub fn sweep_defaults() -> Self {
        ExperimentConfig {
            task: Task::Classification,
            loss_family: LossFamily::Hinge,
            repeats: 10,
            ball_radius: None,
            ..Self::synthetic_defaults()
        }
    }

    pub fn apply(&mut self, layer: &ConfigLayer) {
        if let Some(task) = layer.task {
            self.task = task;
            self.loss_family = LossFamily::for_task(task);
        }
        if let Some(family) = layer.loss_family {
            self.loss_family = family;
        }
        if let Some(beta) = layer.beta {
            self.beta = beta;
        }
        if let Some(v) = layer.grid_lo_exp {
            self.beta_grid.lo_exp = v;
        }
        if let Some(v) = layer.grid_hi_exp {
            self.beta_grid.hi_exp = v;
        }
        if let Some(v) = layer.grid_points {
            self.beta_grid.points = v;
        }
        if let Some(v) = layer.repeats {
            self.repeats = v;
        }
        if let Some(v) = layer.seed {
            self.seed = v;
        }
        if let Some(v) = layer.horizon {
            self.horizon = v;
        }
        if let Some(v) = layer.radius {
            self.ball_radius = Some(v);
        }
        if let Some(v) = &layer.algorithms {
            self.algorithms = v.clone();
        }
        if let Some(v) = &layer.dataset {
            self.dataset = Some(v.clone());
        }
        if let Some(v) = layer.theory_beta {
            self.theory_beta = v;
        }
        if let Some(v) = &layer.out {
            self.out = v.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.beta_grid.points < 1 {
            return bad("the beta grid needs at least one point".into());
        }
        if self.beta_grid.hi_exp < self.beta_grid.lo_exp {
            return bad(format!(
                "grid exponents are reversed ({} > {})",
                self.beta_grid.lo_exp, self.beta_grid.hi_exp
            ));
        }
        if self.repeats < 1 {
            return bad("repeats must be at least 1".into());
        }
        if self.horizon < 1 {
            return bad("the horizon must be at least 1".into());
        }
        if let Some(r) = self.ball_radius {
            if !(r.is_finite() && r > 0.0) {
                return bad(format!("radius must be positive, got {r}"));
            }
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.loss_family != LossFamily::for_task(self.task) {
            return bad(format!("loss family {:?} does not match task {:?}", self.loss_family, self.task));
        }
        Ok(())
    }
}

/// Partial configuration. Used both for TOML files and for command-line
/// overrides; absent fields leave the layer below untouched.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub task: Option<Task>,
    pub loss_family: Option<LossFamily>,
    pub beta: Option<f64>,
    pub grid_lo_exp: Option<i32>,
    pub grid_hi_exp: Option<i32>,
    pub grid_points: Option<usize>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    #[serde(rename = "T")]
    pub horizon: Option<usize>,
    pub radius: Option<f64>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub dataset: Option<PathBuf>,
    pub theory_beta: Option<bool>,
    pub out: Option<PathBuf>,
}

impl ConfigLayer {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Defaults, then the optional file, then the flags.
pub fn resolve(
    mut base: ExperimentConfig,
    file: Option<&ConfigLayer>,
    flags: &ConfigLayer,
) -> Result<ExperimentConfig, CliError> {
    if let Some(layer) = file {
        base.apply(layer);
    }
    base.apply(flags);
    base.validate()?;
    Ok(base)
}
