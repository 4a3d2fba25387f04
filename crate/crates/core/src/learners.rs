//! Online learners under a common predict/observe protocol.
//!
//! | algorithm          | update                                               |
//! |--------------------|------------------------------------------------------|
//! | `Ogd`              | `x <- P(x - beta/sqrt(t) g)`                         |
//! | `AdaOgd`           | `x <- P(x - beta/sqrt(sum ||g||^2) g)`               |
//! | `ImplicitDecay`    | implicit step with `eta_t = beta/sqrt(t)`            |
//! | `ImplicitConst`    | implicit step with a fixed `eta`                     |
//! | `AdaImplicit`      | implicit step with `eta_t = 1/lambda_t`, `lambda` accumulating `delta_t / beta^2` |
//! | `DoublingImplicit` | implicit step with `eta_i = beta/(L sqrt(2^i))`, restarting from `x_1` when the epoch budget is spent |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::MirrorSetup;
use crate::linalg::norm;
use crate::losses::Loss;
use crate::prox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "&'static str")]
pub enum Algorithm {
    Ogd,
    AdaOgd,
    ImplicitDecay,
    ImplicitConst,
    AdaImplicit,
    DoublingImplicit,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Ogd,
        Algorithm::AdaOgd,
        Algorithm::ImplicitDecay,
        Algorithm::ImplicitConst,
        Algorithm::AdaImplicit,
        Algorithm::DoublingImplicit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ogd => "ogd",
            Algorithm::AdaOgd => "adaogd",
            Algorithm::ImplicitDecay => "implicit",
            Algorithm::ImplicitConst => "implicit-const",
            Algorithm::AdaImplicit => "adaimplicit",
            Algorithm::DoublingImplicit => "doubling",
        }
    }

    pub fn is_implicit(self) -> bool {
        !matches!(self, Algorithm::Ogd | Algorithm::AdaOgd)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Algorithm> for &'static str {
    fn from(a: Algorithm) -> Self {
        a.name()
    }
}

impl TryFrom<String> for Algorithm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .or(match key.as_str() {
                "implicit-decay" | "iomd" => Some(Algorithm::ImplicitDecay),
                "ada-ogd" => Some(Algorithm::AdaOgd),
                "ada-implicit" => Some(Algorithm::AdaImplicit),
                "doubling-implicit" => Some(Algorithm::DoublingImplicit),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    pub beta: f64,
    /// Fixed step of `ImplicitConst`.
    pub eta_const: Option<f64>,
    /// Lipschitz constant `L` of `DoublingImplicit`.
    pub lipschitz: Option<f64>,
    pub x_init: Vec<f64>,
    pub setup: MirrorSetup,
}

impl LearnerConfig {
    pub fn new(algorithm: Algorithm, beta: f64, x_init: Vec<f64>, setup: MirrorSetup) -> Self {
        LearnerConfig { algorithm, beta, eta_const: None, lipschitz: None, x_init, setup }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta_const = Some(eta);
        self
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    /// AdaImplicit with `beta` set to the square root of the Bregman
    /// diameter of `setup`.
    pub fn ada_implicit_theory(x_init: Vec<f64>, setup: MirrorSetup) -> Result<Self> {
        if !setup.is_bounded() {
            return Err(Error::InvalidConfig(
                "the theoretical beta of AdaImplicit needs a bounded domain".into(),
            ));
        }
        let beta = setup.bregman_diameter();
        Ok(LearnerConfig::new(Algorithm::AdaImplicit, beta, x_init, setup))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        if self.x_init.is_empty() {
            return Err(Error::InvalidConfig("x_init is empty".into()));
        }
        if !self.setup.contains(&self.x_init, prox::FEASIBILITY_TOL) {
            return Err(Error::InvalidConfig("x_init is not feasible".into()));
        }
        match self.algorithm {
            Algorithm::ImplicitConst => match self.eta_const {
                Some(eta) if eta.is_finite() && eta > 0.0 => {}
                _ => {
                    return Err(Error::InvalidConfig(
                        "ImplicitConst needs a positive finite eta".into(),
                    ))
                }
            },
            Algorithm::DoublingImplicit => match self.lipschitz {
                Some(l) if l.is_finite() && l > 0.0 => {}
                _ => {
                    return Err(Error::InvalidConfig(
                        "DoublingImplicit needs a positive finite Lipschitz constant".into(),
                    ))
                }
            },
            _ => {}
        }
        Ok(())
    }
}

/// Mutable state shared by all algorithms; fields unused by an algorithm
/// keep their initial values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub x: Vec<f64>,
    /// Current round, starting at 1.
    pub t: usize,
    pub lambda: f64,
    pub grad_sq_sum: f64,
    pub epoch: usize,
    pub epoch_budget: f64,
    pub epoch_eta: f64,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub x: Vec<f64>,
    /// `loss_t(x_t)`
    pub loss_value: f64,
    /// `loss_t` at the update point (the prox point for restarted rounds).
    pub loss_next: f64,
    /// Step size used this round; infinite for AdaImplicit while `lambda = 0`.
    pub rate: f64,
    /// `lambda_t` for AdaImplicit, zero otherwise.
    pub lambda: f64,
    pub delta: f64,
    pub g_norm: f64,
    pub g_prime_norm: f64,
    /// `B(x_next, x_t)` for the update point.
    pub bregman_step: f64,
    pub epoch: usize,
    pub restarted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<StepRecord>,
    /// `x_{T+1}`
    pub x_final: Vec<f64>,
    /// `lambda_{T+1}`; zero for algorithms other than AdaImplicit.
    pub lambda_final: f64,
    pub restarts: usize,
    pub config: LearnerConfig,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    /// `x_t` for `t = 1..=T+1`.
    pub fn iterate(&self, t: usize) -> &[f64] {
        if t == self.records.len() + 1 {
            &self.x_final
        } else {
            &self.records[t - 1].x
        }
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.records.iter().map(|r| r.loss_value).sum()
    }

    /// `L_t` for every `t`.
    pub fn cumulative_losses(&self) -> Vec<f64> {
        self.records
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r.loss_value;
                Some(*acc)
            })
            .collect()
    }
}

/// Single-owner online learner.
#[derive(Debug, Clone)]
pub struct Learner {
    config: LearnerConfig,
    state: LearnerState,
}

impl Learner {
    pub fn new(config: LearnerConfig) -> Result<Self> {
        config.validate()?;
        let epoch_eta = match (config.algorithm, config.lipschitz) {
            (Algorithm::DoublingImplicit, Some(l)) => config.beta / l,
            _ => 0.0,
        };
        let state = LearnerState {
            x: config.x_init.clone(),
            t: 1,
            lambda: 0.0,
            grad_sq_sum: 0.0,
            epoch: 0,
            epoch_budget: 0.0,
            epoch_eta,
            restarts: 0,
        };
        Ok(Learner { config, state })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn state(&self) -> &LearnerState {
        &self.state
    }

    pub fn predict(&self) -> &[f64] {
        &self.state.x
    }

    pub fn observe(&mut self, loss: &Loss) -> Result<StepRecord> {
        check_dim(self.state.x.len(), loss.dim())?;
        let setup = &self.config.setup;
        let beta = self.config.beta;
        let st = &mut self.state;
        let t = st.t;
        let x_t = st.x.clone();
        let loss_value = loss.eval(&x_t)?;
        let g = loss.subgradient(&x_t)?;
        let g_norm = norm(&g);

        let mut restarted = false;
        let epoch = st.epoch;
        let lambda = st.lambda;

        let (x_next, rate, g_prime_norm) = match self.config.algorithm {
            Algorithm::Ogd => {
                let eta = beta / (t as f64).sqrt();
                (setup.project(&crate::linalg::axpy(&x_t, -eta, &g)), eta, g_norm)
            }
            Algorithm::AdaOgd => {
                st.grad_sq_sum += g_norm * g_norm;
                if st.grad_sq_sum == 0.0 {
                    (x_t.clone(), f64::INFINITY, g_norm)
                } else {
                    let eta = beta / st.grad_sq_sum.sqrt();
                    (setup.project(&crate::linalg::axpy(&x_t, -eta, &g)), eta, g_norm)
                }
            }
            Algorithm::ImplicitDecay => {
                let eta = beta / (t as f64).sqrt();
                let p = prox::implicit_step(loss, &x_t, eta, setup)?;
                (p.x_next, eta, norm(&p.g_prime))
            }
            Algorithm::ImplicitConst => {
                let eta = self.config.eta_const.expect("validated");
                let p = prox::implicit_step(loss, &x_t, eta, setup)?;
                (p.x_next, eta, norm(&p.g_prime))
            }
            Algorithm::AdaImplicit => {
                let eta = if lambda == 0.0 { f64::INFINITY } else { 1.0 / lambda };
                let p = prox::implicit_step(loss, &x_t, eta, setup)?;
                (p.x_next, eta, norm(&p.g_prime))
            }
            Algorithm::DoublingImplicit => {
                let eta = st.epoch_eta;
                let p = prox::implicit_step(loss, &x_t, eta, setup)?;
                (p.x_next, eta, norm(&p.g_prime))
            }
        };

        let loss_next = loss.eval(&x_next)?;
        let bregman_step = setup.bregman(&x_next, &x_t)?;
        let delta = match self.config.algorithm {
            Algorithm::AdaImplicit => loss_value - loss_next - lambda * bregman_step,
            _ if rate.is_infinite() => loss_value - loss_next,
            _ => loss_value - loss_next - bregman_step / rate,
        };

        match self.config.algorithm {
            Algorithm::AdaImplicit => {
                st.lambda = lambda + delta / (beta * beta);
                st.x = x_next;
            }
            Algorithm::DoublingImplicit => {
                let l = self.config.lipschitz.expect("validated");
                st.epoch_budget += delta;
                let threshold = st.epoch_eta * l * l * 2f64.powi(st.epoch as i32);
                if st.epoch_budget >= threshold {
                    st.epoch += 1;
                    st.epoch_eta = beta / (l * 2f64.powi(st.epoch as i32).sqrt());
                    st.epoch_budget = 0.0;
                    st.restarts += 1;
                    st.x = self.config.x_init.clone();
                    restarted = true;
                } else {
                    st.x = x_next;
                }
            }
            _ => st.x = x_next,
        }
        st.t += 1;

        Ok(StepRecord {
            t,
            x: x_t,
            loss_value,
            loss_next,
            rate,
            lambda,
            delta,
            g_norm,
            g_prime_norm,
            bregman_step,
            epoch,
            restarted,
        })
    }

    pub fn into_trace(self, records: Vec<StepRecord>) -> Trace {
        Trace {
            records,
            x_final: self.state.x,
            lambda_final: self.state.lambda,
            restarts: self.state.restarts,
            config: self.config,
        }
    }
}

/// Runs a learner over the whole sequence.
pub fn run(config: &LearnerConfig, losses: &[Loss]) -> Result<Trace> {
    let first = losses.first().ok_or(Error::EmptySequence)?;
    let d = first.dim();
    for l in losses {
        check_dim(d, l.dim())?;
    }
    check_dim(d, config.x_init.len())?;
    let mut learner = Learner::new(config.clone())?;
    let mut records = Vec::with_capacity(losses.len());
    for l in losses {
        records.push(learner.observe(l)?);
    }
    Ok(learner.into_trace(records))
}
