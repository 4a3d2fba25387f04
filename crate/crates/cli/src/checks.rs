//! Certificate and invariant suite behind the `check` subcommand.
//!
//! Every check returns one or more [`CheckOutcome`]s; `worst` is the
//! smallest observed slack (negative means violated).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use implicit_online::data::{gen_lower_bound, gen_sine};
use implicit_online::learners::run;
use implicit_online::linalg::{dot, norm, sub};
use implicit_online::metrics::{
    best_fixed_comparator, certify_adaimplicit, certify_adaimplicit_lambda, certify_constant_rate,
    certify_doubling, certify_doubling_fixed, certify_epoch_count, certify_iomd_minimum, regret,
    temporal_variability,
};
use implicit_online::prox::implicit_step;
use implicit_online::{Algorithm, BoundCertificate, LearnerConfig, Loss, MirrorSetup};
use implicit_online_oracle::{adahedge_recurrence_check, prox_oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{BetaGrid, ExperimentConfig};
use crate::experiments::{learner_config, load_dataset, synthetic_runs};
use crate::{CliError, Result};

pub const PROX_TOL: f64 = 1e-6;
pub const STEP_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-8;
pub const CERT_TOL: f64 = 1e-6;
pub const LOWER_BOUND_TOL: f64 = 1e-9;

/// Deliberate defects for testing the harness itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Report `-delta_t` instead of `delta_t`.
    DeltaSign,
}

impl FromStr for Fault {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta-sign" => Ok(Fault::DeltaSign),
            other => Err(CliError::Config(format!("unknown fault '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckParams {
    /// Random prox instances per loss family.
    pub prox_instances: usize,
    /// Random sequences per sequence-level check.
    pub sequences: usize,
    /// Random `(a, b, c)` triples for the recurrence.
    pub recurrence_trials: usize,
    /// Horizon of random sequences.
    pub horizon: usize,
    /// Grid used by the protocol check.
    pub grid: BetaGrid,
    pub repeats: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl CheckParams {
    pub fn full() -> Self {
        CheckParams {
            prox_instances: 1000,
            sequences: 20,
            recurrence_trials: 10_000,
            horizon: 200,
            grid: BetaGrid::default(),
            repeats: 10,
            seed: 7,
            fault: None,
        }
    }

    pub fn quick() -> Self {
        CheckParams {
            prox_instances: 100,
            sequences: 4,
            recurrence_trials: 1000,
            horizon: 60,
            grid: BetaGrid { lo_exp: -20, hi_exp: 20, points: 5 },
            repeats: 2,
            ..Self::full()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Smallest slack seen; negative when violated.
    pub worst: f64,
    pub trials: usize,
    pub detail: String,
    pub seconds: f64,
}

impl CheckOutcome {
    fn new(name: &str, worst: f64, trials: usize, detail: String) -> Self {
        CheckOutcome { name: name.to_string(), passed: worst >= 0.0, worst, trials, detail, seconds: 0.0 }
    }

    fn flag(name: &str, passed: bool, trials: usize, detail: String) -> Self {
        CheckOutcome { name: name.to_string(), passed, worst: if passed { 0.0 } else { -1.0 }, trials, detail, seconds: 0.0 }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} ({} trials, worst slack {:.3e}, {:.2}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.worst,
            self.seconds,
            self.detail
        )
    }
}

/// Tracks the minimum of `bound - value` over many trials.
struct Slack {
    worst: f64,
    trials: usize,
}

impl Slack {
    fn new() -> Self {
        Slack { worst: f64::INFINITY, trials: 0 }
    }

    fn push(&mut self, slack: f64) {
        self.trials += 1;
        // NaN counts as a violation
        self.worst = if slack.is_nan() { f64::NEG_INFINITY } else { self.worst.min(slack) };
    }

    fn cert(&mut self, c: &BoundCertificate) {
        if c.status != implicit_online::CertificateStatus::OutOfScope {
            self.push(c.slack + CERT_TOL);
        }
    }

    fn outcome(&self, name: &str, detail: String) -> CheckOutcome {
        CheckOutcome::new(name, if self.trials == 0 { 0.0 } else { self.worst }, self.trials, detail)
    }
}

fn timed<T, F: FnOnce() -> Result<T>>(f: F) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

fn stamp(mut outcomes: Vec<CheckOutcome>, seconds: f64) -> Vec<CheckOutcome> {
    for o in &mut outcomes {
        o.seconds = seconds;
    }
    outcomes
}

// ---------------------------------------------------------------------------
// random instances

#[derive(Debug, Clone)]
pub struct ProxInstance {
    pub loss: Loss,
    pub x_t: Vec<f64>,
    pub eta: f64,
    pub setup: MirrorSetup,
}

pub const FAMILIES: [&str; 5] = ["hinge", "absolute", "square", "quad1d", "linear"];

fn random_vec(rng: &mut ChaCha8Rng, d: usize, half_width: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-half_width..=half_width)).collect()
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v = random_vec(rng, d, 1.0);
        let n = norm(&v);
        if n > 0.1 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn random_features(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let scale = rng.gen_range(0.1..=3.0);
    random_direction(rng, d).iter().map(|x| x * scale).collect()
}

/// Random point of the feasible set; a fifth of ball samples sit exactly
/// on the boundary.
fn random_point(rng: &mut ChaCha8Rng, d: usize, setup: &MirrorSetup, box_half_width: f64) -> Vec<f64> {
    match setup.radius() {
        None => random_vec(rng, d, box_half_width),
        Some(r) => {
            let dir = random_direction(rng, d);
            let rho = if rng.gen_bool(0.2) { r } else { r * rng.gen_range(0.0..1.0f64).powf(1.0 / d as f64) };
            setup.project(&dir.iter().map(|x| x * rho).collect::<Vec<_>>())
        }
    }
}

fn random_loss(rng: &mut ChaCha8Rng, family: usize, d: usize) -> Loss {
    match family {
        0 => Loss::hinge(random_features(rng, d), if rng.gen_bool(0.5) { 1.0 } else { -1.0 }),
        1 => Loss::absolute(random_features(rng, d), rng.gen_range(-5.0..=5.0)),
        2 => Loss::square(random_features(rng, d), rng.gen_range(-5.0..=5.0)),
        3 => Loss::quad1d(rng.gen_range(-100.0..=100.0)),
        _ => Loss::linear(random_features(rng, d), rng.gen_range(0.0..=3.0)),
    }
    .expect("valid random loss")
}

/// `n` instances per family, alternating unconstrained and ball domains,
/// with `eta` log-uniform on `[1e-3, 1e3]`.
pub fn prox_instances(n: usize, seed: u64) -> Vec<ProxInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(5 * n);
    for family in 0..FAMILIES.len() {
        for i in 0..n {
            let d = if family == 3 { 1 } else { rng.gen_range(1..=4) };
            let setup = if i % 2 == 1 {
                MirrorSetup::ball(rng.gen_range(0.5..=5.0)).expect("positive radius")
            } else {
                MirrorSetup::unconstrained()
            };
            let loss = random_loss(&mut rng, family, d);
            let x_t = random_point(&mut rng, d, &setup, 5.0);
            let eta = 10f64.powf(rng.gen_range(-3.0..=3.0));
            out.push(ProxInstance { loss, x_t, eta, setup });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// prox-level checks

/// Closed-form prox against the numerical oracle, `||.||_inf <= 1e-6`.
pub fn check_prox_oracle(instances: &[ProxInstance]) -> Result<CheckOutcome> {
    let mut per_family = [0.0f64; 5];
    let mut slack = Slack::new();
    for inst in instances {
        let step = implicit_step(&inst.loss, &inst.x_t, inst.eta, &inst.setup)?;
        let oracle = prox_oracle(&inst.loss, &inst.x_t, inst.eta, &inst.setup, 1e-10)?;
        let err = implicit_online::linalg::max_abs_diff(&step.x_next, &oracle);
        let k = FAMILIES.iter().position(|f| *f == inst.loss.family()).unwrap_or(4);
        per_family[k] = per_family[k].max(err);
        slack.push(PROX_TOL - err);
    }
    let detail = FAMILIES
        .iter()
        .zip(per_family)
        .map(|(f, e)| format!("{f} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(slack.outcome("prox-vs-oracle", format!("max error: {detail}")))
}

/// Per-step properties of the implicit update.
pub fn check_step_properties(instances: &[ProxInstance], fault: Option<Fault>, seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut decrease = Slack::new();
    let mut delta_nonneg = Slack::new();
    let mut optimality = Slack::new();
    let mut monotone = Slack::new();
    let mut gp_norm = Slack::new();
    let mut per_step = Slack::new();
    for inst in instances {
        let (loss, x_t, eta) = (&inst.loss, &inst.x_t, inst.eta);
        let step = implicit_step(loss, x_t, eta, &inst.setup)?;
        let (x1, gp) = (&step.x_next, &step.g_prime);
        let g = loss.subgradient(x_t)?;
        let (l0, l1) = (loss.eval(x_t)?, loss.eval(x1)?);
        let mut delta = l0 - l1 - inst.setup.bregman(x1, x_t)? / eta;
        if fault == Some(Fault::DeltaSign) {
            delta = -delta;
        }
        decrease.push(l0 + STEP_TOL - l1);
        delta_nonneg.push(delta + STEP_TOL);
        // <eta g' + x' - x_t, u - x'> >= 0 for all u in V
        let lhs_dir: Vec<f64> = x1.iter().zip(x_t).zip(gp).map(|((a, b), c)| eta * c + a - b).collect();
        for _ in 0..100 {
            let u = random_point(&mut rng, x_t.len(), &inst.setup, 10.0);
            optimality.push(dot(&lhs_dir, &sub(&u, x1)) + OPTIMALITY_TOL);
        }
        let move_ = sub(x1, x_t);
        monotone.push(dot(&sub(gp, &g), &move_) + STEP_TOL);
        let (ng, ngp) = (norm(&g), norm(gp));
        gp_norm.push(ng + STEP_TOL - ngp);
        per_step.push(eta * ng * (2.0 * ngp).min(ng / 2.0) + STEP_TOL - delta);
    }
    Ok(vec![
        decrease.outcome("step-loss-decrease", "l(x_{t+1}) <= l(x_t) + 1e-9".into()),
        delta_nonneg.outcome("step-delta-nonnegative", "delta_t >= -1e-9".into()),
        optimality.outcome("step-optimality", "100 random u per instance, >= -1e-8".into()),
        monotone.outcome("step-monotone", "<g' - g, x_{t+1} - x_t> >= -1e-9".into()),
        gp_norm.outcome("step-gprime-norm", "||g'|| <= ||g|| + 1e-9".into()),
        per_step.outcome("step-delta-bound", "delta_t <= eta ||g|| min(2||g'||, ||g||/2) + 1e-9".into()),
    ])
}

// ---------------------------------------------------------------------------
// sequence-level checks

/// Random loss sequences with exactly computable variability:
/// kind 0, one-dimensional absolute losses with drifting targets;
/// kind 1, one-dimensional hinge losses;
/// kind 2, two-dimensional linear losses with a rotating direction;
/// kind 3, one-dimensional mix of hinge, absolute and (unless
/// `lipschitz_only`) square losses.
pub fn random_sequence(rng: &mut ChaCha8Rng, kind: usize, horizon: usize, lipschitz_only: bool) -> Vec<Loss> {
    let mut seq = Vec::with_capacity(horizon);
    match kind % 4 {
        0 => {
            let mut y = rng.gen_range(-1.0..=1.0);
            for _ in 0..horizon {
                y += rng.gen_range(-0.05..=0.05);
                let z = rng.gen_range(0.5..=1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                seq.push(Loss::absolute(vec![z], y).expect("valid"));
            }
        }
        1 => {
            for _ in 0..horizon {
                let z = rng.gen_range(0.1..=2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let y = if rng.gen_bool(0.7) { 1.0 } else { -1.0 };
                seq.push(Loss::hinge(vec![z], y).expect("valid"));
            }
        }
        2 => {
            let mut theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let mut s: f64 = rng.gen_range(0.0..=1.0);
            for _ in 0..horizon {
                theta += rng.gen_range(-0.2..=0.2);
                s = (s + rng.gen_range(-0.1..=0.1)).clamp(0.0, 1.0);
                seq.push(Loss::linear(vec![theta.cos(), theta.sin()], s).expect("valid"));
            }
        }
        _ => {
            let families = if lipschitz_only { 2 } else { 3 };
            for _ in 0..horizon {
                let z = vec![rng.gen_range(-2.0..=2.0)];
                let loss = match rng.gen_range(0..families) {
                    0 => Loss::hinge(z, if rng.gen_bool(0.5) { 1.0 } else { -1.0 }),
                    1 => Loss::absolute(z, rng.gen_range(-1.0..=1.0)),
                    _ => Loss::square(z, rng.gen_range(-1.0..=1.0)),
                };
                seq.push(loss.unwrap_or_else(|_| Loss::absolute(vec![1.0], 0.0).expect("valid")));
            }
        }
    }
    seq
}

/// AdaImplicit with `beta` at the Bregman diameter on the sine sequence
/// (radius 75, T = 2000) and on random sequences in the unit ball.
pub fn check_adaimplicit(params: &CheckParams) -> Result<Vec<CheckOutcome>> {
    let mut regret_slack = Slack::new();
    let mut lambda_slack = Slack::new();
    let mut detail = String::new();
    let mut cases: Vec<(Vec<Loss>, MirrorSetup)> = vec![(gen_sine(2000), MirrorSetup::ball(75.0)?)];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xada);
    for k in 0..params.sequences {
        cases.push((random_sequence(&mut rng, k, params.horizon, false), MirrorSetup::ball(1.0)?));
    }
    for (i, (losses, setup)) in cases.iter().enumerate() {
        let d = losses[0].dim();
        let cfg = LearnerConfig::ada_implicit_theory(vec![0.0; d], setup.clone())?;
        let trace = run(&cfg, losses)?;
        let c = certify_adaimplicit(&trace, losses, setup)?;
        let l = certify_adaimplicit_lambda(&trace, losses, setup)?;
        if i == 0 {
            detail = format!("sine: regret {:.4e} <= {:.4e}", c.lhs, c.rhs);
        }
        regret_slack.cert(&c);
        lambda_slack.cert(&l);
    }
    Ok(vec![
        regret_slack.outcome("adaimplicit-regret", detail),
        lambda_slack.outcome("adaimplicit-lambda", "beta^2 lambda_{T+1} <= l_1(x_1) - l_T(x_{T+1}) + V_T".into()),
    ])
}

/// Comparators for the "any u" bounds: the best fixed point when it exists
/// plus a few random feasible points.
fn comparators(rng: &mut ChaCha8Rng, losses: &[Loss], setup: &MirrorSetup) -> Result<Vec<Vec<f64>>> {
    let d = losses[0].dim();
    let mut us = Vec::new();
    if setup.is_bounded() {
        us.push(best_fixed_comparator(losses, setup)?);
    }
    for _ in 0..5 {
        us.push(random_point(rng, d, setup, 5.0));
    }
    Ok(us)
}

/// Constant-step IOMD against the variability bound, plus the
/// minimum-term IOMD bound for both step schedules.
pub fn check_constant_rate(params: &CheckParams) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xc0);
    let mut const_slack = Slack::new();
    let mut iomd_slack = Slack::new();
    let setup = MirrorSetup::ball(1.0)?;
    for k in 0..params.sequences {
        let losses = random_sequence(&mut rng, k, params.horizon, false);
        let d = losses[0].dim();
        let eta = 10f64.powf(rng.gen_range(-2.0..=1.0));
        let cfg = LearnerConfig::new(Algorithm::ImplicitConst, 1.0, vec![0.0; d], setup.clone()).with_eta(eta);
        let trace = run(&cfg, &losses)?;
        let decay = run(&LearnerConfig::new(Algorithm::ImplicitDecay, eta, vec![0.0; d], setup.clone()), &losses)?;
        for u in comparators(&mut rng, &losses, &setup)? {
            const_slack.cert(&certify_constant_rate(&trace, &losses, &setup, &u)?);
            iomd_slack.cert(&certify_iomd_minimum(&trace, &losses, &setup, &u)?);
            iomd_slack.cert(&certify_iomd_minimum(&decay, &losses, &setup, &u)?);
        }
    }
    Ok(vec![
        const_slack.outcome("constant-rate-variability", "R_T(u) <= B(u,x_1)/eta + l_1(x_1) - l_T(x_{T+1}) + V_T".into()),
        iomd_slack.outcome("iomd-minimum", "sum of Bregman terms plus eta ||g|| min(2||g'||, ||g||/2)".into()),
    ])
}

/// The extremal recurrence never exceeds `sqrt((b^2 + c) sum a^2)`.
pub fn check_recurrence(params: &CheckParams) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x1e);
    let mut slack = Slack::new();
    for _ in 0..params.recurrence_trials {
        let n = rng.gen_range(0..=50);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=10.0)).collect();
        let b = rng.gen_range(f64::EPSILON..=5.0);
        let c = rng.gen_range(f64::EPSILON..=5.0);
        let chk = adahedge_recurrence_check(&a, b, c);
        slack.push(if chk.holds { chk.bound - chk.delta_final } else { -1.0 });
    }
    slack.outcome("recurrence-bound", "Delta_{T+1} <= sqrt((b^2 + c) sum a_t^2)".into())
}

/// Doubling trick on fixed Lipschitz losses with `beta = 1`: the number of
/// restarts and the fixed-loss regret bound.
pub fn check_doubling_fixed(params: &CheckParams) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xf1);
    let mut restarted = 0;
    let mut runs = 0;
    let mut first_bad = String::new();
    let mut bound = Slack::new();
    let mut bound_single_epoch = Slack::new();
    let families = [0usize, 1, 4];
    for k in 0..params.sequences {
        let d = rng.gen_range(1..=3);
        let loss = random_loss(&mut rng, families[k % 3], d);
        let setup = if k % 2 == 0 { MirrorSetup::unconstrained() } else { MirrorSetup::ball(rng.gen_range(0.5..=5.0))? };
        let losses = vec![loss.clone(); params.horizon];
        let l = loss.lipschitz().expect("Lipschitz family");
        if l == 0.0 {
            continue;
        }
        let cfg = LearnerConfig::new(Algorithm::DoublingImplicit, 1.0, vec![0.0; d], setup.clone()).with_lipschitz(l);
        let trace = run(&cfg, &losses)?;
        runs += 1;
        if trace.restarts > 0 {
            restarted += 1;
            if first_bad.is_empty() {
                let gap = loss.eval(&cfg.x_init)? - comparator_value(&losses, &setup, &loss)?;
                first_bad = format!(
                    "; first: {} loss, L = {l:.3}, l(x_1) - min l = {gap:.3}, {} restarts",
                    loss.family(),
                    trace.restarts
                );
            }
        }
        for u in comparators(&mut rng, &losses, &setup)? {
            let c = certify_doubling_fixed(&trace, &losses, &setup, &u)?;
            bound.cert(&c);
            if trace.restarts == 0 {
                bound_single_epoch.cert(&c);
            }
        }
    }
    Ok(vec![
        CheckOutcome::flag(
            "doubling-fixed-no-restart",
            restarted == 0,
            runs,
            format!("{restarted} of {runs} fixed-loss runs restarted{first_bad}"),
        ),
        bound.outcome(
            "doubling-fixed-regret",
            format!(
                "R_T(u) <= (L/beta) B(u,x_1) + l(x_1) - l(x_T); worst slack over runs without restarts {:.3e}",
                bound_single_epoch.worst
            ),
        ),
    ])
}

/// Lowest value of a fixed loss over the feasible set (0 for the families
/// used here when unconstrained, since they reach zero or are unbounded).
fn comparator_value(losses: &[Loss], setup: &MirrorSetup, loss: &Loss) -> Result<f64> {
    if setup.is_bounded() {
        let u = best_fixed_comparator(losses, setup)?;
        Ok(loss.eval(&u)?)
    } else if matches!(loss, Loss::Linear { .. }) {
        Ok(f64::NEG_INFINITY)
    } else {
        Ok(0.0)
    }
}

/// Doubling trick on Lipschitz sequences: the general regret bound and the
/// epoch-count bound.
pub fn check_doubling_lipschitz(params: &CheckParams) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xd0);
    let mut regret_slack = Slack::new();
    let mut epoch_slack = Slack::new();
    let mut max_restarts = 0;
    for k in 0..params.sequences {
        let losses = random_sequence(&mut rng, k, params.horizon, true);
        let d = losses[0].dim();
        let setup = if k % 2 == 0 { MirrorSetup::unconstrained() } else { MirrorSetup::ball(1.0)? };
        let beta = 10f64.powf(rng.gen_range(-1.0..=1.0));
        let cfg = learner_config(Algorithm::DoublingImplicit, beta, vec![0.0; d], &setup, &losses)?;
        let trace = run(&cfg, &losses)?;
        max_restarts = max_restarts.max(trace.restarts);
        for u in comparators(&mut rng, &losses, &setup)? {
            regret_slack.cert(&certify_doubling(&trace, &losses, &setup, &u)?);
        }
        epoch_slack.cert(&certify_epoch_count(&trace));
    }
    Ok(vec![
        regret_slack.outcome(
            "doubling-regret",
            "R_T(u) <= c (B(u,x_1)/beta + beta) L sqrt(T+1) + c beta L / 2".into(),
        ),
        epoch_slack.outcome("doubling-epoch-count", format!("max restarts {max_restarts}")),
    ])
}

/// Every learner suffers regret at least `V'` on the lower-bound sequence,
/// whose variability is exactly `V'`.
pub fn check_lower_bound(params: &CheckParams) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x6);
    let setup = MirrorSetup::ball(1.0)?;
    let mut regret_slack = Slack::new();
    let mut vt_slack = Slack::new();
    let mut starts = vec![vec![0.0, 0.0]];
    for _ in 0..3 {
        starts.push(random_point(&mut rng, 2, &setup, 1.0));
    }
    for v in [0.0, 1.0, 10.0, 1000.0] {
        for x1 in &starts {
            let losses = gen_lower_bound(v, &setup, x1, 10)?;
            let vt = temporal_variability(&losses, &setup)?;
            vt_slack.push(LOWER_BOUND_TOL - (vt - v).abs());
            let u_star = best_fixed_comparator(&losses, &setup)?;
            for algo in Algorithm::ALL {
                let cfg = match algo {
                    Algorithm::ImplicitConst => LearnerConfig::new(algo, 1.0, x1.clone(), setup.clone()).with_eta(1.0),
                    Algorithm::DoublingImplicit => {
                        LearnerConfig::new(algo, 1.0, x1.clone(), setup.clone()).with_lipschitz(v.max(1.0))
                    }
                    _ => LearnerConfig::new(algo, 1.0, x1.clone(), setup.clone()),
                };
                let trace = run(&cfg, &losses)?;
                regret_slack.push(regret(&trace, &losses, &u_star)? - (v - LOWER_BOUND_TOL));
            }
        }
    }
    Ok(vec![
        regret_slack.outcome("lower-bound-regret", "R_T(u*) >= V' - 1e-9 for every learner".into()),
        vt_slack.outcome("lower-bound-variability", "V_T = V' +- 1e-9".into()),
    ])
}

/// On the sine sequence with `beta = 1`, AdaImplicit ends with a lower
/// cumulative loss than OGD and than decaying-rate IOMD.
pub fn check_synthetic_ordering() -> Result<CheckOutcome> {
    let cfg = ExperimentConfig::synthetic_defaults();
    let (_, _, runs) = synthetic_runs(&cfg)?;
    let final_of = |a: Algorithm| {
        runs.iter().find(|r| r.trace.config.algorithm == a).map(|r| r.trace.cumulative_loss()).expect("default run")
    };
    let ada = final_of(Algorithm::AdaImplicit);
    let ogd = final_of(Algorithm::Ogd);
    let imp = final_of(Algorithm::ImplicitDecay);
    let worst = (ogd - ada).min(imp - ada);
    let mut out = CheckOutcome::new(
        "synthetic-ordering",
        worst,
        1,
        format!("L_T: adaimplicit {ada:.6e}, ogd {ogd:.6e}, implicit {imp:.6e}, adaogd {:.6e}", final_of(Algorithm::AdaOgd)),
    );
    out.passed = worst > 0.0;
    Ok(out)
}

fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    std::env::temp_dir().join(format!("implicit-online-{tag}-{}-{nanos}", std::process::id()))
}

/// Sweep protocol on the bundled sample: grid values, repeat counts,
/// byte-identical output across two runs, and preprocessing range.
pub fn check_protocol(params: &CheckParams) -> Result<CheckOutcome> {
    let mut cfg = ExperimentConfig::sweep_defaults();
    cfg.beta_grid = params.grid;
    cfg.repeats = params.repeats;
    let mut problems = Vec::new();

    let ds = load_dataset(&cfg)?;
    let in_range = ds.rows.iter().all(|r| r.values.iter().all(|v| (-1.0..=1.0).contains(v)));
    let bias_ok = ds.rows.iter().all(|r| r.indices.last() == Some(&ds.d) && r.values.last() == Some(&1.0));
    if !in_range {
        problems.push("feature outside [-1, 1]".to_string());
    }
    if !bias_ok {
        problems.push("bias feature missing".to_string());
    }

    let mut bytes = Vec::new();
    for tag in ["a", "b"] {
        let dir = scratch_dir(&format!("protocol-{tag}"));
        cfg.out = dir.clone();
        crate::experiments::cmd_sweep(&cfg)?;
        let read = |name: &str| std::fs::read(dir.join(name)).map_err(|e| CliError::io(&dir.join(name), e));
        bytes.push((read("sweep.csv")?, read("sweep_summary.csv")?));
        let _ = std::fs::remove_dir_all(&dir);
    }
    if bytes[0] != bytes[1] {
        problems.push("sweep output differs between identical runs".to_string());
    }

    let text = String::from_utf8_lossy(&bytes[0].0).into_owned();
    let mut lines = text.lines();
    if lines.next() != Some("algorithm,beta,repeat,avg_cumulative_loss") {
        problems.push("unexpected sweep header".to_string());
    }
    let mut cells: std::collections::BTreeMap<(String, u64), Vec<usize>> = Default::default();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let beta: f64 = f[1].parse().unwrap_or(f64::NAN);
        let repeat = if f.len() == 4 && f[3].parse::<f64>().is_ok() { f[2].parse().unwrap_or(usize::MAX) } else { usize::MAX };
        cells.entry((f[0].to_string(), beta.to_bits())).or_default().push(repeat);
    }
    let expected_betas = params.grid.values();
    for algo in &cfg.algorithms {
        let betas: Vec<f64> = cells
            .keys()
            .filter(|(a, _)| a == algo.name())
            .map(|(_, b)| f64::from_bits(*b))
            .collect();
        let mut sorted = betas.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted != expected_betas {
            problems.push(format!("{algo}: beta values differ from the grid"));
        }
    }
    if params.grid == BetaGrid::default() {
        let exact = expected_betas.iter().enumerate().all(|(k, b)| *b == 2f64.powi(k as i32 - 20));
        if !exact {
            problems.push("grid is not 2^-20 .. 2^20".into());
        }
    }
    for ((algo, beta), reps) in &cells {
        let mut r = reps.clone();
        r.sort_unstable();
        if r != (0..params.repeats).collect::<Vec<_>>() {
            problems.push(format!("{algo} beta {}: repeats {r:?}", f64::from_bits(*beta)));
        }
    }
    let detail = format!(
        "{} algorithms x {} betas x {} repeats{}",
        cfg.algorithms.len(),
        expected_betas.len(),
        params.repeats,
        if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    Ok(CheckOutcome::flag("sweep-protocol", problems.is_empty(), cells.len(), detail))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub params: CheckParams,
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

/// Runs the whole suite.
pub fn cmd_check(params: &CheckParams) -> Result<CheckReport> {
    let mut outcomes = Vec::new();
    let instances = prox_instances(params.prox_instances, params.seed);
    let (o, s) = timed(|| check_prox_oracle(&instances))?;
    outcomes.extend(stamp(vec![o], s));
    let (o, s) = timed(|| check_step_properties(&instances, params.fault, params.seed))?;
    outcomes.extend(stamp(o, s));
    let (o, s) = timed(|| check_adaimplicit(params))?;
    outcomes.extend(stamp(o, s));
    let (o, s) = timed(|| check_constant_rate(params))?;
    outcomes.extend(stamp(o, s));
    let (o, s) = timed(|| Ok(check_recurrence(params)))?;
    outcomes.extend(stamp(vec![o], s));
    let (o, s) = timed(|| check_doubling_fixed(params))?;
    outcomes.extend(stamp(o, s));
    let (o, s) = timed(|| check_doubling_lipschitz(params))?;
    outcomes.extend(stamp(o, s));
    let (o, s) = timed(|| check_lower_bound(params))?;
    outcomes.extend(stamp(o, s));
    let (o, s) = timed(check_synthetic_ordering)?;
    outcomes.extend(stamp(vec![o], s));
    let (o, s) = timed(|| check_protocol(params))?;
    outcomes.extend(stamp(vec![o], s));
    Ok(CheckReport { params: params.clone(), outcomes })
}
