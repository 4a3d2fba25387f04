//! Regret, temporal variability and regret-bound certificates.
//!
//! A certificate evaluates both sides of a regret inequality on a concrete
//! run: the measured regret (`lhs`) and the bound assembled from the run's
//! telemetry (`rhs`). Runs that do not satisfy the bound's preconditions
//! are reported as [`CertificateStatus::OutOfScope`] instead of being
//! evaluated.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::MirrorSetup;
use crate::learners::{Algorithm, Trace};
use crate::linalg::{self, norm};
use crate::losses::{pairwise_variability_term, Loss};

/// A certificate holds when `rhs - lhs >= -CERTIFICATE_TOL`.
pub const CERTIFICATE_TOL: f64 = 1e-6;

/// `sqrt(2) / (sqrt(2) - 1)`
pub const DOUBLING_C: f64 = std::f64::consts::SQRT_2 / (std::f64::consts::SQRT_2 - 1.0);

/// Iterations of the projected-subgradient comparator search in `d >= 2`.
pub const COMPARATOR_ITERS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateStatus {
    Holds,
    Violated,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub status: CertificateStatus,
    pub note: String,
}

impl BoundCertificate {
    pub fn evaluate(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        let status = if slack >= -CERTIFICATE_TOL {
            CertificateStatus::Holds
        } else {
            CertificateStatus::Violated
        };
        BoundCertificate { name: name.into(), lhs, rhs, slack, status, note: String::new() }
    }

    pub fn out_of_scope(name: impl Into<String>, note: impl Into<String>) -> Self {
        BoundCertificate {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            status: CertificateStatus::OutOfScope,
            note: note.into(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn holds(&self) -> bool {
        self.status == CertificateStatus::Holds
    }
}

impl fmt::Display for BoundCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            CertificateStatus::Holds => "holds",
            CertificateStatus::Violated => "VIOLATED",
            CertificateStatus::OutOfScope => "outside the bound's assumptions",
        };
        write!(
            f,
            "{}: {} (lhs {:.6e}, rhs {:.6e}, slack {:.6e})",
            self.name, status, self.lhs, self.rhs, self.slack
        )?;
        if !self.note.is_empty() {
            write!(f, " [{}]", self.note)?;
        }
        Ok(())
    }
}

fn check_lengths(trace: &Trace, losses: &[Loss]) -> Result<()> {
    if trace.records.len() != losses.len() {
        return Err(Error::InvalidConfig(format!(
            "trace has {} rounds but {} losses were given",
            trace.records.len(),
            losses.len()
        )));
    }
    Ok(())
}

/// `R_T(u) = sum_t loss_t(x_t) - sum_t loss_t(u)`.
pub fn regret(trace: &Trace, losses: &[Loss], u: &[f64]) -> Result<f64> {
    check_lengths(trace, losses)?;
    let mut total = 0.0;
    for (rec, l) in trace.records.iter().zip(losses) {
        total += rec.loss_value - l.eval(u)?;
    }
    Ok(total)
}

fn total_loss(losses: &[Loss], u: &[f64]) -> f64 {
    losses.iter().map(|l| l.eval_unchecked(u)).sum()
}

/// `V_T = sum_{t=2}^T max_{x in V} loss_t(x) - loss_{t-1}(x)`, signed terms.
pub fn temporal_variability(losses: &[Loss], setup: &MirrorSetup) -> Result<f64> {
    let mut v = 0.0;
    for w in losses.windows(2) {
        v += pairwise_variability_term(&w[1], &w[0], setup)?;
    }
    Ok(v)
}

/// Golden-section minimization of a convex function on `[a, b]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    0.5 * (a + b)
}

/// Best fixed point in hindsight, `argmin_{u in V} sum_t loss_t(u)`.
///
/// Exact for all-linear and all-`Quad1D` sequences. Other one-dimensional
/// sequences use golden-section search followed by a grid refinement;
/// higher dimensions use projected subgradient descent with iterate
/// averaging (`COMPARATOR_ITERS` steps of size `c / sqrt(k)`) followed by a
/// coordinate-wise polish. The search is deterministic.
pub fn best_fixed_comparator(losses: &[Loss], setup: &MirrorSetup) -> Result<Vec<f64>> {
    let first = losses.first().ok_or(Error::EmptySequence)?;
    let d = first.dim();
    for l in losses {
        check_dim(d, l.dim())?;
    }

    if losses.iter().all(|l| matches!(l, Loss::Linear { .. })) {
        let mut w = vec![0.0; d];
        for l in losses {
            if let Loss::Linear { g, s } = l {
                for (wi, gi) in w.iter_mut().zip(g) {
                    *wi += s * gi;
                }
            }
        }
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok(vec![0.0; d]);
        }
        return match setup.radius() {
            Some(r) => Ok(linalg::scale(&w, -r / nw)),
            None => Err(Error::ComparatorUnbounded("linear losses on the whole space".into())),
        };
    }

    if losses.iter().all(|l| matches!(l, Loss::Quad1D { .. })) {
        let mean = losses
            .iter()
            .map(|l| match l {
                Loss::Quad1D { y } => *y,
                _ => unreachable!(),
            })
            .sum::<f64>()
            / losses.len() as f64;
        return Ok(setup.project(&[mean]));
    }

    let f = |x: &[f64]| total_loss(losses, x);

    if d == 1 {
        let (lo, hi) = match setup.radius() {
            Some(r) => (-r, r),
            None => bracket_1d(|p| f(&[p]))?,
        };
        let scale = hi - lo;
        let mut p = golden_section(|p| f(&[p]), lo, hi, 1e-13 * scale.max(1.0));
        // grid refinement around the golden-section point
        let mut h = 1e-3 * scale;
        while h > 1e-15 * scale.max(1.0) {
            let mut best = (p, f(&[p]));
            for k in -10..=10 {
                let q = (p + k as f64 * h).clamp(lo, hi);
                let v = f(&[q]);
                if v < best.1 {
                    best = (q, v);
                }
            }
            p = best.0;
            h *= 0.1;
        }
        return Ok(vec![p]);
    }

    let r = setup.radius();
    let project = |x: &[f64]| setup.project(x);
    let step_c = r.map(|r| 2.0 * r).unwrap_or(1.0);
    let mut x = vec![0.0; d];
    let mut avg = vec![0.0; d];
    let mut best = (x.clone(), f(&x));
    for k in 1..=COMPARATOR_ITERS {
        let mut g = vec![0.0; d];
        for l in losses {
            let gl = l.subgradient(&x)?;
            for (gi, v) in g.iter_mut().zip(gl) {
                *gi += v;
            }
        }
        let gn = norm(&g);
        if gn == 0.0 {
            best = (x.clone(), f(&x));
            break;
        }
        let eta = step_c / (gn * (k as f64).sqrt());
        x = project(&linalg::axpy(&x, -eta, &g));
        for (a, xi) in avg.iter_mut().zip(&x) {
            *a += (xi - *a) / k as f64;
        }
        let v = f(&x);
        if v < best.1 {
            best = (x.clone(), v);
        }
    }
    let va = f(&avg);
    if va < best.1 {
        best = (avg, va);
    }
    // coordinate-wise polish
    let (mut u, mut fu) = best;
    let mut h = 1e-3 * step_c;
    while h > 1e-13 * step_c {
        let mut moved = false;
        for i in 0..d {
            for dir in [h, -h] {
                let mut cand = u.clone();
                cand[i] += dir;
                let cand = project(&cand);
                let v = f(&cand);
                if v < fu {
                    u = cand;
                    fu = v;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    if r.is_none() && !fu.is_finite() {
        return Err(Error::ComparatorUnbounded("total loss is not bounded below".into()));
    }
    Ok(u)
}

/// Bracket containing the minimizer of a coercive convex function.
fn bracket_1d<F: Fn(f64) -> f64>(f: F) -> Result<(f64, f64)> {
    let f0 = f(0.0);
    let edge = |sign: f64| -> Result<f64> {
        let mut h = 1.0;
        while f(sign * h) < f0 {
            h *= 2.0;
            if h > 1e300 {
                return Err(Error::ComparatorUnbounded("total loss is not coercive".into()));
            }
        }
        Ok(sign * h)
    };
    Ok((edge(-1.0)?, edge(1.0)?))
}

fn comparator_regret(trace: &Trace, losses: &[Loss], setup: &MirrorSetup) -> Result<(Vec<f64>, f64)> {
    let u = best_fixed_comparator(losses, setup)?;
    let r = regret(trace, losses, &u)?;
    Ok((u, r))
}

fn last_loss_at_final(trace: &Trace, losses: &[Loss]) -> Result<f64> {
    losses.last().ok_or(Error::EmptySequence)?.eval(&trace.x_final)
}

/// AdaImplicit bound with `beta = D`:
/// `R_T <= min{2 (l_1(x_1) - l_T(x_{T+1}) + V_T), 2 D sqrt(3 sum ||g_t||^2)}`,
/// measured against the best fixed comparator.
pub fn certify_adaimplicit(trace: &Trace, losses: &[Loss], setup: &MirrorSetup) -> Result<BoundCertificate> {
    const NAME: &str = "adaimplicit-regret";
    check_lengths(trace, losses)?;
    if trace.config.algorithm != Algorithm::AdaImplicit {
        return Ok(BoundCertificate::out_of_scope(NAME, "trace is not from AdaImplicit"));
    }
    if !setup.is_bounded() {
        return Ok(BoundCertificate::out_of_scope(NAME, "domain is unbounded"));
    }
    let d = setup.bregman_diameter();
    if (trace.config.beta - d).abs() > 1e-12 * d {
        return Ok(BoundCertificate::out_of_scope(
            NAME,
            format!("beta = {} differs from the Bregman diameter {}", trace.config.beta, d),
        ));
    }
    if losses.is_empty() {
        return Ok(BoundCertificate::evaluate(NAME, 0.0, 0.0));
    }
    let (_, lhs) = comparator_regret(trace, losses, setup)?;
    let v_t = temporal_variability(losses, setup)?;
    let first = losses[0].eval(&trace.config.x_init)?;
    let variability_arm = 2.0 * (first - last_loss_at_final(trace, losses)? + v_t);
    let g_sq: f64 = trace.records.iter().map(|r| r.g_norm * r.g_norm).sum();
    let gradient_arm = 2.0 * d * (3.0 * g_sq).sqrt();
    Ok(BoundCertificate::evaluate(NAME, lhs, variability_arm.min(gradient_arm)).with_note(format!(
        "V_T = {v_t:.6e}, variability arm {variability_arm:.6e}, gradient arm {gradient_arm:.6e}"
    )))
}

/// `beta^2 lambda_{T+1} <= l_1(x_1) - l_T(x_{T+1}) + V_T`, the intermediate
/// step of the AdaImplicit analysis.
pub fn certify_adaimplicit_lambda(trace: &Trace, losses: &[Loss], setup: &MirrorSetup) -> Result<BoundCertificate> {
    const NAME: &str = "adaimplicit-lambda";
    check_lengths(trace, losses)?;
    if trace.config.algorithm != Algorithm::AdaImplicit {
        return Ok(BoundCertificate::out_of_scope(NAME, "trace is not from AdaImplicit"));
    }
    if losses.is_empty() {
        return Ok(BoundCertificate::evaluate(NAME, 0.0, 0.0));
    }
    let v_t = temporal_variability(losses, setup)?;
    let first = losses[0].eval(&trace.config.x_init)?;
    let rhs = first - last_loss_at_final(trace, losses)? + v_t;
    let beta = trace.config.beta;
    Ok(BoundCertificate::evaluate(NAME, beta * beta * trace.lambda_final, rhs))
}

/// Constant-rate bound
/// `R_T(u) <= B(u, x_1)/eta + l_1(x_1) - l_T(x_{T+1}) + V_T`.
pub fn certify_constant_rate(
    trace: &Trace,
    losses: &[Loss],
    setup: &MirrorSetup,
    u: &[f64],
) -> Result<BoundCertificate> {
    const NAME: &str = "constant-rate-variability";
    check_lengths(trace, losses)?;
    let Some(eta) = trace.config.eta_const.filter(|_| trace.config.algorithm == Algorithm::ImplicitConst)
    else {
        return Ok(BoundCertificate::out_of_scope(NAME, "trace is not from ImplicitConst"));
    };
    if losses.is_empty() {
        return Ok(BoundCertificate::evaluate(NAME, 0.0, 0.0));
    }
    let lhs = regret(trace, losses, u)?;
    let v_t = temporal_variability(losses, setup)?;
    let x1 = &trace.config.x_init;
    let rhs = setup.bregman(u, x1)? / eta + losses[0].eval(x1)? - last_loss_at_final(trace, losses)? + v_t;
    Ok(BoundCertificate::evaluate(NAME, lhs, rhs).with_note(format!("V_T = {v_t:.6e}")))
}

/// IOMD bound with the minimum term:
/// `R_T(u) <= sum_t (B(u,x_t) - B(u,x_{t+1}))/eta_t + sum_t eta_t ||g_t|| min(2||g'_t||, ||g_t||/2)`.
pub fn certify_iomd_minimum(trace: &Trace, losses: &[Loss], setup: &MirrorSetup, u: &[f64]) -> Result<BoundCertificate> {
    const NAME: &str = "iomd-minimum";
    check_lengths(trace, losses)?;
    if !matches!(trace.config.algorithm, Algorithm::ImplicitDecay | Algorithm::ImplicitConst) {
        return Ok(BoundCertificate::out_of_scope(NAME, "trace is not from an IOMD schedule"));
    }
    let lhs = regret(trace, losses, u)?;
    let mut rhs = 0.0;
    for (i, rec) in trace.records.iter().enumerate() {
        let x_next = trace.iterate(i + 2);
        let eta = rec.rate;
        rhs += (setup.bregman(u, &rec.x)? - setup.bregman(u, x_next)?) / eta;
        rhs += eta * rec.g_norm * (2.0 * rec.g_prime_norm).min(rec.g_norm / 2.0);
    }
    Ok(BoundCertificate::evaluate(NAME, lhs, rhs))
}

/// General doubling-trick bound
/// `R_T(u) <= c (B(u,x_1)/beta + beta) L sqrt(T+1) + c beta L / 2`.
pub fn certify_doubling(trace: &Trace, losses: &[Loss], setup: &MirrorSetup, u: &[f64]) -> Result<BoundCertificate> {
    const NAME: &str = "doubling-regret";
    check_lengths(trace, losses)?;
    let Some(l) = trace.config.lipschitz.filter(|_| trace.config.algorithm == Algorithm::DoublingImplicit)
    else {
        return Ok(BoundCertificate::out_of_scope(NAME, "trace is not from DoublingImplicit"));
    };
    if let Some(rec) = trace.records.iter().find(|r| r.g_norm > l * (1.0 + 1e-12)) {
        return Ok(BoundCertificate::out_of_scope(
            NAME,
            format!("round {} has ||g|| = {} > L = {}", rec.t, rec.g_norm, l),
        ));
    }
    let beta = trace.config.beta;
    let lhs = regret(trace, losses, u)?;
    let b = setup.bregman(u, &trace.config.x_init)?;
    let t = trace.horizon() as f64;
    let rhs = DOUBLING_C * (b / beta + beta) * l * (t + 1.0).sqrt() + DOUBLING_C * beta * l / 2.0;
    Ok(BoundCertificate::evaluate(NAME, lhs, rhs).with_note(format!("{} restarts", trace.restarts)))
}

/// Fixed-loss doubling bound `R_T(u) <= (L/beta) B(u, x_1) + l(x_1) - l(x_T)`.
/// Only applies when every loss in the sequence is the same.
pub fn certify_doubling_fixed(
    trace: &Trace,
    losses: &[Loss],
    setup: &MirrorSetup,
    u: &[f64],
) -> Result<BoundCertificate> {
    const NAME: &str = "doubling-fixed-loss";
    check_lengths(trace, losses)?;
    let Some(l) = trace.config.lipschitz.filter(|_| trace.config.algorithm == Algorithm::DoublingImplicit)
    else {
        return Ok(BoundCertificate::out_of_scope(NAME, "trace is not from DoublingImplicit"));
    };
    let Some(first) = losses.first() else {
        return Ok(BoundCertificate::evaluate(NAME, 0.0, 0.0));
    };
    if losses.iter().any(|x| x != first) {
        return Ok(BoundCertificate::out_of_scope(NAME, "losses are not fixed"));
    }
    let beta = trace.config.beta;
    let lhs = regret(trace, losses, u)?;
    let x_1 = &trace.config.x_init;
    let x_last = &trace.records.last().expect("non-empty").x;
    let rhs = l / beta * setup.bregman(u, x_1)? + first.eval(x_1)? - first.eval(x_last)?;
    Ok(BoundCertificate::evaluate(NAME, lhs, rhs).with_note(format!("{} restarts", trace.restarts)))
}

/// Per-epoch sums of `delta_t` with the epoch's step size.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub eta: f64,
    pub delta_sum: f64,
}

pub fn epoch_summaries(trace: &Trace) -> Vec<EpochSummary> {
    let mut out: Vec<EpochSummary> = Vec::new();
    for rec in &trace.records {
        match out.last_mut() {
            Some(e) if e.epoch == rec.epoch => e.delta_sum += rec.delta,
            _ => out.push(EpochSummary { epoch: rec.epoch, eta: rec.rate, delta_sum: rec.delta }),
        }
    }
    out
}

/// Epoch-count bound for the doubling trick:
/// `N <= min(log2(sum_i Delta_i/eta_i / L^2 + 1), 2 log2((sqrt2 - 1)/(beta L) sum_i Delta_i + 1))`.
///
/// `lhs` is `N`, `rhs` the smaller of the two logarithms. With `beta = 1`
/// the second arm is the classical `(sqrt2 - 1)/L` form.
pub fn certify_epoch_count(trace: &Trace) -> BoundCertificate {
    const NAME: &str = "doubling-epoch-count";
    let Some(l) = trace.config.lipschitz.filter(|_| trace.config.algorithm == Algorithm::DoublingImplicit)
    else {
        return BoundCertificate::out_of_scope(NAME, "trace is not from DoublingImplicit");
    };
    let beta = trace.config.beta;
    let epochs = epoch_summaries(trace);
    let scaled: f64 = epochs.iter().map(|e| e.delta_sum / e.eta).sum();
    let raw: f64 = epochs.iter().map(|e| e.delta_sum).sum();
    let arm1 = (scaled / (l * l) + 1.0).log2();
    let arm2 = 2.0 * ((std::f64::consts::SQRT_2 - 1.0) / (beta * l) * raw + 1.0).log2();
    BoundCertificate::evaluate(NAME, trace.restarts as f64, arm1.min(arm2))
        .with_note(format!("arms {arm1:.6e} / {arm2:.6e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{run, LearnerConfig};

    fn ball(r: f64) -> MirrorSetup {
        MirrorSetup::ball(r).unwrap()
    }

    #[test]
    fn regret_zero_losses() {
        let losses = vec![Loss::linear(vec![1.0, 0.0], 0.0).unwrap(); 5];
        let cfg = LearnerConfig::new(Algorithm::Ogd, 1.0, vec![0.0, 0.0], ball(1.0));
        let tr = run(&cfg, &losses).unwrap();
        assert_eq!(regret(&tr, &losses, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn comparator_examples() {
        let q = vec![Loss::quad1d(100.0).unwrap(); 10];
        assert_eq!(best_fixed_comparator(&q, &ball(75.0)).unwrap(), vec![75.0]);
        let mut seq = vec![Loss::linear(vec![1.0, 0.0], 1.0).unwrap()];
        seq.extend(vec![Loss::linear(vec![1.0, 0.0], 0.0).unwrap(); 4]);
        assert_eq!(best_fixed_comparator(&seq, &ball(1.0)).unwrap(), vec![-1.0, 0.0]);
        let zero = vec![Loss::linear(vec![1.0, 0.0], 0.0).unwrap(); 3];
        assert_eq!(best_fixed_comparator(&zero, &ball(1.0)).unwrap(), vec![0.0, 0.0]);
        assert!(best_fixed_comparator(&seq, &MirrorSetup::unconstrained()).is_err());
    }

    #[test]
    fn comparator_1d_absolute_median() {
        // sum |x - y_i| is minimized at the median
        let losses: Vec<Loss> = [0.0, 1.0, 5.0].iter().map(|&y| Loss::absolute(vec![1.0], y).unwrap()).collect();
        let u = best_fixed_comparator(&losses, &MirrorSetup::unconstrained()).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-9, "{u:?}");
    }

    #[test]
    fn comparator_2d_square() {
        // least squares with two orthogonal features: u = (1, -2)
        let losses = vec![
            Loss::square(vec![1.0, 0.0], 1.0).unwrap(),
            Loss::square(vec![0.0, 1.0], -2.0).unwrap(),
        ];
        let u = best_fixed_comparator(&losses, &ball(10.0)).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-6 && (u[1] + 2.0).abs() < 1e-6, "{u:?}");
    }

    #[test]
    fn variability_examples() {
        let fixed = vec![Loss::hinge(vec![1.0, 2.0], 1.0).unwrap(); 7];
        assert_eq!(temporal_variability(&fixed, &ball(1.0)).unwrap(), 0.0);
        let pair = vec![Loss::quad1d(0.0).unwrap(), Loss::quad1d(1.0).unwrap()];
        assert!((temporal_variability(&pair, &ball(75.0)).unwrap() - 37.75).abs() < 1e-12);
    }

    #[test]
    fn zero_loss_certificates() {
        let setup = ball(1.0);
        let losses = vec![Loss::linear(vec![1.0, 0.0], 0.0).unwrap(); 4];
        let cfg = LearnerConfig::ada_implicit_theory(vec![0.0, 0.0], setup.clone()).unwrap();
        let tr = run(&cfg, &losses).unwrap();
        let c = certify_adaimplicit(&tr, &losses, &setup).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        assert!(c.holds());

        let cfg = LearnerConfig::new(Algorithm::ImplicitConst, 1.0, vec![0.0, 0.0], setup.clone()).with_eta(1.0);
        let tr = run(&cfg, &losses).unwrap();
        let c = certify_iomd_minimum(&tr, &losses, &setup, &[0.3, 0.1]).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn out_of_scope_reported() {
        let setup = ball(1.0);
        let losses = vec![Loss::square(vec![1.0], 1.0).unwrap(); 3];
        let cfg = LearnerConfig::new(Algorithm::AdaImplicit, 1.0, vec![0.0], setup.clone());
        let tr = run(&cfg, &losses).unwrap();
        let c = certify_adaimplicit(&tr, &losses, &setup).unwrap();
        assert_eq!(c.status, CertificateStatus::OutOfScope);
        assert!(!c.holds());
        let c = certify_doubling(&tr, &losses, &setup, &[0.0]).unwrap();
        assert_eq!(c.status, CertificateStatus::OutOfScope);
    }

    #[test]
    fn adaimplicit_fixed_square() {
        let setup = ball(1.0);
        let losses = vec![Loss::square(vec![1.0], 1.0).unwrap(); 100];
        let cfg = LearnerConfig::ada_implicit_theory(vec![0.0], setup.clone()).unwrap();
        let tr = run(&cfg, &losses).unwrap();
        let c = certify_adaimplicit(&tr, &losses, &setup).unwrap();
        assert!(c.holds(), "{c}");
        assert!(c.rhs <= 1.0 + 1e-12);
    }

    #[test]
    fn doubling_constant() {
        assert!((DOUBLING_C - 3.414213562373095).abs() < 1e-12);
    }
}
