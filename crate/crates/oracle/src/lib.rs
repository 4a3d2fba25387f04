//! Brute-force reference solvers for validating `implicit_online`.
//!
//! Everything here works from [`Loss::eval`] and [`Loss::subgradient`]
//! alone and shares no code with the production prox or variability paths.

use implicit_online::linalg::{axpy, dot, norm};
use implicit_online::{Loss, MirrorSetup};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_DOUBLINGS: usize = 200;
const POLAR_POINTS: usize = 4096;
const POLISH_ITERS: usize = 300;
const REDUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle unsupported: {0}")]
    Unsupported(String),
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Core(#[from] implicit_online::Error),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Golden-section search for the minimizer of `f` on `[a, b]`; returns the
/// final bracket.
fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    (a, b)
}

/// Bisection on the sign of a (sub)derivative. Requires `df(lo) <= 0 <= df(hi)`.
fn sign_bisect<F: Fn(f64) -> f64>(df: &F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..POLISH_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = df(mid);
        if s == 0.0 {
            return mid;
        }
        if s < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes a one-dimensional convex function: golden section to `tol`,
/// then a derivative-sign polish on a widened bracket when its end signs
/// confirm it contains the minimizer.
fn minimize_1d<F, D>(f: &F, df: &D, lo: f64, hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (a, b) = golden(f, lo, hi, tol);
    let guess = 0.5 * (a + b);
    let w = 16.0 * (b - a).max(tol) + 1e-6 * guess.abs();
    let (pa, pb) = ((guess - w).max(lo), (guess + w).min(hi));
    if df(pa) <= 0.0 && df(pb) >= 0.0 {
        return sign_bisect(df, pa, pb);
    }
    guess
}

/// Unit direction the loss varies along, or `None` if it is constant.
fn loss_direction(loss: &Loss) -> Option<Vec<f64>> {
    let w: Vec<f64> = match loss {
        Loss::Hinge { z, .. } | Loss::Absolute { z, .. } | Loss::Square { z, .. } => z.clone(),
        Loss::Quad1D { .. } => vec![1.0],
        Loss::Linear { g, s } if *s != 0.0 => g.clone(),
        Loss::Linear { .. } => return None,
    };
    let n = norm(&w);
    (n > 0.0).then(|| w.iter().map(|v| v / n).collect())
}

/// Confirms that the loss gradient at `x` lies along `u`.
fn check_reduction(loss: &Loss, u: &[f64], x: &[f64]) -> Result<()> {
    let g = loss.subgradient(x)?;
    let along = dot(&g, u);
    let resid = norm(&axpy(&g, -along, u));
    if resid > REDUCTION_TOL * (1.0 + norm(&g)) {
        return Err(OracleError::Unsupported(format!(
            "gradient leaves the search direction (residual {resid:e})"
        )));
    }
    Ok(())
}

/// Numerical solution of `argmin_{x in V} 0.5 ||x - x_t||^2 + eta * loss(x)`.
///
/// Linear-prediction losses reduce to a line search along the loss
/// direction. On a ball, if the line minimizer is infeasible the solution
/// lies on the boundary circle of the plane through the origin spanned by
/// `x_t` and that direction, which is searched with a polar grid and
/// refined. `tol` is the target accuracy in the argument.
pub fn prox_oracle(loss: &Loss, x_t: &[f64], eta: f64, setup: &MirrorSetup, tol: f64) -> Result<Vec<f64>> {
    if loss.dim() != x_t.len() {
        return Err(OracleError::InvalidInput(format!(
            "loss has dimension {}, point has {}",
            loss.dim(),
            x_t.len()
        )));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(OracleError::InvalidInput(format!("step size must be positive and finite, got {eta}")));
    }
    if !(tol > 0.0) {
        return Err(OracleError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let Some(u) = loss_direction(loss) else {
        return Ok(x_t.to_vec());
    };
    check_reduction(loss, &u, x_t)?;

    let objective = |x: &[f64]| -> f64 {
        let diff: f64 = x.iter().zip(x_t).map(|(a, b)| (a - b) * (a - b)).sum();
        0.5 * diff + eta * loss.eval(x).expect("dimension checked")
    };
    let gradient = |x: &[f64]| -> Vec<f64> {
        let g = loss.subgradient(x).expect("dimension checked");
        x.iter().zip(x_t).zip(&g).map(|((a, b), gi)| a - b + eta * gi).collect()
    };

    // line x_t + s u
    let at = |s: f64| axpy(x_t, s, &u);
    let phi = |s: f64| objective(&at(s));
    let dphi = |s: f64| dot(&gradient(&at(s)), &u);
    let f0 = phi(0.0);
    let reach = |sign: f64| -> Result<f64> {
        let mut h = 1.0;
        for _ in 0..MAX_DOUBLINGS {
            if phi(sign * h) >= f0 {
                return Ok(h);
            }
            h *= 2.0;
        }
        Err(OracleError::Unsupported("line search did not bracket a minimizer".into()))
    };
    let (lo, hi) = (-reach(-1.0)?, reach(1.0)?);
    let s = minimize_1d(&phi, &dphi, lo, hi, tol.min(1e-9));
    let x_line = at(s);
    check_reduction(loss, &u, &x_line)?;

    let Some(r) = setup.radius() else {
        return Ok(x_line);
    };
    if norm(&x_line) <= r {
        return Ok(x_line);
    }

    // boundary circle of span{u, x_t}
    let w = axpy(x_t, -dot(x_t, &u), &u);
    let nw = norm(&w);
    if nw == 0.0 {
        let plus: Vec<f64> = u.iter().map(|v| r * v).collect();
        let minus: Vec<f64> = u.iter().map(|v| -r * v).collect();
        return Ok(if objective(&plus) <= objective(&minus) { plus } else { minus });
    }
    let e2: Vec<f64> = w.iter().map(|v| v / nw).collect();
    let point = |th: f64| -> Vec<f64> {
        let (sn, cs) = th.sin_cos();
        u.iter().zip(&e2).map(|(a, b)| r * (cs * a + sn * b)).collect()
    };
    let f_th = |th: f64| objective(&point(th));
    let df_th = |th: f64| {
        let (sn, cs) = th.sin_cos();
        let tangent: Vec<f64> = u.iter().zip(&e2).map(|(a, b)| r * (-sn * a + cs * b)).collect();
        dot(&gradient(&point(th)), &tangent)
    };
    let step = std::f64::consts::TAU / POLAR_POINTS as f64;
    let best = (0..POLAR_POINTS)
        .map(|k| k as f64 * step)
        .min_by(|&a, &b| f_th(a).total_cmp(&f_th(b)))
        .expect("non-empty grid");
    let th = minimize_1d(&f_th, &df_th, best - step, best + step, (tol / r).min(1e-9));
    Ok(point(th))
}

/// Grid estimate of the temporal variability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VtEstimate {
    /// Sum of grid maxima; never exceeds the true value.
    pub value: f64,
    /// Grid spacing.
    pub spacing: f64,
    /// Bound on `true - value` from the Lipschitz constants of the pairwise
    /// differences; infinite if one is unavailable.
    pub error_bound: f64,
}

/// Maximizes each consecutive difference `l_t - l_{t-1}` over a uniform
/// grid of the ball (plus, in two dimensions, as many points on its
/// boundary circle).
pub fn vt_grid_oracle(losses: &[Loss], setup: &MirrorSetup, points_per_dim: usize) -> Result<VtEstimate> {
    let r = setup
        .radius()
        .ok_or_else(|| OracleError::Unsupported("grid search needs a bounded domain".into()))?;
    if points_per_dim < 2 {
        return Err(OracleError::InvalidInput("need at least two grid points per dimension".into()));
    }
    let Some(first) = losses.first() else {
        return Ok(VtEstimate { value: 0.0, spacing: 0.0, error_bound: 0.0 });
    };
    let d = first.dim();
    if d > 2 {
        return Err(OracleError::Unsupported(format!("grid search in dimension {d}")));
    }
    if let Some(bad) = losses.iter().find(|l| l.dim() != d) {
        return Err(OracleError::InvalidInput(format!("mixed dimensions {d} and {}", bad.dim())));
    }

    let h = 2.0 * r / (points_per_dim - 1) as f64;
    let coord = |i: usize| (-r + i as f64 * h).clamp(-r, r);
    let mut grid: Vec<Vec<f64>> = Vec::new();
    if d == 1 {
        grid.extend((0..points_per_dim).map(|i| vec![coord(i)]));
    } else {
        for i in 0..points_per_dim {
            for j in 0..points_per_dim {
                let p = vec![coord(i), coord(j)];
                if norm(&p) <= r {
                    grid.push(p);
                }
            }
        }
        let m = 4 * points_per_dim;
        grid.extend((0..m).map(|k| {
            let (s, c) = (std::f64::consts::TAU * k as f64 / m as f64).sin_cos();
            vec![r * c, r * s]
        }));
    }

    let mut value = 0.0;
    let mut error_bound = 0.0;
    for pair in losses.windows(2) {
        let (prev, curr) = (&pair[0], &pair[1]);
        let mut best = f64::NEG_INFINITY;
        for p in &grid {
            best = best.max(curr.eval(p)? - prev.eval(p)?);
        }
        value += best;
        if curr != prev {
            error_bound += match (curr.lipschitz_on(setup), prev.lipschitz_on(setup)) {
                (Some(a), Some(b)) => (a + b) * h * (d as f64).sqrt(),
                _ => f64::INFINITY,
            };
        }
    }
    Ok(VtEstimate { value, spacing: h, error_bound })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceCheck {
    pub holds: bool,
    pub delta_final: f64,
    pub bound: f64,
}

/// Runs the extremal recurrence `D_1 = 0`,
/// `D_{t+1} = D_t + min(b a_t, c a_t^2 / (2 D_t))` (second arm dropped when
/// `D_t = 0`) and checks `D_{T+1} <= sqrt((b^2 + c) sum a_t^2)`.
pub fn adahedge_recurrence_check(a: &[f64], b: f64, c: f64) -> RecurrenceCheck {
    let mut delta = 0.0f64;
    let mut sum_sq = 0.0;
    for &at in a {
        let step = if delta == 0.0 { b * at } else { (b * at).min(c * at * at / (2.0 * delta)) };
        delta += step;
        sum_sq += at * at;
    }
    let bound = ((b * b + c) * sum_sq).sqrt();
    RecurrenceCheck { holds: delta <= bound * (1.0 + 1e-12), delta_final: delta, bound }
}

/// Largest coordinate gap between a central-difference gradient with step
/// `h` and [`Loss::subgradient`] at `x`.
pub fn finite_diff_subgradient_check(loss: &Loss, x: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(OracleError::InvalidInput(format!("step must be positive, got {h}")));
    }
    let g = loss.subgradient(x)?;
    let mut worst = 0.0f64;
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = loss.eval(&probe)?;
        probe[i] = x[i] - h;
        let down = loss.eval(&probe)?;
        probe[i] = x[i];
        worst = worst.max(((up - down) / (2.0 * h) - g[i]).abs());
    }
    Ok(worst)
}
