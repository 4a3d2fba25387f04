//! Implicit (proximal) updates
//! `x_next = argmin_{x in V} B(x, x_t) + eta * loss(x)`.
//!
//! On the whole space every loss family has a closed form. On a ball of
//! radius `r` the optimality condition reads
//! `(1 + alpha) x_next = x_t - eta g'` with `alpha >= 0` the multiplier of the
//! constraint, so `x_next` is the unconstrained update evaluated at
//! `x_t / (1 + alpha)` with step `eta / (1 + alpha)`. The multiplier is the
//! smallest `alpha` that brings the point back inside the ball; the norm of
//! the substituted update is non-increasing in `alpha`, so it is found by
//! bracketing and bisection.
//!
//! An infinite `eta` is the limit of the update: the minimizer of the loss
//! over `V` closest to `x_t`.

use crate::error::{check_dim, Error, Result};
use crate::geometry::MirrorSetup;
use crate::linalg::{self, dot, norm, norm_sq};
use crate::losses::Loss;

/// Tolerance on `||x||` for accepting the `alpha = 0` point as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-12;
/// Relative tolerance on `| ||x_next(alpha)|| - r |`.
pub const ALPHA_REL_TOL: f64 = 1e-10;
/// The bracket `[0, alpha_max]` is grown by doubling up to this value.
pub const ALPHA_MAX: f64 = (1u64 << 60) as f64;
const MAX_BISECTIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub x_next: Vec<f64>,
    /// Subgradient of the loss at `x_next` satisfying the optimality
    /// condition `(1 + alpha) x_next = x_t - eta g'`. For an infinite step
    /// this is the minimum-norm subgradient at `x_next`.
    pub g_prime: Vec<f64>,
    /// Ball multiplier; zero when the unconstrained update is feasible.
    pub alpha: f64,
    /// Bisection steps used by the multiplier search.
    pub iterations: usize,
}

/// Unconstrained update and its `g'` for a finite or infinite step.
fn closed_form(loss: &Loss, x: &[f64], eta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let inf = eta.is_infinite();
    Ok(match loss {
        Loss::Hinge { z, y } => {
            let zz = norm_sq(z);
            let margin = (1.0 - y * dot(z, x)).max(0.0);
            let tau = eta.min(margin / zz);
            let x_next = linalg::axpy(x, tau * y, z);
            let g = if inf || tau == 0.0 {
                vec![0.0; z.len()]
            } else {
                linalg::scale(z, -(tau / eta) * y)
            };
            (x_next, g)
        }
        Loss::Absolute { z, y } => {
            let zz = norm_sq(z);
            let r = dot(z, x) - y;
            let tau = eta.min(r.abs() / zz);
            let sign = if r > 0.0 { 1.0 } else if r < 0.0 { -1.0 } else { 0.0 };
            let x_next = linalg::axpy(x, -tau * sign, z);
            let g = if inf || tau == 0.0 {
                vec![0.0; z.len()]
            } else {
                linalg::scale(z, (tau / eta) * sign)
            };
            (x_next, g)
        }
        Loss::Square { z, y } => {
            let zz = norm_sq(z);
            let r = dot(z, x) - y;
            if inf {
                // projection onto the hyperplane <z, x> = y
                (linalg::axpy(x, -r / zz, z), vec![0.0; z.len()])
            } else {
                let denom = 1.0 + eta * zz;
                // residual after the step is r / denom
                (linalg::axpy(x, -eta * r / denom, z), linalg::scale(z, r / denom))
            }
        }
        Loss::Quad1D { y } => {
            if inf {
                (vec![*y], vec![0.0])
            } else {
                let x_next = x[0] - eta / (2.0 + eta) * (x[0] - y);
                (vec![x_next], vec![(x[0] - y) / (2.0 + eta)])
            }
        }
        Loss::Linear { g, s } => {
            if inf {
                if *s == 0.0 || g.iter().all(|&v| v == 0.0) {
                    (x.to_vec(), vec![0.0; g.len()])
                } else {
                    return Err(Error::ProxUnbounded(
                        "linear loss with infinite step has no minimizer".into(),
                    ));
                }
            } else {
                (linalg::axpy(x, -eta * s, g), linalg::scale(g, *s))
            }
        }
    })
}

/// Exact minimizer of `B(x, x_t) + eta * loss(x)` over `V`.
///
/// `eta` must be positive; `f64::INFINITY` selects the minimizer of the loss
/// over `V` closest to `x_t`.
pub fn implicit_step(loss: &Loss, x_t: &[f64], eta: f64, setup: &MirrorSetup) -> Result<ProxResult> {
    check_dim(loss.dim(), x_t.len())?;
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::InvalidConfig(format!("step size must be positive, got {eta}")));
    }
    let Some(radius) = setup.radius() else {
        let (x_next, g_prime) = closed_form(loss, x_t, eta)?;
        return Ok(ProxResult { x_next, g_prime, alpha: 0.0, iterations: 0 });
    };

    if eta.is_infinite() {
        return minimizer_in_ball(loss, x_t, radius);
    }

    let (x0, g0) = closed_form(loss, x_t, eta)?;
    if norm(&x0) <= radius + FEASIBILITY_TOL {
        return Ok(ProxResult { x_next: x0, g_prime: g0, alpha: 0.0, iterations: 0 });
    }
    let map = |alpha: f64| closed_form(loss, &linalg::scale(x_t, 1.0 / (1.0 + alpha)), eta / (1.0 + alpha));
    solve_ball_alpha(map, radius)
}

/// Smallest `alpha > 0` with `||x_next(alpha)|| <= radius`, where `map`
/// evaluates the substituted closed form. Requires `||x_next(0)|| > radius`.
///
/// Returns the point on the feasible side of the bracket, so `x_next` is
/// always inside the ball and within `ALPHA_REL_TOL * radius` of its
/// boundary.
pub fn solve_ball_alpha<F>(map: F, radius: f64) -> Result<ProxResult>
where
    F: Fn(f64) -> Result<(Vec<f64>, Vec<f64>)>,
{
    let norm_at = |alpha: f64| -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let (x, g) = map(alpha)?;
        Ok((norm(&x), x, g))
    };

    let (n0, _, _) = norm_at(0.0)?;
    let mut lo = 0.0;
    let mut prev_norm = n0;
    let mut hi = 1.0;
    let (mut n_hi, mut x_hi, mut g_hi) = norm_at(hi)?;
    // grow the bracket, checking the norm never increases along the way
    while n_hi > radius {
        if n_hi > prev_norm * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::AlphaSearch { iterations: 0, residual: n_hi - radius });
        }
        if hi >= ALPHA_MAX {
            return Err(Error::BracketNotFound { alpha_max: ALPHA_MAX });
        }
        lo = hi;
        prev_norm = n_hi;
        hi *= 2.0;
        (n_hi, x_hi, g_hi) = norm_at(hi)?;
    }

    // Bisect until the bracket is exhausted in floating point. The norm
    // gap then sits far inside `ALPHA_REL_TOL`, which keeps the optimality
    // residual small even for very large multipliers.
    let tol = ALPHA_REL_TOL * radius;
    let mut iterations = 0;
    while n_hi < radius && hi - lo > 4.0 * f64::EPSILON * hi {
        if iterations >= MAX_BISECTIONS {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // bracket exhausted in floating point
            break;
        }
        let (n_mid, x_mid, g_mid) = norm_at(mid)?;
        if n_mid > radius {
            lo = mid;
        } else {
            hi = mid;
            n_hi = n_mid;
            x_hi = x_mid;
            g_hi = g_mid;
        }
        iterations += 1;
    }
    if radius - n_hi > tol {
        return Err(Error::AlphaSearch { iterations, residual: radius - n_hi });
    }
    Ok(ProxResult { x_next: x_hi, g_prime: g_hi, alpha: hi, iterations })
}

/// Minimizer of the loss over the ball closest to `x_t`.
fn minimizer_in_ball(loss: &Loss, x_t: &[f64], radius: f64) -> Result<ProxResult> {
    let zero_g = |x: &[f64]| loss.subgradient(x);
    let boundary = |w: &[f64], sign: f64| linalg::scale(w, sign * radius / norm(w));
    let finish = |x_next: Vec<f64>| -> Result<ProxResult> {
        let g_prime = zero_g(&x_next)?;
        Ok(ProxResult { x_next, g_prime, alpha: 0.0, iterations: 0 })
    };

    let reach = match loss {
        Loss::Linear { g, s } => {
            if *s == 0.0 || g.iter().all(|&v| v == 0.0) {
                return finish(x_t.to_vec());
            }
            return finish(boundary(g, -1.0));
        }
        Loss::Quad1D { y } => return finish(vec![y.clamp(-radius, radius)]),
        // distance from the origin to the zero-loss set
        Loss::Hinge { z, .. } => 1.0 / norm(z),
        Loss::Absolute { z, y } | Loss::Square { z, y } => y.abs() / norm(z),
    };

    if reach > radius {
        // zero-loss set misses the ball: the minimizer is the boundary point
        // pushing <z, x> as far as possible towards the target
        let sign = match loss {
            Loss::Hinge { y, .. } => *y,
            Loss::Absolute { y, .. } | Loss::Square { y, .. } => y.signum(),
            _ => unreachable!(),
        };
        let (Loss::Hinge { z, .. } | Loss::Absolute { z, .. } | Loss::Square { z, .. }) = loss else {
            unreachable!()
        };
        return finish(boundary(z, sign));
    }

    let (x0, _) = closed_form(loss, x_t, f64::INFINITY)?;
    if norm(&x0) <= radius + FEASIBILITY_TOL {
        return finish(x0);
    }
    let map = |alpha: f64| closed_form(loss, &linalg::scale(x_t, 1.0 / (1.0 + alpha)), f64::INFINITY);
    let mut res = solve_ball_alpha(map, radius)?;
    res.g_prime = zero_g(&res.x_next)?;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(r: f64) -> MirrorSetup {
        MirrorSetup::ball(r).unwrap()
    }

    #[test]
    fn hinge_capped_step() {
        let l = Loss::hinge(vec![1.0, 0.0], 1.0).unwrap();
        let r = implicit_step(&l, &[0.0, 0.0], 10.0, &MirrorSetup::unconstrained()).unwrap();
        assert_eq!(r.x_next, vec![1.0, 0.0]);
        assert_eq!(r.alpha, 0.0);
        // stationarity: x_next = x_t - eta g'
        assert!((r.x_next[0] - (0.0 - 10.0 * r.g_prime[0])).abs() < 1e-15);
    }

    #[test]
    fn zero_loss_is_identity() {
        let l = Loss::hinge(vec![1.0, 0.0], 1.0).unwrap();
        for eta in [1e-3, 1.0, 1e3, f64::INFINITY] {
            let r = implicit_step(&l, &[2.0, 0.0], eta, &MirrorSetup::unconstrained()).unwrap();
            assert_eq!(r.x_next, vec![2.0, 0.0]);
        }
    }

    #[test]
    fn square_on_ball_hits_multiplier_eight() {
        let l = Loss::square(vec![1.0], 10.0).unwrap();
        let r = implicit_step(&l, &[0.0], 1.0, &ball(1.0)).unwrap();
        // 10 / (alpha + 2) = 1
        assert!((r.x_next[0] - 1.0).abs() <= 1e-10);
        assert!(r.x_next[0] <= 1.0);
        assert!((r.alpha - 8.0).abs() < 1e-8, "{}", r.alpha);
        // KKT: (1 + alpha) x_next = x_t - eta g', with g' = x_next - 10
        let lhs = (1.0 + r.alpha) * r.x_next[0];
        let rhs = 0.0 - 1.0 * (r.x_next[0] - 10.0);
        assert!((lhs - rhs).abs() < 1e-7);
        assert!((r.g_prime[0] - (r.x_next[0] - 10.0)).abs() < 1e-12);
    }

    #[test]
    fn quad1d_closed_form() {
        let l = Loss::quad1d(100.0).unwrap();
        let r = implicit_step(&l, &[0.0], 1.0, &MirrorSetup::unconstrained()).unwrap();
        assert!((r.x_next[0] - 100.0 / 3.0).abs() < 1e-12);
        // feasible inside the r = 75 ball: no multiplier
        let r = implicit_step(&l, &[0.0], 1.0, &ball(75.0)).unwrap();
        assert_eq!(r.alpha, 0.0);
        assert!((r.x_next[0] - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_on_ball() {
        let l = Loss::linear(vec![1.0, 0.0], 1.0).unwrap();
        let r = implicit_step(&l, &[0.0, 0.0], 3.0, &ball(1.0)).unwrap();
        assert!((r.alpha - 2.0).abs() < 1e-8);
        assert!((r.x_next[0] + 1.0).abs() <= 1e-10);
        assert_eq!(r.x_next[1], 0.0);
    }

    #[test]
    fn solve_alpha_direct() {
        // Square 1-D: x(alpha) = 10 / (alpha + 2)
        let map = |a: f64| Ok((vec![10.0 / (a + 2.0)], vec![0.0]));
        let r = solve_ball_alpha(map, 1.0).unwrap();
        assert!((r.alpha - 8.0).abs() < 1e-8);
        assert!(r.x_next[0] <= 1.0 && 1.0 - r.x_next[0] <= 1e-10);
    }

    #[test]
    fn solve_alpha_bracket_failure() {
        let map = |_a: f64| Ok((vec![5.0], vec![0.0]));
        assert!(matches!(
            solve_ball_alpha(map, 1.0),
            Err(Error::BracketNotFound { .. })
        ));
    }

    #[test]
    fn infinite_step_minimizers() {
        let un = MirrorSetup::unconstrained();
        let q = Loss::quad1d(100.0).unwrap();
        assert_eq!(implicit_step(&q, &[0.0], f64::INFINITY, &un).unwrap().x_next, vec![100.0]);
        assert_eq!(implicit_step(&q, &[0.0], f64::INFINITY, &ball(75.0)).unwrap().x_next, vec![75.0]);

        let h = Loss::hinge(vec![1.0, 0.0], 1.0).unwrap();
        let r = implicit_step(&h, &[0.0, 0.5], f64::INFINITY, &un).unwrap();
        assert_eq!(r.x_next, vec![1.0, 0.5]);
        // zero-loss halfspace x0 >= 1 meets the unit ball only at (1, 0)
        let r = implicit_step(&h, &[0.0, 0.5], f64::INFINITY, &ball(1.0)).unwrap();
        assert!((r.x_next[0] - 1.0).abs() < 1e-9 && r.x_next[1].abs() < 1e-4);
        // halfspace out of reach: push to the boundary
        let h2 = Loss::hinge(vec![0.5, 0.0], -1.0).unwrap();
        let r = implicit_step(&h2, &[0.0, 0.0], f64::INFINITY, &ball(1.0)).unwrap();
        assert_eq!(r.x_next, vec![-1.0, 0.0]);

        let lin = Loss::linear(vec![1.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            implicit_step(&lin, &[0.0, 0.0], f64::INFINITY, &un),
            Err(Error::ProxUnbounded(_))
        ));
        assert_eq!(
            implicit_step(&lin, &[0.0, 0.0], f64::INFINITY, &ball(2.0)).unwrap().x_next,
            vec![-2.0, 0.0]
        );
    }

    #[test]
    fn infinite_step_square_nearest_on_hyperplane() {
        // hyperplane x0 + x1 = 1 intersected with the ball of radius 1,
        // nearest point to (3, -3) is on the circle
        let s = Loss::square(vec![1.0, 1.0], 1.0).unwrap();
        let r = implicit_step(&s, &[3.0, -3.0], f64::INFINITY, &ball(1.0)).unwrap();
        assert!((r.x_next[0] + r.x_next[1] - 1.0).abs() < 1e-9);
        assert!(norm(&r.x_next) <= 1.0);
        assert!((norm(&r.x_next) - 1.0).abs() < 1e-9);
        assert!(r.x_next[0] > r.x_next[1]);
    }

    #[test]
    fn rejects_bad_step() {
        let q = Loss::quad1d(1.0).unwrap();
        let un = MirrorSetup::unconstrained();
        assert!(implicit_step(&q, &[0.0], 0.0, &un).is_err());
        assert!(implicit_step(&q, &[0.0], -1.0, &un).is_err());
        assert!(implicit_step(&q, &[0.0], f64::NAN, &un).is_err());
        assert!(implicit_step(&q, &[0.0, 1.0], 1.0, &un).is_err());
    }
}
