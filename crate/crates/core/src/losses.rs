//! Convex losses for online learning.
//!
//! Every variant is finite and convex on all of `R^d`. Hinge, absolute and
//! square losses are linear-prediction losses `phi(<z, x>)`; the quadratic
//! `Quad1D` is one-dimensional and `Linear` is `s * <g, x>`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::MirrorSetup;
use crate::linalg::{self, dot, norm};

/// Points per dimension of the fallback grid used by
/// [`pairwise_variability_term`] for two-dimensional pairs whose difference
/// does not reduce to a single direction.
pub const VARIABILITY_GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Loss {
    /// `max(1 - y <z, x>, 0)`, `y` in {-1, +1}
    Hinge { z: Vec<f64>, y: f64 },
    /// `|<z, x> - y|`
    Absolute { z: Vec<f64>, y: f64 },
    /// `0.5 (<z, x> - y)^2`
    Square { z: Vec<f64>, y: f64 },
    /// `0.25 (x - y)^2` on the real line
    Quad1D { y: f64 },
    /// `s <g, x>`, `s >= 0`
    Linear { g: Vec<f64>, s: f64 },
}

fn check_features(z: &[f64]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::InvalidLoss("empty feature vector".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidLoss("non-finite feature".into()));
    }
    if z.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidLoss("feature vector is zero".into()));
    }
    Ok(())
}

fn check_target(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLoss(format!("non-finite target {y}")))
    }
}

impl Loss {
    pub fn hinge(z: Vec<f64>, y: f64) -> Result<Self> {
        check_features(&z)?;
        if y != 1.0 && y != -1.0 {
            return Err(Error::InvalidLoss(format!("hinge label must be +1 or -1, got {y}")));
        }
        Ok(Loss::Hinge { z, y })
    }

    pub fn absolute(z: Vec<f64>, y: f64) -> Result<Self> {
        check_features(&z)?;
        check_target(y)?;
        Ok(Loss::Absolute { z, y })
    }

    pub fn square(z: Vec<f64>, y: f64) -> Result<Self> {
        check_features(&z)?;
        check_target(y)?;
        Ok(Loss::Square { z, y })
    }

    pub fn quad1d(y: f64) -> Result<Self> {
        check_target(y)?;
        Ok(Loss::Quad1D { y })
    }

    pub fn linear(g: Vec<f64>, s: f64) -> Result<Self> {
        if g.is_empty() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLoss("linear direction must be finite and non-empty".into()));
        }
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidLoss(format!("linear scale must be >= 0, got {s}")));
        }
        Ok(Loss::Linear { g, s })
    }

    pub fn dim(&self) -> usize {
        match self {
            Loss::Hinge { z, .. } | Loss::Absolute { z, .. } | Loss::Square { z, .. } => z.len(),
            Loss::Quad1D { .. } => 1,
            Loss::Linear { g, .. } => g.len(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Loss::Hinge { .. } => "hinge",
            Loss::Absolute { .. } => "absolute",
            Loss::Square { .. } => "square",
            Loss::Quad1D { .. } => "quad1d",
            Loss::Linear { .. } => "linear",
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            Loss::Hinge { z, y } => (1.0 - y * dot(z, x)).max(0.0),
            Loss::Absolute { z, y } => (dot(z, x) - y).abs(),
            Loss::Square { z, y } => {
                let r = dot(z, x) - y;
                0.5 * r * r
            }
            Loss::Quad1D { y } => {
                let r = x[0] - y;
                0.25 * r * r
            }
            Loss::Linear { g, s } => s * dot(g, x),
        }
    }

    /// Minimum-norm element of the subdifferential at `x`. At the hinge
    /// margin and at the absolute-loss kink this is the zero vector.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            Loss::Hinge { z, y } => {
                if y * dot(z, x) < 1.0 {
                    linalg::scale(z, -y)
                } else {
                    vec![0.0; z.len()]
                }
            }
            Loss::Absolute { z, y } => {
                let r = dot(z, x) - y;
                if r > 0.0 {
                    z.clone()
                } else if r < 0.0 {
                    linalg::scale(z, -1.0)
                } else {
                    vec![0.0; z.len()]
                }
            }
            Loss::Square { z, y } => linalg::scale(z, dot(z, x) - y),
            Loss::Quad1D { y } => vec![0.5 * (x[0] - y)],
            Loss::Linear { g, s } => linalg::scale(g, *s),
        })
    }

    /// Global Lipschitz constant, when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Loss::Hinge { z, .. } | Loss::Absolute { z, .. } => Some(norm(z)),
            Loss::Linear { g, s } => Some(s * norm(g)),
            Loss::Square { .. } | Loss::Quad1D { .. } => None,
        }
    }

    /// Lipschitz constant over the feasible set of `setup`.
    pub fn lipschitz_on(&self, setup: &MirrorSetup) -> Option<f64> {
        if let Some(l) = self.lipschitz() {
            return Some(l);
        }
        let r = setup.radius()?;
        match self {
            Loss::Square { z, y } => {
                let nz = norm(z);
                Some(nz * (nz * r + y.abs()))
            }
            Loss::Quad1D { y } => Some(0.5 * (r + y.abs())),
            _ => None,
        }
    }

    /// Direction `w` such that the loss depends on `x` only through
    /// `<w, x>`. `None` for the zero loss, which depends on no direction.
    fn direction(&self) -> Option<&[f64]> {
        match self {
            Loss::Hinge { z, .. } | Loss::Absolute { z, .. } | Loss::Square { z, .. } => Some(z),
            Loss::Quad1D { .. } => None,
            Loss::Linear { g, s } => {
                if *s == 0.0 || g.iter().all(|&v| v == 0.0) {
                    None
                } else {
                    Some(g)
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Loss::Linear { .. }) && self.direction().is_none()
    }

    /// Restriction `p -> loss(p * u)` for a unit vector `u`, valid when the
    /// loss depends on `x` only through `<u, x>`.
    fn along(&self, u: &[f64]) -> Scalar {
        match self {
            Loss::Hinge { z, y } => Scalar::Hinge { a: dot(z, u), y: *y },
            Loss::Absolute { z, y } => Scalar::Absolute { a: dot(z, u), y: *y },
            Loss::Square { z, y } => Scalar::Square { a: dot(z, u), y: *y },
            Loss::Quad1D { y } => Scalar::Quad { y: *y },
            Loss::Linear { g, s } => Scalar::Linear { a: s * dot(g, u) },
        }
    }
}

/// One-dimensional view of a loss, `p -> loss(p * u)`.
#[derive(Debug, Clone, Copy)]
enum Scalar {
    Hinge { a: f64, y: f64 },
    Absolute { a: f64, y: f64 },
    Square { a: f64, y: f64 },
    Quad { y: f64 },
    Linear { a: f64 },
}

impl Scalar {
    fn eval(self, p: f64) -> f64 {
        match self {
            Scalar::Hinge { a, y } => (1.0 - y * a * p).max(0.0),
            Scalar::Absolute { a, y } => (a * p - y).abs(),
            Scalar::Square { a, y } => 0.5 * (a * p - y) * (a * p - y),
            Scalar::Quad { y } => 0.25 * (p - y) * (p - y),
            Scalar::Linear { a } => a * p,
        }
    }

    fn kink(self) -> Option<f64> {
        match self {
            Scalar::Hinge { a, y } if a != 0.0 => Some(1.0 / (y * a)),
            Scalar::Absolute { a, y } if a != 0.0 => Some(y / a),
            _ => None,
        }
    }

    /// Half the second derivative away from the kink.
    fn curvature(self) -> f64 {
        match self {
            Scalar::Square { a, .. } => 0.5 * a * a,
            Scalar::Quad { .. } => 0.25,
            _ => 0.0,
        }
    }

    /// Derivative at a point where the function is differentiable.
    fn slope(self, p: f64) -> f64 {
        match self {
            Scalar::Hinge { a, y } => {
                if y * a * p < 1.0 {
                    -y * a
                } else {
                    0.0
                }
            }
            Scalar::Absolute { a, y } => (a * p - y).signum() * a,
            Scalar::Square { a, y } => a * (a * p - y),
            Scalar::Quad { y } => 0.5 * (p - y),
            Scalar::Linear { a } => a,
        }
    }
}

/// Exact `sup_{p in [lo, hi]} curr(p) - prev(p)` for piecewise quadratics
/// with at most one kink each. `lo`/`hi` may be infinite; an unbounded
/// supremum is reported as `None`.
fn sup_difference_1d(curr: Scalar, prev: Scalar, lo: f64, hi: f64) -> Option<f64> {
    let f = |p: f64| curr.eval(p) - prev.eval(p);
    let mut breaks: Vec<f64> = [curr.kink(), prev.kink()]
        .into_iter()
        .flatten()
        .filter(|k| k.is_finite() && *k > lo && *k < hi)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut knots = Vec::with_capacity(breaks.len() + 2);
    knots.push(lo);
    knots.extend(breaks);
    knots.push(hi);

    let quad = curr.curvature() - prev.curvature();
    let mut best = f64::NEG_INFINITY;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        // interior reference point of the piece
        let m = match (a.is_finite(), b.is_finite()) {
            (true, true) => 0.5 * (a + b),
            (true, false) => a + 1.0 + a.abs(),
            (false, true) => b - 1.0 - b.abs(),
            (false, false) => 0.0,
        };
        // f(p) = quad p^2 + lin p + c on this piece
        let lin = curr.slope(m) - prev.slope(m) - 2.0 * quad * m;
        if a.is_infinite() && (quad > 0.0 || (quad == 0.0 && lin < 0.0)) {
            return None;
        }
        if b.is_infinite() && (quad > 0.0 || (quad == 0.0 && lin > 0.0)) {
            return None;
        }
        for p in [a, b] {
            if p.is_finite() {
                best = best.max(f(p));
            }
        }
        if quad < 0.0 {
            let v = -lin / (2.0 * quad);
            if v > a && v < b {
                best = best.max(f(v));
            }
        } else if quad == 0.0 && lin == 0.0 && a.is_infinite() && b.is_infinite() {
            best = best.max(f(0.0));
        }
    }
    Some(best)
}

/// `max_{x in V} curr(x) - prev(x)`, one term of the temporal variability.
///
/// Exact whenever the pair depends on `x` through a single direction (always
/// the case in one dimension, for identical losses, for linear pairs and for
/// linear-prediction pairs sharing a feature direction). Other pairs in two
/// dimensions fall back to a grid of [`VARIABILITY_GRID_POINTS`] points per
/// axis followed by a local pattern search; higher dimensions are rejected.
pub fn pairwise_variability_term(curr: &Loss, prev: &Loss, setup: &MirrorSetup) -> Result<f64> {
    check_dim(prev.dim(), curr.dim())?;
    if curr == prev {
        return Ok(0.0);
    }
    let d = curr.dim();

    // Linear pairs: the difference is <s1 g1 - s2 g2, x>.
    if let (Loss::Linear { g: g1, s: s1 }, Loss::Linear { g: g2, s: s2 }) = (curr, prev) {
        let w: Vec<f64> = g1.iter().zip(g2).map(|(a, b)| s1 * a - s2 * b).collect();
        let nw = norm(&w);
        return match setup.radius() {
            Some(r) => Ok(r * nw),
            None if nw == 0.0 => Ok(0.0),
            None => Err(Error::VariabilityUndefined(
                "linear difference is unbounded on an unconstrained domain".into(),
            )),
        };
    }

    let (lo, hi) = match setup.radius() {
        Some(r) => (-r, r),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let undefined = || {
        Error::VariabilityUndefined(format!(
            "{} - {} is unbounded above on the domain",
            curr.family(),
            prev.family()
        ))
    };

    if d == 1 {
        return sup_difference_1d(curr.along(&[1.0]), prev.along(&[1.0]), lo, hi).ok_or_else(undefined);
    }

    if let Some(u) = shared_direction(curr, prev) {
        return sup_difference_1d(curr.along(&u), prev.along(&u), lo, hi).ok_or_else(undefined);
    }

    if d == 2 {
        let r = setup.radius().ok_or_else(|| {
            Error::VariabilityUndefined(
                "two-dimensional pairs without a shared direction need a bounded domain".into(),
            )
        })?;
        return Ok(grid_max_2d(
            |x| curr.eval_unchecked(x) - prev.eval_unchecked(x),
            r,
            VARIABILITY_GRID_POINTS,
        ));
    }
    Err(Error::VariabilityUnsupported(d))
}

/// Unit vector `u` such that both losses are functions of `<u, x>`.
fn shared_direction(a: &Loss, b: &Loss) -> Option<Vec<f64>> {
    let unit = |w: &[f64]| linalg::scale(w, 1.0 / norm(w));
    match (a.direction(), b.direction()) {
        (Some(wa), Some(wb)) => {
            let na = norm(wa);
            let nb = norm(wb);
            let c = dot(wa, wb);
            // parallel iff |<wa, wb>| = ||wa|| ||wb||
            if (c.abs() - na * nb).abs() <= 1e-14 * na * nb {
                Some(unit(wa))
            } else {
                None
            }
        }
        (Some(w), None) if b.is_zero() => Some(unit(w)),
        (None, Some(w)) if a.is_zero() => Some(unit(w)),
        (None, None) if a.is_zero() && b.is_zero() => {
            let mut e = vec![0.0; a.dim()];
            e[0] = 1.0;
            Some(e)
        }
        _ => None,
    }
}

fn grid_max_2d<F: Fn(&[f64]) -> f64>(f: F, r: f64, points: usize) -> f64 {
    let n = points.max(2);
    let step = 2.0 * r / (n - 1) as f64;
    let mut best = f64::NEG_INFINITY;
    let mut arg = [0.0, 0.0];
    for i in 0..n {
        let a = -r + i as f64 * step;
        for j in 0..n {
            let b = -r + j as f64 * step;
            if a * a + b * b > r * r {
                continue;
            }
            let v = f(&[a, b]);
            if v > best {
                best = v;
                arg = [a, b];
            }
        }
    }
    // boundary circle, which the square grid only approximates
    let m = 8 * n;
    for k in 0..m {
        let th = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        let p = [r * th.cos(), r * th.sin()];
        let v = f(&p);
        if v > best {
            best = v;
            arg = p;
        }
    }
    // pattern search polish, staying feasible
    let mut h = step;
    while h > 1e-12 * r {
        let mut moved = false;
        for (da, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let mut p = [arg[0] + da, arg[1] + db];
            let n = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if n > r {
                p = [p[0] * r / n, p[1] * r / n];
            }
            let v = f(&p);
            if v > best {
                best = v;
                arg = p;
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    best
}
