//! Mirror maps, Bregman divergences and feasible domains.
//!
//! Only the Euclidean mirror map `psi(x) = 0.5 * ||x||^2` is implemented. It
//! is 1-strongly convex w.r.t. the Euclidean norm, which is self-dual, so
//! every `||.||` and `||.||_*` in the bounds is the plain 2-norm.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MirrorMap {
    /// `psi(x) = 0.5 * ||x||_2^2`
    Euclidean,
}

/// Feasible set `V`. Balls are centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Unconstrained,
    Ball { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorSetup {
    psi: MirrorMap,
    domain: Domain,
    bregman_diameter_sq: f64,
}

impl MirrorSetup {
    pub fn unconstrained() -> Self {
        MirrorSetup {
            psi: MirrorMap::Euclidean,
            domain: Domain::Unconstrained,
            bregman_diameter_sq: f64::INFINITY,
        }
    }

    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(MirrorSetup {
            psi: MirrorMap::Euclidean,
            domain: Domain::Ball { radius },
            // antipodal points: 0.5 * (2r)^2
            bregman_diameter_sq: 2.0 * radius * radius,
        })
    }

    /// `Some(r)` builds a ball of radius `r`, `None` the whole space.
    pub fn from_radius(radius: Option<f64>) -> Result<Self> {
        match radius {
            Some(r) => Self::ball(r),
            None => Ok(Self::unconstrained()),
        }
    }

    pub fn mirror_map(&self) -> MirrorMap {
        self.psi
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn radius(&self) -> Option<f64> {
        match self.domain {
            Domain::Ball { radius } => Some(radius),
            Domain::Unconstrained => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.radius().is_some()
    }

    /// Euclidean diameter of the ball (`2r`), the quantity called `D` in the
    /// lower-bound construction and the synthetic experiment.
    pub fn ball_diameter(&self) -> Option<f64> {
        self.radius().map(|r| 2.0 * r)
    }

    /// `max_{u,x in V} B(u, x)`: `2r^2` for a ball, `+inf` otherwise.
    pub fn bregman_diameter_sq(&self) -> f64 {
        self.bregman_diameter_sq
    }

    /// Square root of [`Self::bregman_diameter_sq`], the theoretical
    /// default for AdaImplicit's `beta`.
    pub fn bregman_diameter(&self) -> f64 {
        self.bregman_diameter_sq.sqrt()
    }

    /// `B(u, x) = 0.5 * ||u - x||^2`
    pub fn bregman(&self, u: &[f64], x: &[f64]) -> Result<f64> {
        check_dim(u.len(), x.len())?;
        Ok(0.5 * linalg::dist_sq(u, x))
    }

    /// Euclidean projection onto `V`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self.domain {
            Domain::Unconstrained => x.to_vec(),
            Domain::Ball { radius } => {
                let n = linalg::norm(x);
                if n <= radius {
                    return x.to_vec();
                }
                // rounding can leave the scaled norm an ulp above the radius;
                // shrink until the result is inside so projecting is idempotent
                let mut s = radius / n;
                loop {
                    let y = linalg::scale(x, s);
                    if linalg::norm(&y) <= radius {
                        return y;
                    }
                    s *= 1.0 - f64::EPSILON;
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self.domain {
            Domain::Unconstrained => x.iter().all(|v| v.is_finite()),
            Domain::Ball { radius } => linalg::norm(x) <= radius + tol,
        }
    }
}
