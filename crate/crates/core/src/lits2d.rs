//! Planar LitS.

use std::f64::consts::PI;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::circular_fn::{indicator_of_union, sum_of_indicators, Angle, AngularInterval, StepFnS1};
use crate::error::{LitsError, Result};

/// Neighbors closer than this fraction of `r_Q` are treated as copies of `p`.
pub const EPS_DUP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarNeighbor {
    pub r: f64,
    pub theta: Angle,
}

impl PolarNeighbor {
    pub fn new(r: f64, theta: f64) -> Self {
        PolarNeighbor {
            r,
            theta: Angle::new(theta),
        }
    }

    /// Cartesian offset from the center.
    pub fn offset(&self) -> Vector2<f64> {
        let t = self.theta.radians();
        Vector2::new(self.r * t.cos(), self.r * t.sin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood2D {
    pub center: Vector2<f64>,
    pub neighbors: Vec<PolarNeighbor>,
    pub r_q: f64,
}

impl Neighborhood2D {
    /// Builds a neighborhood from absolute positions. Copies of `center`
    /// (closer than `EPS_DUP·r_Q`) are dropped with a warning.
    pub fn from_points(center: Vector2<f64>, points: &[Vector2<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(LitsError::EmptyNeighborhood);
        }
        if points.iter().any(|x| !(x.x.is_finite() && x.y.is_finite())) {
            return Err(LitsError::param("points", "coordinates must be finite"));
        }
        let polar: Vec<PolarNeighbor> = points
            .iter()
            .map(|x| {
                let d = x - center;
                PolarNeighbor::new(d.norm(), d.y.atan2(d.x))
            })
            .collect();
        let r_max = polar.iter().map(|q| q.r).fold(0.0, f64::max);
        if r_max == 0.0 {
            return Err(LitsError::DegenerateNeighborhood);
        }
        let before = polar.len();
        let kept: Vec<PolarNeighbor> = polar
            .into_iter()
            .filter(|q| q.r >= EPS_DUP * r_max)
            .collect();
        if kept.len() < before {
            log::warn!("dropped {} copies of the center point", before - kept.len());
        }
        Ok(Neighborhood2D {
            center,
            neighbors: kept,
            r_q: r_max,
        })
    }

    /// Builds a neighborhood from polar coordinates about the origin.
    pub fn from_polar(neighbors: Vec<PolarNeighbor>) -> Result<Self> {
        if neighbors.is_empty() {
            return Err(LitsError::EmptyNeighborhood);
        }
        if neighbors.iter().any(|q| !(q.r.is_finite() && q.r > 0.0)) {
            return Err(LitsError::param("r", "radial coordinates must be positive and finite"));
        }
        let r_q = neighbors.iter().map(|q| q.r).fold(0.0, f64::max);
        Ok(Neighborhood2D {
            center: Vector2::zeros(),
            neighbors,
            r_q,
        })
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Absolute neighbor positions.
    pub fn positions(&self) -> Vec<Vector2<f64>> {
        self.neighbors.iter().map(|q| self.center + q.offset()).collect()
    }

    /// Rotates every neighbor about the center by `beta`.
    pub fn rotated(&self, beta: f64) -> Self {
        Neighborhood2D {
            center: self.center,
            neighbors: self
                .neighbors
                .iter()
                .map(|q| PolarNeighbor {
                    r: q.r,
                    theta: q.theta + beta,
                })
                .collect(),
            r_q: self.r_q,
        }
    }
}

/// Ball-ratio `λ` and limiting angle of incidence `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LitSParams {
    pub lambda: f64,
    pub phi: f64,
}

impl LitSParams {
    /// `λ ∈ [0, 1]`; `φ ∈ [0, +∞]`.
    pub fn new(lambda: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(LitsError::param("lambda", format!("{lambda} is outside [0, 1]")));
        }
        if phi.is_nan() || phi < 0.0 {
            return Err(LitsError::param("phi", format!("{phi} is not in [0, +inf]")));
        }
        Ok(LitSParams { lambda, phi })
    }
}

/// Neighbors outside the open ball `B(p, r_p)`, together with `r_p = λ·r_Q`.
pub fn illuminating_neighbors(q: &Neighborhood2D, lambda: f64) -> Result<(Vec<PolarNeighbor>, f64)> {
    if q.is_empty() {
        return Err(LitsError::EmptyNeighborhood);
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(LitsError::param("lambda", format!("{lambda} is outside [0, 1]")));
    }
    let r_p = lambda * q.r_q;
    Ok((filter_illuminating(&q.neighbors, r_p), r_p))
}

pub fn filter_illuminating(neighbors: &[PolarNeighbor], r_p: f64) -> Vec<PolarNeighbor> {
    neighbors.iter().copied().filter(|q| q.r >= r_p).collect()
}

/// Half width `ω = φ − asin((r_p/r_q)·sin φ)` of a lit arc, for
/// `φ ∈ [0, π]` and `r_q ≥ r_p`.
pub fn half_width(r_q: f64, r_p: f64, phi: f64) -> f64 {
    let s = ((r_p / r_q) * phi.sin()).clamp(-1.0, 1.0);
    phi - s.asin()
}

/// Open arc of directions lit by `q`.
///
/// Degenerate cases: `φ > π` lights everything, `φ = 0` and zero-width arcs
/// give `{θ_q}`, and `r_p = 0` gives `(θ_q − φ, θ_q + φ)`.
pub fn arc(q: &PolarNeighbor, r_p: f64, phi: f64) -> Result<AngularInterval> {
    if q.r < r_p {
        return Err(LitsError::NeighborInsideBall { r: q.r, r_p });
    }
    if phi.is_nan() || phi < 0.0 {
        return Err(LitsError::param("phi", format!("{phi} is not in [0, +inf]")));
    }
    let theta = q.theta.radians();
    if phi > PI {
        return Ok(AngularInterval::Full);
    }
    if phi == 0.0 {
        return Ok(AngularInterval::Singleton { at: q.theta });
    }
    let omega = if r_p == 0.0 {
        phi
    } else {
        half_width(q.r, r_p, phi)
    };
    Ok(AngularInterval::centered(theta, omega))
}

/// Arcs of all neighbors with `r ≥ r_p`.
pub fn arcs_with_radius(neighbors: &[PolarNeighbor], r_p: f64, phi: f64) -> Result<Vec<AngularInterval>> {
    neighbors
        .iter()
        .filter(|q| q.r >= r_p)
        .map(|q| arc(q, r_p, phi))
        .collect()
}

/// Arcs of the illuminating neighbors of `q`.
pub fn arcs(q: &Neighborhood2D, params: LitSParams) -> Result<Vec<AngularInterval>> {
    let (lit, r_p) = illuminating_neighbors(q, params.lambda)?;
    arcs_with_radius(&lit, r_p, params.phi)
}

pub fn lits(q: &Neighborhood2D, params: LitSParams) -> Result<StepFnS1> {
    Ok(indicator_of_union(&arcs(q, params)?))
}

pub fn cumulative_lits(q: &Neighborhood2D, params: LitSParams) -> Result<StepFnS1> {
    Ok(sum_of_indicators(&arcs(q, params)?))
}

/// Regular LitS with an absolute ball radius instead of `λ·r_Q`.
pub fn lits_with_radius(q: &Neighborhood2D, r_p: f64, phi: f64) -> Result<StepFnS1> {
    Ok(indicator_of_union(&arcs_with_radius(&q.neighbors, r_p, phi)?))
}

pub fn cumulative_lits_with_radius(q: &Neighborhood2D, r_p: f64, phi: f64) -> Result<StepFnS1> {
    Ok(sum_of_indicators(&arcs_with_radius(&q.neighbors, r_p, phi)?))
}

/// Directions lit only as a single point (measure zero, so absent from the
/// step representation).
pub fn singleton_directions(q: &Neighborhood2D, params: LitSParams) -> Result<Vec<Angle>> {
    Ok(arcs(q, params)?
        .into_iter()
        .filter_map(|a| match a {
            AngularInterval::Singleton { at } => Some(at),
            _ => None,
        })
        .collect())
}

/// Number of cloud points in the `φ`-visible region of direction `t`: points
/// with `r_p ≤ |x − p| ≤ r_Q` whose ray to `p_t = p + r_p·(cos t, sin t)`
/// meets the outward radial direction at an angle below `φ`.
pub fn visible_region_count(
    cloud: &[Vector2<f64>],
    p: Vector2<f64>,
    r_p: f64,
    r_q: f64,
    phi: f64,
    t: Angle,
) -> usize {
    let e = Vector2::new(t.radians().cos(), t.radians().sin());
    let p_t = p + r_p * e;
    cloud
        .iter()
        .filter(|x| {
            let d = (*x - p).norm();
            if d < r_p || d > r_q {
                return false;
            }
            let w = *x - p_t;
            if w.norm() == 0.0 {
                return false;
            }
            let angle = w.perp(&e).abs().atan2(w.dot(&e));
            angle < phi
        })
        .count()
}
