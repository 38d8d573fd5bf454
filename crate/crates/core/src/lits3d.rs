//! Spatial LitS: pointwise evaluation on S² through cap membership, and the
//! closed-form restriction to the great circle orthogonal to a normal.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::circular_fn::{indicator_of_union, sum_of_indicators, Angle, AngularInterval, StepFnS1};
use crate::error::{LitsError, Result};
use crate::frames::Frame;
use crate::lits2d::{self, LitSParams, PolarNeighbor, EPS_DUP};

/// Relative tolerance routing `|ψ|` against `A_q` among the four cases.
pub const TANGENCY_TOL: f64 = 1e-10;

/// Offset `pq = αu + βv + γn` in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameNeighbor {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r: f64,
}

impl FrameNeighbor {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        FrameNeighbor {
            alpha,
            beta,
            gamma,
            r: (alpha * alpha + beta * beta + gamma * gamma).sqrt(),
        }
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.alpha, self.beta, self.gamma)
    }

    /// In-plane amplitude `A_q = √(α² + β²)`.
    pub fn amplitude(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    /// In-plane phase `φ_q = atan2(β, α)`.
    pub fn phase(&self) -> Angle {
        Angle::new(self.beta.atan2(self.alpha))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood3D {
    pub center: Vector3<f64>,
    pub frame: Frame,
    pub neighbors: Vec<FrameNeighbor>,
    pub r_q: f64,
}

impl Neighborhood3D {
    /// Expresses `points` in `frame` about `center`, dropping copies of the
    /// center.
    pub fn from_points(center: Vector3<f64>, points: &[Vector3<f64>], frame: Frame) -> Result<Self> {
        if points.is_empty() {
            return Err(LitsError::EmptyNeighborhood);
        }
        if points.iter().any(|x| !x.iter().all(|c| c.is_finite())) {
            return Err(LitsError::param("points", "coordinates must be finite"));
        }
        let all: Vec<FrameNeighbor> = points
            .iter()
            .map(|x| {
                let c = frame.coordinates(&(x - center));
                FrameNeighbor::new(c.x, c.y, c.z)
            })
            .collect();
        let r_q = all.iter().map(|q| q.r).fold(0.0, f64::max);
        if r_q == 0.0 {
            return Err(LitsError::DegenerateNeighborhood);
        }
        let before = all.len();
        let neighbors: Vec<FrameNeighbor> = all.into_iter().filter(|q| q.r >= EPS_DUP * r_q).collect();
        if neighbors.len() < before {
            log::warn!("dropped {} copies of the center point", before - neighbors.len());
        }
        Ok(Neighborhood3D {
            center,
            frame,
            neighbors,
            r_q,
        })
    }

    /// Neighborhood at the origin in the standard frame.
    pub fn from_frame_neighbors(neighbors: Vec<FrameNeighbor>) -> Result<Self> {
        if neighbors.is_empty() {
            return Err(LitsError::EmptyNeighborhood);
        }
        if neighbors.iter().any(|q| !(q.r.is_finite() && q.r > 0.0)) {
            return Err(LitsError::param("r", "radial coordinates must be positive and finite"));
        }
        let r_q = neighbors.iter().map(|q| q.r).fold(0.0, f64::max);
        Ok(Neighborhood3D {
            center: Vector3::zeros(),
            frame: Frame::identity(),
            neighbors,
            r_q,
        })
    }

    pub fn r_p(&self, lambda: f64) -> f64 {
        lambda * self.r_q
    }

    pub fn illuminating(&self, lambda: f64) -> Result<(Vec<FrameNeighbor>, f64)> {
        if self.neighbors.is_empty() {
            return Err(LitsError::EmptyNeighborhood);
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(LitsError::param("lambda", format!("{lambda} is outside [0, 1]")));
        }
        let r_p = self.r_p(lambda);
        Ok((self.neighbors.iter().copied().filter(|q| q.r >= r_p).collect(), r_p))
    }

    /// Rotates every neighbor by `beta` about the frame normal.
    pub fn rotated_about_normal(&self, beta: f64) -> Self {
        let (s, c) = beta.sin_cos();
        Neighborhood3D {
            neighbors: self
                .neighbors
                .iter()
                .map(|q| FrameNeighbor {
                    alpha: c * q.alpha - s * q.beta,
                    beta: s * q.alpha + c * q.beta,
                    gamma: q.gamma,
                    r: q.r,
                })
                .collect(),
            ..self.clone()
        }
    }
}

/// Solution set of the along-normal arc equation for one neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcResult {
    Empty,
    Full,
    FullMinusPoint { at: Angle },
    Interval { arc: AngularInterval },
}

impl ArcResult {
    pub fn to_interval(self) -> AngularInterval {
        match self {
            ArcResult::Empty => AngularInterval::Empty,
            ArcResult::Full => AngularInterval::Full,
            ArcResult::FullMinusPoint { at } => AngularInterval::FullMinusPoint { at },
            ArcResult::Interval { arc } => arc,
        }
    }
}

/// Incidence-angle test of the cap `c_φ(q)` at direction `e` (frame
/// coordinates, unit length): `∠(pq − r_p·e, e) < φ`.
pub fn cap_contains(q: &FrameNeighbor, r_p: f64, phi: f64, e: &Vector3<f64>) -> bool {
    if phi > PI {
        return true;
    }
    let w = q.vector() - r_p * e;
    if w.norm() == 0.0 {
        return false;
    }
    w.cross(e).norm().atan2(w.dot(e)) < phi
}

pub fn lits3d_eval(q: &Neighborhood3D, params: LitSParams, e: &Vector3<f64>) -> Result<u32> {
    Ok(cumulative3d_eval(q, params, e)?.min(1))
}

pub fn cumulative3d_eval(q: &Neighborhood3D, params: LitSParams, e: &Vector3<f64>) -> Result<u32> {
    let (lit, r_p) = q.illuminating(params.lambda)?;
    Ok(lit.iter().filter(|n| cap_contains(n, r_p, params.phi, e)).count() as u32)
}

/// `ψ = r_p sin²φ + cos φ · √(r_q² − r_p² sin²φ)`.
pub fn psi(r_q: f64, r_p: f64, phi: f64) -> Result<f64> {
    let s = phi.sin();
    let mut radicand = r_q * r_q - r_p * r_p * s * s;
    if radicand < 0.0 {
        if radicand < -1e-12 * r_q * r_q {
            return Err(LitsError::InconsistentGeometry(format!(
                "negative radicand {radicand} for r_q = {r_q}, r_p = {r_p}"
            )));
        }
        radicand = 0.0;
    }
    Ok(r_p * s * s + phi.cos() * radicand.sqrt())
}

/// Angle above which the cap of an on-axis neighbor contains the whole
/// great circle: `π − atan(r_q / r_p)`.
pub fn semisphere_threshold(r_q: f64, r_p: f64) -> f64 {
    PI - (r_q / r_p).atan()
}

/// Directions `t` of the great circle `e(t) = cos t·u + sin t·v` lit by `q`,
/// i.e. the solutions of `A_q cos(t − φ_q) > ψ` for `φ ∈ (0, π]`.
pub fn arc_along_normal(q: &FrameNeighbor, r_p: f64, phi: f64) -> Result<ArcResult> {
    if q.r < r_p {
        return Err(LitsError::NeighborInsideBall { r: q.r, r_p });
    }
    if !(phi > 0.0 && phi <= PI) {
        return Err(LitsError::param("phi", format!("{phi} is outside (0, π]")));
    }
    let psi = psi(q.r, r_p, phi)?;
    let amp = q.amplitude();
    let tol = TANGENCY_TOL * q.r;
    // ψ vanishes exactly at the semisphere threshold and is positive below it
    let below_threshold = psi > 0.0;
    if amp <= tol && psi.abs() <= tol {
        return Ok(ArcResult::Empty);
    }
    if psi.abs() > amp + tol {
        return Ok(if below_threshold { ArcResult::Empty } else { ArcResult::Full });
    }
    if (psi.abs() - amp).abs() <= tol {
        return Ok(if below_threshold {
            ArcResult::Empty
        } else {
            ArcResult::FullMinusPoint { at: q.phase() + PI }
        });
    }
    let half = (psi / amp).clamp(-1.0, 1.0).acos();
    let center = q.phase().radians();
    // of the two arcs bounded by φ_q ± half, the lit one contains φ_q
    Ok(ArcResult::Interval {
        arc: AngularInterval::open(center - half, center + half),
    })
}

/// Along-normal arcs of the illuminating neighbors. `φ = 0` lights nothing
/// and `φ > π` lights every direction.
pub fn arcs_along_normal(q: &Neighborhood3D, params: LitSParams) -> Result<Vec<AngularInterval>> {
    let (lit, r_p) = q.illuminating(params.lambda)?;
    arcs_for(&lit, r_p, params.phi)
}

/// Along-normal arcs with an absolute ball radius instead of `λ·r_Q`.
pub fn arcs_along_normal_with_radius(q: &Neighborhood3D, r_p: f64, phi: f64) -> Result<Vec<AngularInterval>> {
    if !(r_p >= 0.0 && r_p.is_finite()) {
        return Err(LitsError::param("r_p", "must be finite and nonnegative"));
    }
    if phi.is_nan() || phi < 0.0 {
        return Err(LitsError::param("phi", format!("{phi} is not in [0, +inf]")));
    }
    let lit: Vec<FrameNeighbor> = q.neighbors.iter().copied().filter(|n| n.r >= r_p).collect();
    arcs_for(&lit, r_p, phi)
}

fn arcs_for(lit: &[FrameNeighbor], r_p: f64, phi: f64) -> Result<Vec<AngularInterval>> {
    if phi == 0.0 {
        return Ok(Vec::new());
    }
    if phi > PI {
        return Ok(vec![AngularInterval::Full; lit.len()]);
    }
    lit.iter()
        .map(|n| arc_along_normal(n, r_p, phi).map(ArcResult::to_interval))
        .collect()
}

pub fn lits_along_normal(q: &Neighborhood3D, params: LitSParams) -> Result<StepFnS1> {
    Ok(indicator_of_union(&arcs_along_normal(q, params)?))
}

pub fn cumulative_along_normal(q: &Neighborhood3D, params: LitSParams) -> Result<StepFnS1> {
    Ok(sum_of_indicators(&arcs_along_normal(q, params)?))
}

pub fn lits_along_normal_with_radius(q: &Neighborhood3D, r_p: f64, phi: f64) -> Result<StepFnS1> {
    Ok(indicator_of_union(&arcs_along_normal_with_radius(q, r_p, phi)?))
}

pub fn cumulative_along_normal_with_radius(q: &Neighborhood3D, r_p: f64, phi: f64) -> Result<StepFnS1> {
    Ok(sum_of_indicators(&arcs_along_normal_with_radius(q, r_p, phi)?))
}

/// Regular planar LitS of the orthogonal projections onto the `(u, v)` plane,
/// keeping illuminating neighbors whose projection lies outside the ball.
pub fn projected_lits_at(q: &Neighborhood3D, lambda: f64, phi: f64) -> Result<StepFnS1> {
    let (lit, r_p) = q.illuminating(lambda)?;
    let projected: Vec<PolarNeighbor> = lit
        .iter()
        .filter(|n| n.amplitude() >= r_p && n.amplitude() > 0.0)
        .map(|n| PolarNeighbor {
            r: n.amplitude(),
            theta: n.phase(),
        })
        .collect();
    Ok(indicator_of_union(&lits2d::arcs_with_radius(&projected, r_p, phi)?))
}

/// Projection-based LitS at the baseline angle `φ = π/2`.
pub fn projected_lits(q: &Neighborhood3D, lambda: f64) -> Result<StepFnS1> {
    projected_lits_at(q, lambda, PI / 2.0)
}

/// A neighborhood on which the projection-based construction disagrees with
/// the along-normal LitS at `φ = 3π/4`: a far neighbor near the normal axis
/// projects inside the ball yet lights the whole great circle.
pub fn projection_counterexample() -> (Neighborhood3D, LitSParams) {
    let q = Neighborhood3D::from_frame_neighbors(vec![
        FrameNeighbor::new(4.0, 0.0, 0.0),
        FrameNeighbor::new(0.1, 0.0, 3.0),
    ])
    .expect("valid neighbors");
    (q, LitSParams { lambda: 0.25, phi: 3.0 * PI / 4.0 })
}

/// Number of cloud points in the `φ`-visible region of direction `e`.
pub fn visible_region_count_3d(
    cloud: &[Vector3<f64>],
    p: &Vector3<f64>,
    r_p: f64,
    r_q: f64,
    phi: f64,
    e: &Vector3<f64>,
) -> usize {
    let p_e = p + r_p * e;
    cloud
        .iter()
        .filter(|x| {
            let d = (*x - p).norm();
            if d < r_p || d > r_q {
                return false;
            }
            let w = *x - p_e;
            w.norm() > 0.0 && w.cross(e).norm().atan2(w.dot(e)) < phi
        })
        .count()
}
