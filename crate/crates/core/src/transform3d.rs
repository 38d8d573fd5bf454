//! Spatial cumulative LitS as a neighborhood transform.
//!
//! Each illuminating neighbor `q` lights the cap of directions within
//! `ω(r_q)` of `pq/|pq|`. For `φ ∈ (0, π)` the map `r_q ↦ ω` is injective, so
//! the multiset of caps determines the neighbors. On the circle the same
//! jumps can be paired into arcs in more than one way, so planar cumulative
//! LitS do not determine their neighborhoods.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circular_fn::AngularInterval;
use crate::error::{LitsError, Result};
use crate::lits2d::{self, half_width, Neighborhood2D, PolarNeighbor};
use crate::lits3d::{FrameNeighbor, Neighborhood3D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCap {
    pub center: Vector3<f64>,
    pub half_angle: f64,
    pub multiplicity: u32,
}

impl SphericalCap {
    /// Open-cap membership of the unit direction `e`.
    pub fn contains(&self, e: &Vector3<f64>) -> bool {
        self.center.cross(e).norm().atan2(self.center.dot(e)) < self.half_angle
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < PI {
        Ok(())
    } else {
        Err(LitsError::NotInvertible { phi })
    }
}

/// Cap lit by the offset `pq`.
pub fn cap_of(offset: &Vector3<f64>, r_p: f64, phi: f64) -> Result<SphericalCap> {
    check_phi(phi)?;
    let r_q = offset.norm();
    if !(r_p > 0.0) {
        return Err(LitsError::param("r_p", "must be positive"));
    }
    if r_q <= r_p {
        return Err(LitsError::NeighborInsideBall { r: r_q, r_p });
    }
    Ok(SphericalCap {
        center: offset / r_q,
        half_angle: half_width(r_q, r_p, phi),
        multiplicity: 1,
    })
}

pub fn cap_of_neighbor(q: &FrameNeighbor, r_p: f64, phi: f64) -> Result<SphericalCap> {
    cap_of(&q.vector(), r_p, phi)
}

/// Caps of all offsets, identical caps merged into one with multiplicity.
pub fn caps_of(offsets: &[Vector3<f64>], r_p: f64, phi: f64) -> Result<Vec<SphericalCap>> {
    let mut caps: Vec<SphericalCap> = Vec::new();
    for d in offsets {
        let cap = cap_of(d, r_p, phi)?;
        match caps
            .iter_mut()
            .find(|c| c.center == cap.center && c.half_angle == cap.half_angle)
        {
            Some(existing) => existing.multiplicity += 1,
            None => caps.push(cap),
        }
    }
    Ok(caps)
}

/// Caps of the illuminating neighbors of `q` (those strictly outside the ball).
pub fn caps_of_neighborhood(q: &Neighborhood3D, lambda: f64, phi: f64) -> Result<Vec<SphericalCap>> {
    let (lit, r_p) = q.illuminating(lambda)?;
    let offsets: Vec<Vector3<f64>> = lit.iter().filter(|n| n.r > r_p).map(FrameNeighbor::vector).collect();
    caps_of(&offsets, r_p, phi)
}

/// Inverse of [`cap_of`]: `r_q = r_p·sin φ / sin(φ − ω)` along the cap center.
pub fn recover_neighbor(cap: &SphericalCap, r_p: f64, phi: f64) -> Result<Vector3<f64>> {
    check_phi(phi)?;
    let inconsistent = LitsError::CapInconsistent {
        half_angle: cap.half_angle,
        phi,
    };
    // φ − ω is an arcsine, so it must lie in (0, π/2]
    let rest = phi - cap.half_angle;
    if !(cap.half_angle > 0.0) || rest <= 0.0 || rest > PI / 2.0 + 1e-12 {
        return Err(inconsistent);
    }
    let norm = cap.center.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(LitsError::param("center", "must be a unit vector"));
    }
    let r_q = r_p * phi.sin() / rest.sin();
    Ok(cap.center / norm * r_q)
}

/// Peels caps off one multiplicity unit at a time until none remain,
/// returning one offset per unit.
pub fn invert_cumulative(caps: &[SphericalCap], r_p: f64, phi: f64) -> Result<Vec<Vector3<f64>>> {
    check_phi(phi)?;
    let mut remaining: Vec<SphericalCap> = caps.to_vec();
    let mut out = Vec::new();
    while let Some(top) = remaining.last_mut() {
        if top.multiplicity == 0 {
            remaining.pop();
            continue;
        }
        out.push(recover_neighbor(top, r_p, phi)?);
        top.multiplicity -= 1;
    }
    out.reverse();
    Ok(out)
}

/// Two planar neighborhoods with identical cumulative LitS at ball radius
/// `r_p` and angle `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub first: Neighborhood2D,
    pub second: Neighborhood2D,
    pub r_p: f64,
    pub phi: f64,
}

// Neighbor whose arc at (r_p, phi) is `(center − half, center + half)`.
fn neighbor_for_arc(center: f64, half: f64, r_p: f64, phi: f64) -> Result<PolarNeighbor> {
    let low = (2.0 * phi - PI).max(0.0);
    if !(half > low && half < phi) {
        return Err(LitsError::InconsistentGeometry(format!(
            "half width {half} is not attainable at φ = {phi}"
        )));
    }
    Ok(PolarNeighbor::new(r_p * phi.sin() / (phi - half).sin(), center))
}

fn build_pairings(phi: f64, m: f64, s: f64, rotation: f64) -> Result<Counterexample> {
    let r_p = 1.0;
    let (h_in, h_out) = (m - s / 2.0, m + s / 2.0);
    // up-jumps at 0 and s, down-jumps at 2m and 2m + s
    let crossed = vec![
        neighbor_for_arc(rotation + m, m, r_p, phi)?,
        neighbor_for_arc(rotation + s + m, m, r_p, phi)?,
    ];
    let nested = vec![
        neighbor_for_arc(rotation + h_out, h_out, r_p, phi)?,
        neighbor_for_arc(rotation + s + h_in, h_in, r_p, phi)?,
    ];
    Ok(Counterexample {
        first: Neighborhood2D::from_polar(crossed)?,
        second: Neighborhood2D::from_polar(nested)?,
        r_p,
        phi,
    })
}

/// Fixed construction: the four jumps are paired as two equal overlapping
/// arcs or as two nested arcs.
pub fn two_d_counterexample(phi: f64) -> Result<Counterexample> {
    check_phi(phi)?;
    let low = (2.0 * phi - PI).max(0.0);
    let m = 0.5 * (low + phi);
    let s = 0.25 * (phi - low);
    build_pairings(phi, m, s, 0.0)
}

/// Randomized construction (rotation, arc length and jump spacing drawn from
/// `seed`).
pub fn two_d_counterexample_seeded(phi: f64, seed: u64) -> Result<Counterexample> {
    check_phi(phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let low = (2.0 * phi - PI).max(0.0);
    let m = low + (phi - low) * rng.random_range(0.35..0.65);
    let s = (m - low).min(phi - m) * rng.random_range(0.2..0.8);
    build_pairings(phi, m, s, rng.random_range(0.0..TAU))
}

/// Re-pairs the jumps of a two-neighbor planar LitS the other way round.
pub fn swap_pairing(q: &Neighborhood2D, r_p: f64, phi: f64) -> Result<Neighborhood2D> {
    if q.neighbors.len() != 2 {
        return Err(LitsError::param("neighborhood", "needs exactly two neighbors"));
    }
    let arcs = lits2d::arcs_with_radius(&q.neighbors, r_p, phi)?;
    let mut spans = Vec::with_capacity(2);
    for a in &arcs {
        match *a {
            AngularInterval::Proper { start, length } => spans.push((start, length)),
            _ => return Err(LitsError::InconsistentGeometry("arcs must be proper".into())),
        }
    }
    // unwrap both arcs relative to the earlier start
    spans.sort_by(|a, b| a.0.radians().total_cmp(&b.0.radians()));
    let (mut a0, mut a1) = (spans[0], spans[1]);
    if a0.0.ccw_to(a1.0) > a1.0.ccw_to(a0.0) {
        std::mem::swap(&mut a0, &mut a1);
    }
    let base = a0.0;
    let off = base.ccw_to(a1.0);
    let (e0, e1) = (a0.1, off + a1.1);
    let (b0, b1) = (e0.min(e1), e0.max(e1));
    // crossed pairs the earlier start with the earlier end, nested the other way
    let is_crossed = e0 <= e1;
    let pairs = if is_crossed {
        [(0.0, b1), (off, b0)]
    } else {
        [(0.0, b0), (off, b1)]
    };
    let neighbors = pairs
        .iter()
        .map(|&(s, e)| {
            let half = 0.5 * (e - s);
            neighbor_for_arc((base + s + half).radians(), half, r_p, phi)
        })
        .collect::<Result<Vec<_>>>()?;
    Neighborhood2D::from_polar(neighbors)
}

/// Unit direction of a cap center in frame coordinates for the angle pair
/// `(azimuth, elevation)`.
pub fn direction(azimuth: f64, elevation: f64) -> Vector3<f64> {
    let (se, ce) = elevation.sin_cos();
    Vector3::new(ce * azimuth.cos(), ce * azimuth.sin(), se)
}
