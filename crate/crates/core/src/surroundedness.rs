//! φ*-surroundedness and boundary classification.
//!
//! A point is φ-surrounded when its regular LitS is identically one. Because
//! lit arcs are open and grow continuously with φ, the infimum φ* of such
//! angles is not itself surrounding: at φ* the arcs leave at least one
//! direction dark. φ* is found pairwise: for two neighbors `i`, `j` whose
//! counterclockwise gap `|I_ij|` spans a gap between angularly consecutive
//! neighbors, the arcs meet when `ω_i(φ) + ω_j(φ) = |I_ij|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circular_fn::{covers_circle, indicator_of_union, uncovered_arcs, Angle, AngularInterval};
use crate::error::{LitsError, Result};
use crate::lits2d::{self, LitSParams, Neighborhood2D, PolarNeighbor};

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;
const DERIVATIVE_FLOOR: f64 = 1e-8;
// φ*_ij is nudged down until the pair residual is at most this, so the two
// arcs provably leave a gap at the reported angle.
const OPEN_MARGIN: f64 = 1e-13;
const MAX_NUDGE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurroundednessResult {
    pub phi_star: f64,
    /// Directions left dark at `φ*` (closed arcs; singletons for isolated
    /// points).
    pub outside_set: Vec<AngularInterval>,
    /// Input indices of the neighbor pair whose meeting angle is `φ*`.
    pub witnesses: Option<(usize, usize)>,
}

impl SurroundednessResult {
    /// Centers of the dark arcs at `φ*`.
    pub fn outside_directions(&self) -> Vec<Angle> {
        self.outside_set.iter().filter_map(AngularInterval::center).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLabel {
    pub kind: BoundaryKind,
    /// Centers of the maximal arcs below the threshold, longest arc first.
    pub outside_directions: Vec<Angle>,
    /// Centers of the maximal arcs at or above the threshold, longest first.
    pub inside_directions: Vec<Angle>,
    pub threshold: u32,
}

fn pair_residual(phi: f64, gap: f64, c_i: f64, c_j: f64) -> f64 {
    let s = phi.sin();
    2.0 * phi - gap - (c_i * s).clamp(-1.0, 1.0).asin() - (c_j * s).clamp(-1.0, 1.0).asin()
}

fn pair_derivative(phi: f64, c_i: f64, c_j: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let term = |k: f64| k * c / (1.0 - k * k * s * s).max(0.0).sqrt();
    2.0 - term(c_i) - term(c_j)
}

/// Incidence angle at `b = r_p·(cos θ_to, sin θ_to)` of the ray arriving
/// from `from`.
fn incidence(from: &PolarNeighbor, to: Angle, r_p: f64) -> f64 {
    let e = nalgebra::Vector2::new(to.radians().cos(), to.radians().sin());
    let w = from.offset() - r_p * e;
    w.perp(&e).abs().atan2(w.dot(&e))
}

/// Angle at which the arcs of `q_i` and `q_j` first close their
/// counterclockwise gap from `θ_i` to `θ_j`.
///
/// Newton iteration from the incidence-angle bound with a bisection
/// safeguard; the residual is monotone with a sign change on `[0, π]`.
pub fn phi_star_pair(q_i: &PolarNeighbor, q_j: &PolarNeighbor, r_p: f64) -> Result<f64> {
    if q_i.r < r_p {
        return Err(LitsError::NeighborInsideBall { r: q_i.r, r_p });
    }
    if q_j.r < r_p {
        return Err(LitsError::NeighborInsideBall { r: q_j.r, r_p });
    }
    let gap = q_i.theta.ccw_to(q_j.theta);
    if gap == 0.0 {
        return Ok(0.0);
    }
    if r_p == 0.0 {
        return Ok(gap / 2.0);
    }
    let (c_i, c_j) = (r_p / q_i.r, r_p / q_j.r);
    let g = |phi: f64| pair_residual(phi, gap, c_i, c_j);

    let bound = incidence(q_i, q_j.theta, r_p).min(incidence(q_j, q_i.theta, r_p));
    let (mut lo, mut hi) = (0.0, PI);
    if g(bound) >= 0.0 {
        hi = bound;
    } else {
        log::debug!("pair bound {bound} does not bracket the root; widening to [0, π]");
    }

    let mut x = hi;
    let mut gx = g(x);
    let mut converged = gx.abs() <= NEWTON_TOL;
    for _ in 0..NEWTON_MAX_ITER {
        if converged {
            break;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = pair_derivative(x, c_i, c_j);
        let newton = x - gx / d;
        x = if d.is_finite() && d >= DERIVATIVE_FLOOR && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        gx = g(x);
        converged = gx.abs() <= NEWTON_TOL || hi - lo <= f64::EPSILON * hi;
    }
    if !converged {
        return Err(LitsError::NoConvergence {
            iterations: NEWTON_MAX_ITER,
            last: x,
            residual: gx,
            lo,
            hi,
        });
    }

    let mut step = f64::EPSILON * x.max(1.0);
    let start = x;
    while g(x) > -OPEN_MARGIN && start - x < MAX_NUDGE && x > 0.0 {
        x = (x - step).max(0.0);
        step *= 2.0;
    }
    Ok(x)
}

// `I_k ⊂ I_ij` for sorted indices, where `I_k` runs from `k` to `k + 1`.
fn pair_spans_gap(i: usize, j: usize, k: usize) -> bool {
    if i < j {
        i <= k && k < j
    } else {
        i <= k || k < j
    }
}

/// Neighbors with distinct angles (keeping the farthest), sorted by angle,
/// with their input indices.
fn distinct_directions(neighbors: &[PolarNeighbor]) -> Vec<(usize, PolarNeighbor)> {
    let mut idx: Vec<(usize, PolarNeighbor)> = neighbors.iter().copied().enumerate().collect();
    idx.sort_by(|a, b| {
        a.1.theta
            .radians()
            .total_cmp(&b.1.theta.radians())
            .then(b.1.r.total_cmp(&a.1.r))
            .then(a.0.cmp(&b.0))
    });
    idx.dedup_by(|later, kept| later.1.theta == kept.1.theta);
    idx
}

fn exact_outside_set(neighbors: &[PolarNeighbor], r_p: f64, phi: f64) -> Result<Vec<AngularInterval>> {
    let arcs = lits2d::arcs_with_radius(neighbors, r_p, phi)?;
    Ok(uncovered_arcs(&arcs)
        .into_iter()
        .map(|u| {
            if u.length == 0.0 {
                AngularInterval::Singleton { at: u.start }
            } else {
                AngularInterval::Proper {
                    start: u.start,
                    length: u.length,
                }
            }
        })
        .collect())
}

/// φ* of the neighbors at distance at least `r_p`.
pub fn phi_star(neighbors: &[PolarNeighbor], r_p: f64) -> Result<SurroundednessResult> {
    let lit: Vec<(usize, PolarNeighbor)> = neighbors
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, q)| q.r >= r_p)
        .collect();
    if lit.is_empty() {
        return Err(LitsError::EmptyNeighborhood);
    }
    let only: Vec<PolarNeighbor> = lit.iter().map(|(_, q)| *q).collect();
    let sorted: Vec<(usize, PolarNeighbor)> = distinct_directions(&only)
        .into_iter()
        .map(|(i, q)| (lit[i].0, q))
        .collect();
    let m = sorted.len();
    if m == 1 {
        return Ok(SurroundednessResult {
            phi_star: PI,
            outside_set: exact_outside_set(&only, r_p, PI)?,
            witnesses: None,
        });
    }

    let mut table = vec![f64::INFINITY; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                table[i * m + j] = phi_star_pair(&sorted[i].1, &sorted[j].1, r_p)?;
            }
        }
    }
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for k in 0..m {
        let mut gap_best = (f64::INFINITY, (0, 0));
        for i in 0..m {
            for j in 0..m {
                if i != j && pair_spans_gap(i, j, k) && table[i * m + j] < gap_best.0 {
                    gap_best = (table[i * m + j], (i, j));
                }
            }
        }
        if gap_best.0 > best.0 {
            best = gap_best;
        }
    }
    let (phi, (i, j)) = best;
    Ok(SurroundednessResult {
        phi_star: phi,
        outside_set: exact_outside_set(&only, r_p, phi)?,
        witnesses: Some((sorted[i].0, sorted[j].0)),
    })
}

/// φ* of a planar neighborhood at ball ratio `λ`.
pub fn phi_star_of(q: &Neighborhood2D, lambda: f64) -> Result<SurroundednessResult> {
    let (lit, r_p) = lits2d::illuminating_neighbors(q, lambda)?;
    phi_star(&lit, r_p)
}

fn grid_covered(neighbors: &[PolarNeighbor], r_p: f64, phi: f64, multiplicity: u32) -> Result<bool> {
    let arcs = lits2d::arcs_with_radius(neighbors, r_p, phi)?;
    let f = if multiplicity == 1 {
        indicator_of_union(&arcs)
    } else {
        crate::circular_fn::sum_of_indicators(&arcs)
    };
    Ok(f.min_value() >= multiplicity)
}

fn sweep(neighbors: &[PolarNeighbor], r_p: f64, grid_step: f64, multiplicity: u32) -> Result<f64> {
    if !(grid_step > 0.0) {
        return Err(LitsError::param("grid_step", "must be positive"));
    }
    let last = ((PI / grid_step).ceil() as usize).saturating_sub(1);
    let covered = |k: usize| grid_covered(neighbors, r_p, k as f64 * grid_step, multiplicity);
    // coverage is monotone in φ: locate the first covered coarse cell, then
    // scan it finely
    const COARSE: usize = 100;
    let mut prev = 0;
    let mut k = 0;
    loop {
        let end = k.min(last);
        if covered(end)? {
            for kk in prev..=end {
                if covered(kk)? {
                    return Ok(kk as f64 * grid_step - grid_step);
                }
            }
        }
        if end == last {
            return Ok(PI);
        }
        prev = end;
        k += COARSE;
    }
}

/// Brute-force φ*: the first grid angle `kΔ < π` at which the step-function
/// LitS is identically one, minus one step; `π` when no grid angle covers.
pub fn phi_star_sweep_oracle(neighbors: &[PolarNeighbor], r_p: f64, grid_step: f64) -> Result<f64> {
    sweep(neighbors, r_p, grid_step, 1)
}

/// Grid estimate of the smallest φ at which the cumulative LitS reaches
/// `multiplicity` everywhere (no closed form is known).
pub fn multiplicity_phi_sweep(q: &Neighborhood2D, lambda: f64, multiplicity: u32, grid_step: f64) -> Result<f64> {
    if multiplicity == 0 {
        return Err(LitsError::param("multiplicity", "must be at least 1"));
    }
    let (lit, r_p) = lits2d::illuminating_neighbors(q, lambda)?;
    sweep(&lit, r_p, grid_step, multiplicity)
}

/// Whether the cumulative LitS is at least `multiplicity` everywhere.
pub fn is_surrounded(q: &Neighborhood2D, params: LitSParams, multiplicity: u32) -> Result<bool> {
    if multiplicity == 0 {
        return Err(LitsError::param("multiplicity", "must be at least 1"));
    }
    Ok(lits2d::cumulative_lits(q, params)?.min_value() >= multiplicity)
}

fn centers_by_length(intervals: Vec<AngularInterval>) -> Vec<Angle> {
    let mut v: Vec<(f64, Angle)> = intervals
        .iter()
        .filter_map(|i| i.center().map(|c| (i.length(), c)))
        .collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.radians().total_cmp(&b.1.radians())));
    v.into_iter().map(|(_, c)| c).collect()
}

/// Interior iff the cumulative LitS is at least `i0` everywhere.
pub fn classify_boundary(q: &Neighborhood2D, params: LitSParams, i0: u32) -> Result<BoundaryLabel> {
    classify_step(&lits2d::cumulative_lits(q, params)?, i0)
}

/// Boundary classification of any cumulative LitS.
pub fn classify_step(f: &crate::circular_fn::StepFnS1, i0: u32) -> Result<BoundaryLabel> {
    if i0 == 0 {
        return Err(LitsError::param("i0", "must be at least 1"));
    }
    if f.min_value() >= i0 {
        return Ok(BoundaryLabel {
            kind: BoundaryKind::Interior,
            outside_directions: Vec::new(),
            inside_directions: Vec::new(),
            threshold: i0,
        });
    }
    Ok(BoundaryLabel {
        kind: BoundaryKind::Boundary,
        outside_directions: centers_by_length(f.sublevel_intervals(i0)),
        inside_directions: centers_by_length(f.superlevel_intervals(i0)),
        threshold: i0,
    })
}

/// Threshold `⌈pct/100 · max⌉`, at least 1.
pub fn threshold_from_pct(max_value: u32, pct: f64) -> u32 {
    ((pct / 100.0 * f64::from(max_value)).ceil() as u32).max(1)
}

/// Smallest `j` such that the arcs at `φ = j·φ₀` cover the circle, capped at
/// `⌈π/φ₀⌉ + 1`.
pub fn surroundedness_class(q: &Neighborhood2D, lambda: f64, phi0: f64) -> Result<u32> {
    if !(phi0 > 0.0 && phi0.is_finite()) {
        return Err(LitsError::param("phi0", "must be positive and finite"));
    }
    let (lit, r_p) = lits2d::illuminating_neighbors(q, lambda)?;
    surroundedness_class_with_radius(&lit, r_p, phi0)
}

pub fn surroundedness_class_with_radius(neighbors: &[PolarNeighbor], r_p: f64, phi0: f64) -> Result<u32> {
    if !(phi0 > 0.0 && phi0.is_finite()) {
        return Err(LitsError::param("phi0", "must be positive and finite"));
    }
    let cap = (PI / phi0).ceil() as u32 + 1;
    if neighbors.iter().all(|q| q.r < r_p) {
        return Ok(cap);
    }
    for j in 1..cap {
        let arcs = lits2d::arcs_with_radius(neighbors, r_p, f64::from(j) * phi0)?;
        if covers_circle(&arcs) {
            return Ok(j);
        }
    }
    Ok(cap)
}
