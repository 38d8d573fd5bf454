//! Covariance frames and rotation-invariant reference angles.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::circular_fn::Angle;
use crate::error::{LitsError, Result};
use crate::lits2d::{Neighborhood2D, PolarNeighbor};
use crate::lits3d::{FrameNeighbor, Neighborhood3D};

/// Top two eigenvalues closer than this ratio raise the stability flag.
pub const NEAR_DEGENERATE_RATIO: f64 = 1.0 + 1e-6;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Orthonormal eigenbasis of a 3×3 covariance, `u ↔ λ₁ ≥ λ₂ ≥ λ₃ ↔ n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
    pub n: Vector3<f64>,
    pub eigenvalues: [f64; 3],
    pub near_degenerate: bool,
}

impl Frame {
    pub fn identity() -> Self {
        Frame {
            u: Vector3::x(),
            v: Vector3::y(),
            n: Vector3::z(),
            eigenvalues: [0.0; 3],
            near_degenerate: false,
        }
    }

    /// Coordinates of `d` in the `(u, v, n)` basis.
    pub fn coordinates(&self, d: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(d.dot(&self.u), d.dot(&self.v), d.dot(&self.n))
    }

    /// Global direction of the unit vector at angle `t` in the `(u, v)` plane.
    pub fn in_plane(&self, t: f64) -> Vector3<f64> {
        t.cos() * self.u + t.sin() * self.v
    }
}

/// Principal axis of a 2×2 covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame2D {
    pub axis: Vector2<f64>,
    pub eigenvalues: [f64; 2],
    pub near_degenerate: bool,
}

impl Frame2D {
    pub fn axis_angle(&self) -> Angle {
        Angle::new(self.axis.y.atan2(self.axis.x))
    }
}

/// `XᵀX` of the offsets from `center` (no normalization by the count).
pub fn covariance_2d(points: &[Vector2<f64>], center: &Vector2<f64>) -> Matrix2<f64> {
    points.iter().fold(Matrix2::zeros(), |acc, x| {
        let d = x - center;
        acc + d * d.transpose()
    })
}

/// `XᵀX` of the offsets from `center`.
pub fn covariance_3d(points: &[Vector3<f64>], center: &Vector3<f64>) -> Matrix3<f64> {
    points.iter().fold(Matrix3::zeros(), |acc, x| {
        let d = x - center;
        acc + d * d.transpose()
    })
}

// Flips `x` so its largest-magnitude component (first on ties) is positive.
fn orient<const D: usize>(x: nalgebra::SVector<f64, D>) -> nalgebra::SVector<f64, D> {
    let mut best = 0;
    for i in 1..D {
        if x[i].abs() > x[best].abs() {
            best = i;
        }
    }
    if x[best] < 0.0 {
        -x
    } else {
        x
    }
}

fn near_equal(a: f64, b: f64) -> bool {
    a <= b * NEAR_DEGENERATE_RATIO
}

/// Closed-form eigen decomposition of a symmetric 2×2 matrix.
pub fn eigen_frame_2d(c: &Matrix2<f64>) -> Result<Frame2D> {
    let (a, b, d) = (c[(0, 0)], 0.5 * (c[(0, 1)] + c[(1, 0)]), c[(1, 1)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let l1 = (mean + radius).max(0.0);
    let l2 = (mean - radius).max(0.0);
    if l1 == 0.0 {
        return Err(LitsError::DegenerateNeighborhood);
    }
    let angle = 0.5 * (2.0 * b).atan2(a - d);
    Ok(Frame2D {
        axis: orient(Vector2::new(angle.cos(), angle.sin())),
        eigenvalues: [l1, l2],
        near_degenerate: near_equal(l1, l2),
    })
}

/// Cyclic Jacobi diagonalization of a symmetric 3×3 matrix, returning
/// eigenvalues and column eigenvectors in input order.
fn jacobi(c: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let mut a = 0.5 * (c + c.transpose());
    let mut v = Matrix3::identity();
    let scale = a.norm();
    if scale == 0.0 {
        return (Vector3::zeros(), v);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2)).sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let cs = 1.0 / (t * t + 1.0).sqrt();
            let sn = t * cs;
            let mut j = Matrix3::identity();
            j[(p, p)] = cs;
            j[(q, q)] = cs;
            j[(p, q)] = sn;
            j[(q, p)] = -sn;
            a = j.transpose() * a * j;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v *= j;
        }
    }
    (a.diagonal(), v)
}

/// Eigenbasis sorted by descending eigenvalue. Each axis is oriented so its
/// largest-magnitude component is positive; repeated eigenvalues keep the
/// lexicographic axis order and set `near_degenerate`.
pub fn eigen_frame(c: &Matrix3<f64>) -> Result<Frame> {
    let (vals, vecs) = jacobi(c);
    let scale = c.norm();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut eigenvalues = [0.0; 3];
    for (k, &i) in order.iter().enumerate() {
        if vals[i] < -1e-9 * scale {
            log::warn!("covariance eigenvalue {} clamped to zero", vals[i]);
        }
        eigenvalues[k] = vals[i].max(0.0);
    }
    if eigenvalues[0] == 0.0 {
        return Err(LitsError::DegenerateNeighborhood);
    }
    let axis = |k: usize| orient(vecs.column(order[k]).into_owned().normalize());
    Ok(Frame {
        u: axis(0),
        v: axis(1),
        n: axis(2),
        eigenvalues,
        near_degenerate: near_equal(eigenvalues[0], eigenvalues[1]),
    })
}

/// The one of `axis`, `axis + π` with the smaller total geodesic distance to
/// the neighbors; exact ties go to the smaller normalized angle.
pub fn reference_angle(neighbors: &[PolarNeighbor], axis: Angle) -> Result<Angle> {
    if neighbors.is_empty() {
        return Err(LitsError::EmptyNeighborhood);
    }
    let a = axis;
    let b = axis + PI;
    let cost = |c: Angle| neighbors.iter().map(|q| q.theta.distance(c)).sum::<f64>();
    let (ca, cb) = (cost(a), cost(b));
    let tol = 1e-12 * ca.max(cb).max(1.0);
    Ok(if (ca - cb).abs() <= tol {
        if a.radians() <= b.radians() {
            a
        } else {
            b
        }
    } else if ca < cb {
        a
    } else {
        b
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canonical2D {
    pub neighborhood: Neighborhood2D,
    pub reference: Angle,
    pub near_degenerate: bool,
}

/// Subtracts the reference angle of the principal covariance axis from every
/// angular coordinate.
pub fn canonicalize_2d(q: &Neighborhood2D) -> Result<Canonical2D> {
    let offsets: Vec<Vector2<f64>> = q.neighbors.iter().map(PolarNeighbor::offset).collect();
    let frame = eigen_frame_2d(&covariance_2d(&offsets, &Vector2::zeros()))?;
    let reference = reference_angle(&q.neighbors, frame.axis_angle())?;
    Ok(Canonical2D {
        neighborhood: q.rotated(-reference.radians()),
        reference,
        near_degenerate: frame.near_degenerate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canonical3D {
    pub neighborhood: Neighborhood3D,
    pub reference: Angle,
    pub near_degenerate: bool,
}

/// Expresses the neighbors in a canonical right-handed eigen frame.
///
/// `n` is oriented so that the `γ` coordinates sum to a non-negative value
/// (falling back to `Σβ³ ≥ 0` for flat neighborhoods), `u` is the principal
/// axis turned by the in-plane reference angle, and `v = n × u`.
pub fn canonicalize_3d(center: &Vector3<f64>, points: &[Vector3<f64>]) -> Result<Canonical3D> {
    if points.is_empty() {
        return Err(LitsError::EmptyNeighborhood);
    }
    let frame = eigen_frame(&covariance_3d(points, center))?;
    let offsets: Vec<Vector3<f64>> = points.iter().map(|x| x - center).collect();
    let spread: f64 = offsets.iter().map(|d| d.norm()).sum();
    let u0 = frame.u;
    let mut n = frame.n;
    let gamma_sum: f64 = offsets.iter().map(|d| d.dot(&n)).sum();
    if gamma_sum.abs() > 1e-9 * spread {
        if gamma_sum < 0.0 {
            n = -n;
        }
    } else {
        let v0 = n.cross(&u0);
        let skew: f64 = offsets.iter().map(|d| d.dot(&v0).powi(3)).sum();
        if skew < 0.0 {
            n = -n;
        }
    }
    let v0 = n.cross(&u0);
    let projected: Vec<PolarNeighbor> = offsets
        .iter()
        .map(|d| {
            let (a, b) = (d.dot(&u0), d.dot(&v0));
            PolarNeighbor::new(a.hypot(b), b.atan2(a))
        })
        .collect();
    let reference = reference_angle(&projected, Angle::ZERO)?;
    let u = if reference == Angle::ZERO { u0 } else { -u0 };
    let canonical = Frame {
        u,
        v: n.cross(&u),
        n,
        eigenvalues: frame.eigenvalues,
        near_degenerate: frame.near_degenerate,
    };
    Ok(Canonical3D {
        neighborhood: Neighborhood3D::from_points(*center, points, canonical)?,
        reference,
        near_degenerate: frame.near_degenerate,
    })
}

/// How the plane of LitS along a normal is chosen for a 3D neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalMode {
    /// Covariance tangent plane (`n` = smallest eigenvector).
    Tangent,
    /// The global XY plane.
    FixedZ,
    /// `n` is the unit vector orthogonal to the tangent normal with maximal
    /// Z component.
    MaxZOrthocomplement,
}

/// Right-handed frame `(u, v, n)` for the chosen normal mode. The returned
/// flag reports a near-degenerate covariance or a fallback choice.
pub fn plane_frame(mode: NormalMode, center: &Vector3<f64>, points: &[Vector3<f64>]) -> Result<(Frame, bool)> {
    if mode == NormalMode::FixedZ {
        return Ok((Frame::identity(), false));
    }
    let eig = eigen_frame(&covariance_3d(points, center))?;
    match mode {
        NormalMode::Tangent => Ok((
            Frame {
                v: eig.n.cross(&eig.u),
                ..eig
            },
            eig.near_degenerate,
        )),
        NormalMode::MaxZOrthocomplement => {
            let z = Vector3::z();
            let t = eig.n;
            let w = z - z.dot(&t) * t;
            let (n, fallback) = if w.norm() <= 1e-12 {
                (Vector3::x(), true)
            } else {
                (w.normalize(), false)
            };
            // the tangent normal is orthogonal to n in both branches
            let u = (t - t.dot(&n) * n).normalize();
            Ok((
                Frame {
                    u,
                    v: n.cross(&u),
                    n,
                    eigenvalues: eig.eigenvalues,
                    near_degenerate: eig.near_degenerate,
                },
                eig.near_degenerate || fallback,
            ))
        }
        NormalMode::FixedZ => unreachable!(),
    }
}

/// Convenience: frame coordinates of an offset.
pub fn frame_neighbor(frame: &Frame, d: &Vector3<f64>) -> FrameNeighbor {
    let c = frame.coordinates(d);
    FrameNeighbor::new(c.x, c.y, c.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn covariance_examples() {
        let o = Vector2::zeros();
        assert_eq!(covariance_2d(&[Vector2::new(1.0, 0.0)], &o), Matrix2::new(1.0, 0.0, 0.0, 0.0));
        assert_eq!(
            covariance_2d(&[Vector2::new(1.0, 0.0), Vector2::new(-1.0, 0.0)], &o),
            Matrix2::new(2.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn covariance_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vector3<f64>> = (0..50)
            .map(|_| Vector3::new(rng.random(), rng.random(), rng.random()))
            .collect();
        let c = Vector3::new(0.5, 0.5, 0.5);
        let m = covariance_3d(&pts, &c);
        for i in 0..3 {
            for j in 0..3 {
                let direct: f64 = pts.iter().map(|x| (x[i] - c[i]) * (x[j] - c[j])).sum();
                assert!((m[(i, j)] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_frame() {
        let f = eigen_frame(&Matrix3::from_diagonal(&Vector3::new(2.0, 3.0, 1.0))).unwrap();
        assert_eq!(f.eigenvalues, [3.0, 2.0, 1.0]);
        assert_eq!(f.u, Vector3::y());
        assert_eq!(f.v, Vector3::x());
        assert_eq!(f.n, Vector3::z());
        assert!(!f.near_degenerate);
    }

    #[test]
    fn repeated_eigenvalue_is_flagged() {
        let f = eigen_frame(&Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0))).unwrap();
        assert!(f.near_degenerate);
        assert_eq!((f.u, f.v, f.n), (Vector3::x(), Vector3::y(), Vector3::z()));
        assert!(eigen_frame_2d(&Matrix2::identity()).unwrap().near_degenerate);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert_eq!(eigen_frame(&Matrix3::zeros()), Err(LitsError::DegenerateNeighborhood));
        assert_eq!(eigen_frame_2d(&Matrix2::zeros()), Err(LitsError::DegenerateNeighborhood));
    }

    #[test]
    fn rotated_diagonal_recovers_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let axis = Vector3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let r = Rotation3::new(axis * 4.0).into_inner();
            let d = Matrix3::from_diagonal(&Vector3::new(5.0, 2.0, 0.5));
            let f = eigen_frame(&(r * d * r.transpose())).unwrap();
            for (k, e) in [f.u, f.v, f.n].iter().enumerate() {
                assert!((e.dot(&r.column(k)).abs() - 1.0).abs() < 1e-9);
            }
            assert!((f.eigenvalues[0] - 5.0).abs() < 1e-9);
            assert!((f.eigenvalues[2] - 0.5).abs() < 1e-9);
            assert!(f.u.dot(&f.v).abs() < 1e-9 && f.u.dot(&f.n).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_2d_matches_rotation() {
        for k in 0..64 {
            let t = k as f64 * 0.1;
            let r = nalgebra::Rotation2::new(t).into_inner();
            let c = r * Matrix2::new(4.0, 0.0, 0.0, 1.0) * r.transpose();
            let f = eigen_frame_2d(&c).unwrap();
            assert!((f.eigenvalues[0] - 4.0).abs() < 1e-12);
            assert!((f.eigenvalues[1] - 1.0).abs() < 1e-12);
            assert!((f.axis.dot(&r.column(0)).abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_angle_examples() {
        let at = |ts: &[f64]| ts.iter().map(|t| PolarNeighbor::new(1.0, *t)).collect::<Vec<_>>();
        assert_eq!(reference_angle(&at(&[0.0, 0.0]), Angle::ZERO).unwrap(), Angle::ZERO);
        let r = reference_angle(&at(&[PI - 0.1, PI + 0.1]), Angle::ZERO).unwrap();
        assert!((r.radians() - PI).abs() < 1e-15);
        // symmetric about the axis: tie goes to the smaller angle
        let tie = reference_angle(&at(&[PI / 2.0, 3.0 * PI / 2.0]), Angle::new(PI)).unwrap();
        assert_eq!(tie, Angle::ZERO);
        assert!(reference_angle(&[], Angle::ZERO).is_err());
    }

    #[test]
    fn canonical_2d_is_idempotent() {
        let q = Neighborhood2D::from_polar(vec![
            PolarNeighbor::new(1.0, 0.3),
            PolarNeighbor::new(0.7, 1.4),
            PolarNeighbor::new(0.4, 3.9),
            PolarNeighbor::new(0.9, 5.0),
        ])
        .unwrap();
        let once = canonicalize_2d(&q).unwrap().neighborhood;
        let twice = canonicalize_2d(&once).unwrap().neighborhood;
        for (a, b) in once.neighbors.iter().zip(&twice.neighbors) {
            assert!(a.theta.distance(b.theta) < 1e-9);
        }
    }

    #[test]
    fn max_z_orthocomplement_plane() {
        // a cloud in the XZ plane: tangent normal is ±Y, best normal is Z
        let pts: Vec<Vector3<f64>> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.7;
                Vector3::new(2.0 * t.cos(), 0.0, t.sin())
            })
            .collect();
        let (f, flag) = plane_frame(NormalMode::MaxZOrthocomplement, &Vector3::zeros(), &pts).unwrap();
        assert!(!flag);
        assert!((f.n - Vector3::z()).norm() < 1e-9);
        assert!((f.u.cross(&f.v) - f.n).norm() < 1e-9);
        // a flat XY cloud leaves no orthogonal vector with positive Z
        let flat: Vec<Vector3<f64>> = (0..20)
            .map(|k| {
                let t = k as f64 * 0.7;
                Vector3::new(2.0 * t.cos(), t.sin(), 0.0)
            })
            .collect();
        let (g, flag) = plane_frame(NormalMode::MaxZOrthocomplement, &Vector3::zeros(), &flat).unwrap();
        assert!(flag);
        assert_eq!(g.n, Vector3::x());
    }
}
