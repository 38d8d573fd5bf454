//! Shared per-point pipeline: neighborhood query, plane choice and LitS.

use lits::frames::{plane_frame, Frame};
use lits::lits2d;
use lits::lits3d;
use lits::pcio::{self, Neighbors, PointCloud, SpatialIndex};
use lits::{Angle, Neighborhood2D, Neighborhood3D, StepFnS1};
use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;

use crate::args::RunConfig;
use crate::error::{CliError, CliResult};

/// LitS of one point and what is needed to interpret them.
pub struct Local {
    pub n_neighbors: usize,
    pub r_q: f64,
    pub r_p: f64,
    pub regular: StepFnS1,
    pub cumulative: StepFnS1,
    /// Near-degenerate covariance or a fallback plane.
    pub flagged: bool,
    pub frame: Option<Frame>,
    pub planar: Option<Neighborhood2D>,
}

pub struct Pipeline {
    pub cloud: PointCloud,
    index: SpatialIndex,
    config: RunConfig,
}

impl Pipeline {
    pub fn load(config: &RunConfig) -> CliResult<Self> {
        if let Some(r) = config.neighborhood.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Usage("--radius must be positive".into()));
            }
        }
        if config.neighborhood.knn == Some(0) {
            return Err(CliError::Usage("--knn must be at least 1".into()));
        }
        if let Some(r) = config.r_p_abs {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(CliError::Usage("--r-p-abs must be finite and nonnegative".into()));
            }
        }
        if config.phi < 0.0 {
            return Err(CliError::Usage("--phi must be nonnegative".into()));
        }
        let cloud = pcio::read_cloud(&config.input)?;
        if let Some(k) = config.neighborhood.knn {
            if k + 1 > cloud.len() {
                return Err(CliError::Usage(format!("--knn {k} needs more than {} points", cloud.len())));
            }
        }
        let index = SpatialIndex::build(&cloud);
        log::info!("loaded {} points ({}D)", cloud.len(), cloud.dim);
        Ok(Pipeline {
            cloud,
            index,
            config: config.clone(),
        })
    }

    fn neighbors(&self, i: usize) -> CliResult<Neighbors> {
        let p = &self.cloud.positions[i];
        Ok(match (self.config.neighborhood.radius, self.config.neighborhood.knn) {
            (Some(r), _) => self.index.query_radius(p, r)?,
            (_, Some(k)) => self.index.query_knn(p, k)?,
            _ => return Err(CliError::Usage("one of --radius or --knn is required".into())),
        })
    }

    pub fn local(&self, i: usize) -> CliResult<Local> {
        let found = self.neighbors(i)?;
        let center = self.cloud.positions[i];
        let pts: Vec<Vector3<f64>> = found.indices.iter().map(|&j| self.cloud.positions[j]).collect();
        let r_p = self.config.r_p_abs.unwrap_or(self.config.lambda * found.r_q);
        let phi = self.config.phi;
        let mut local = Local {
            n_neighbors: pts.len(),
            r_q: found.r_q,
            r_p,
            regular: StepFnS1::zero(),
            cumulative: StepFnS1::zero(),
            flagged: false,
            frame: None,
            planar: None,
        };
        if pts.is_empty() {
            return Ok(local);
        }
        if self.cloud.dim == 2 {
            let flat: Vec<Vector2<f64>> = pts.iter().map(|p| p.xy()).collect();
            let q = Neighborhood2D::from_points(center.xy(), &flat)?;
            local.regular = lits2d::lits_with_radius(&q, r_p, phi)?;
            local.cumulative = lits2d::cumulative_lits_with_radius(&q, r_p, phi)?;
            local.planar = Some(q);
        } else {
            let (frame, flagged) = plane_frame(self.config.normal_mode.into(), &center, &pts)?;
            let q = Neighborhood3D::from_points(center, &pts, frame.clone())?;
            local.regular = lits3d::lits_along_normal_with_radius(&q, r_p, phi)?;
            local.cumulative = lits3d::cumulative_along_normal_with_radius(&q, r_p, phi)?;
            local.flagged = flagged;
            local.frame = Some(frame);
        }
        Ok(local)
    }

    pub fn selected<'a>(&self, local: &'a Local) -> &'a StepFnS1 {
        if self.config.cumulative {
            &local.cumulative
        } else {
            &local.regular
        }
    }
}

/// Unit vector of direction `t` in the plane of the LitS.
pub fn direction(local: &Local, t: Angle) -> Vector3<f64> {
    match &local.frame {
        Some(frame) => frame.in_plane(t.radians()),
        None => Vector3::new(t.radians().cos(), t.radians().sin(), 0.0),
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LITS_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("LITS_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Numerical(e.to_string()))
}

/// Maps `f` over `0..n` on the worker pool. Results keep input order and the
/// reported error is the one of the lowest index.
pub fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> CliResult<T> + Sync) -> CliResult<Vec<T>> {
    let results: Vec<CliResult<T>> = thread_pool()?.install(|| (0..n).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}
