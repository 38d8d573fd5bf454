use lits::pcio;
use lits::surroundedness::phi_star;
use lits::{Neighborhood2D, PolarNeighbor};
use nalgebra::Vector2;

use crate::args::PhiStarArgs;
use crate::error::{CliError, CliResult};
use crate::format::{num, vec3_list};
use crate::output::write_text;

pub fn run(args: &PhiStarArgs) -> CliResult<()> {
    let cloud = pcio::read_cloud(&args.input)?;
    if cloud.positions.iter().any(|p| p.z != 0.0) {
        return Err(CliError::Input("phi-star expects planar coordinates".into()));
    }
    let pts: Vec<Vector2<f64>> = cloud.positions.iter().map(|p| p.xy()).collect();
    let q = Neighborhood2D::from_points(Vector2::zeros(), &pts)?;
    let r_p = match args.r_p_abs {
        Some(r) if r >= 0.0 && r.is_finite() => r,
        Some(_) => return Err(CliError::Usage("--r-p-abs must be finite and nonnegative".into())),
        None => args.lambda * q.r_q,
    };
    let lit: Vec<PolarNeighbor> = q.neighbors.iter().copied().filter(|n| n.r >= r_p).collect();
    let res = phi_star(&q.neighbors, r_p)?;
    let dirs: Vec<_> = res
        .outside_directions()
        .into_iter()
        .map(|t| nalgebra::Vector3::new(t.radians().cos(), t.radians().sin(), 0.0))
        .collect();
    let witnesses = res.witnesses.map_or("null".to_string(), |(i, j)| format!("[{i},{j}]"));
    let text = format!(
        "{{\"phi_star\":{},\"r_p\":{},\"r_q\":{},\"n_neighbors\":{},\"n_illuminating\":{},\"witnesses\":{witnesses},\"outside_directions\":{}}}\n",
        num(res.phi_star),
        num(r_p),
        num(q.r_q),
        q.len(),
        lit.len(),
        vec3_list(&dirs)
    );
    write_text(args.output.as_deref(), &text)
}
