use lits::pcio::{self, Colormap, PointCloud};
use lits::surroundedness::{classify_step, threshold_from_pct, BoundaryKind};
use nalgebra::Vector3;

use crate::args::BoundaryArgs;
use crate::error::CliResult;
use crate::format::{vec3_list, Record, Value};
use crate::output::write_records;
use crate::pipeline::{direction, par_map, Pipeline};

pub fn run(args: &BoundaryArgs) -> CliResult<()> {
    let config = &args.config;
    let pipeline = Pipeline::load(config)?;
    let labels = par_map(pipeline.cloud.len(), |i| {
        let local = pipeline.local(i)?;
        let i0 = if config.cumulative {
            threshold_from_pct(local.cumulative.max_value(), config.threshold_pct)
        } else {
            1
        };
        let label = classify_step(&local.cumulative, i0)?;
        let outside: Vec<Vector3<f64>> = label.outside_directions.iter().map(|&t| direction(&local, t)).collect();
        let boundary = label.kind == BoundaryKind::Boundary;
        let record: Record = vec![
            ("index", Value::Int(i as u64)),
            ("boundary", Value::Bool(boundary)),
            ("threshold", Value::Int(i0.into())),
            ("n_neighbors", Value::Int(local.n_neighbors as u64)),
            ("flagged", Value::Bool(local.flagged)),
            ("outside_directions", Value::Raw(vec3_list(&outside))),
        ];
        Ok((record, boundary))
    })?;
    let records: Vec<Record> = labels.iter().map(|l| l.0.clone()).collect();
    write_records(config.output.as_deref(), &records)?;
    if let Some(path) = &args.ply_out {
        let mut cloud = PointCloud {
            attributes: Default::default(),
            ..pipeline.cloud.clone()
        };
        cloud.set_attribute("boundary", labels.iter().map(|l| if l.1 { 1.0 } else { 0.0 }).collect())?;
        pcio::write_ply_colored(&cloud, "boundary", Colormap::GreenRed, path)?;
    }
    Ok(())
}
