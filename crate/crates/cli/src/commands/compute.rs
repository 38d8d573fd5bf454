use lits::descriptors::{max_abs_slope, percentile_ranks, summarize};
use lits::pcio::{self, PointCloud};
use lits::surroundedness::{phi_star, surroundedness_class_with_radius, threshold_from_pct};
use lits::StepFnS1;

use crate::args::ComputeArgs;
use crate::error::{CliError, CliResult};
use crate::format::{Record, Value};
use crate::output::write_records;
use crate::pipeline::{par_map, Pipeline};

fn smoothed_tv(f: &StepFnS1, samples: usize, window: usize) -> CliResult<f64> {
    let s = f.sample_and_smooth(samples, window)?;
    Ok((0..s.len()).map(|k| (s[(k + 1) % s.len()] - s[k]).abs()).sum())
}

pub fn run(args: &ComputeArgs) -> CliResult<()> {
    let config = &args.config;
    let pipeline = Pipeline::load(config)?;
    let mut records = par_map(pipeline.cloud.len(), |i| {
        let local = pipeline.local(i)?;
        let f = pipeline.selected(&local);
        let summary = summarize(f);
        let threshold = threshold_from_pct(local.n_neighbors as u32, config.threshold_pct);
        let below = local.cumulative.measure_where(|v| v < threshold);
        let smooth = match config.smooth_window {
            0 => None,
            w => Some(smoothed_tv(f, args.samples, w)?),
        };
        let slope = max_abs_slope(f, args.samples, config.smooth_window.max(1))?;
        let (mut star, mut class) = (None, None);
        if let Some(q) = &local.planar {
            if q.neighbors.iter().any(|n| n.r >= local.r_p) {
                star = Some(phi_star(&q.neighbors, local.r_p)?.phi_star);
            }
            if let Some(step) = args.class_step {
                class = Some(surroundedness_class_with_radius(&q.neighbors, local.r_p, step)?);
            }
        }
        let record: Record = vec![
            ("index", Value::Int(i as u64)),
            ("n_neighbors", Value::Int(local.n_neighbors as u64)),
            ("r_q", Value::Num(local.r_q)),
            ("r_p", Value::Num(local.r_p)),
            ("zero_set_length", Value::Num(summary.zero_set_length)),
            ("total_variation", Value::Num(summary.total_variation)),
            ("max_value", Value::Int(summary.max_value.into())),
            ("unlit_proportion", Value::Num(summary.unlit_proportion)),
            ("value_range", Value::Int(summary.value_range.into())),
            ("log_range", Value::Num(summary.log_range)),
            ("below_threshold", Value::Num(below)),
            ("smoothed_tv", Value::opt(smooth)),
            ("tv_percentile", Value::Null),
            ("max_abs_slope", Value::Num(slope)),
            ("phi_star", Value::opt(star)),
            ("surroundedness_class", class.map_or(Value::Null, |c| Value::Int(c.into()))),
            ("flagged", Value::Bool(local.flagged)),
        ];
        Ok((record, smooth.unwrap_or(summary.total_variation)))
    })?;

    if !records.is_empty() {
        let tvs: Vec<f64> = records.iter().map(|r| r.1).collect();
        for ((record, _), p) in records.iter_mut().zip(percentile_ranks(&tvs)?) {
            if let Some(slot) = record.iter_mut().find(|(n, _)| *n == "tv_percentile") {
                slot.1 = Value::Num(p);
            }
        }
    }
    let records: Vec<Record> = records.into_iter().map(|r| r.0).collect();
    write_records(config.output.as_deref(), &records)?;

    if let Some(path) = &args.ply.ply_out {
        let name = args.ply.color_by.as_str();
        let values = records
            .iter()
            .map(|r| r.iter().find(|(n, _)| *n == name).and_then(|(_, v)| v.as_f64()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::Usage(format!("field {name:?} is not numeric for every point")))?;
        let mut cloud = PointCloud {
            attributes: Default::default(),
            ..pipeline.cloud.clone()
        };
        cloud.set_attribute(name, values)?;
        pcio::write_ply_colored(&cloud, name, args.ply.colormap, path)?;
    }
    Ok(())
}
