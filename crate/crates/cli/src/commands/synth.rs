use lits::descriptors::{corner_sweep, kappa_sweep, line_sweep, CrossLaw, SweepKind, SweepRow};

use crate::args::{CrossLawArg, SynthArgs, SynthKind};
use crate::error::CliResult;
use crate::format::{Record, Value};
use crate::output::write_records;

fn record(kind: SweepKind, row: &SweepRow) -> Record {
    let mut r: Record = vec![
        (kind.column(), Value::Num(row.key)),
        ("lambda", Value::Num(row.lambda)),
        ("phi", Value::Num(row.phi)),
        ("n", Value::Int(row.n as u64)),
        ("zero_length", Value::Num(row.zero_length)),
        ("bound", Value::opt(row.bound)),
        ("eps", Value::opt(row.eps)),
        ("tv", Value::Num(row.tv)),
        ("max", Value::Int(row.max.into())),
        ("unlit", Value::Num(row.unlit)),
    ];
    if kind == SweepKind::Width {
        r.insert(1, ("direction", Value::opt(row.direction)));
    }
    r
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let (kind, rows) = match args.kind {
        SynthKind::Corner if args.kappas.is_empty() => (
            SweepKind::Alpha,
            corner_sweep(&args.alphas, &args.lambdas, args.phi, args.n, args.seed)?,
        ),
        SynthKind::Corner => (
            SweepKind::Kappa,
            kappa_sweep(&args.kappas, &args.lambdas, args.phi, args.n, args.seed)?,
        ),
        SynthKind::Line => {
            let law = match args.cross_law {
                CrossLawArg::Uniform => CrossLaw::Uniform,
                CrossLawArg::Triangular => CrossLaw::Triangular,
            };
            let mut rows = Vec::new();
            // one seed stream per ball ratio keeps rows independent of the list order
            for (k, &lambda) in args.lambdas.iter().enumerate() {
                let seed = args.seed.wrapping_add(k as u64);
                rows.extend(line_sweep(&args.widths, &args.directions, lambda, args.phi, args.n, law, seed)?);
            }
            (SweepKind::Width, rows)
        }
    };
    let records: Vec<Record> = rows.iter().map(|r| record(kind, r)).collect();
    write_records(args.output.as_deref(), &records)
}
