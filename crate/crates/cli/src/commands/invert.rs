use lits::transform3d::{invert_cumulative, SphericalCap};

use crate::args::InvertArgs;
use crate::error::{CliError, CliResult};
use crate::format::vec3_list;
use crate::output::write_text;

pub fn run(args: &InvertArgs) -> CliResult<()> {
    if !(args.r_p > 0.0 && args.r_p.is_finite()) {
        return Err(CliError::Usage("--r-p must be positive".into()));
    }
    let text = std::fs::read_to_string(&args.caps)?;
    let caps: Vec<SphericalCap> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", args.caps.display())))?;
    let offsets = invert_cumulative(&caps, args.r_p, args.phi)?;
    write_text(args.output.as_deref(), &format!("{{\"offsets\":{}}}\n", vec3_list(&offsets)))
}
