mod args;
mod commands;
mod error;
mod format;
mod output;
mod pipeline;

use clap::Parser;

use args::{Cli, Command};
use error::CliResult;

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Compute(a) => commands::compute::run(a),
        Command::Boundary(a) => commands::boundary::run(a),
        Command::Synth(a) => commands::synth::run(a),
        Command::Invert(a) => commands::invert::run(a),
        Command::PhiStar(a) => commands::phi_star::run(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("lits: {e}");
        std::process::exit(e.exit_code());
    }
}
