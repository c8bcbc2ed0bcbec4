use std::process::ExitCode;

use bmatch_cli::{run_experiment, Args, RunConfig};
use clap::Parser;

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match RunConfig::from_args(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_experiment(&config) {
        Ok(r) => {
            println!(
                "{}: value={} edges={} rounds={} feasible={}",
                r.algorithm,
                r.value,
                r.matching.len(),
                r.rounds_total,
                r.feasible
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("config: {}", config.echo());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
