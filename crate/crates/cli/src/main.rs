//! `envtrack`: command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for numeric failures.

mod args;
mod commands;
mod load;
mod report;
mod rows;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Envelope(a) => commands::envelope(a),
        Command::Preproc(a) => commands::preproc(a),
        Command::Decode(a) => commands::decode(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Chance(a) => commands::chance(a),
        Command::Features(a) => commands::features(a),
        Command::Profiles(a) => commands::profiles(a),
        Command::Stats(a) => commands::stats(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Report(a) => report::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
