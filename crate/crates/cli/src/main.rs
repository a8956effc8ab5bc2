//! `zetalab`: runs one experiment and writes its results to a directory.

mod config;
mod error;
mod experiments;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::{Args, Config};
use error::CliError;

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Usage(first_line(&e.to_string()))),
    };
    match execute(&args) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn execute(args: &Args) -> Result<serde_json::Value, CliError> {
    let cfg = Config::resolve(args)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let summary = experiments::run(&cfg)?;
    if cfg.experiment == config::Experiment::Constants {
        return Ok(summary["results"].clone());
    }
    Ok(summary)
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").trim_start_matches("error: ").to_string()
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}
