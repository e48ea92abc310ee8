//! `fundmat` command-line tool.
//!
//! Exit status: 0 on success, 1 when `check` finds a failing check, 2 for
//! invalid input (model, reference, flags), 3 for numerical failures.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::Failure;
use output::library_error_json;

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.common.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (text, code) = match commands::run(&cli) {
        Ok(text) => (text, 0),
        Err(Failure::CheckFailed(text)) => {
            eprintln!("fundmat: verification failed");
            (text, 1)
        }
        Err(Failure::Library(e)) => {
            eprintln!("fundmat: {}: {e}", e.summary());
            (library_error_json(&e), if e.is_numerical() { 3 } else { 2 })
        }
    };
    if let Err(e) = emit(&cli, &text) {
        eprintln!("fundmat: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
