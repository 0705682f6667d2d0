mod args;
mod commands;
mod output;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Format};
use commands::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let outcome = match commands::run(cli.command) {
        Ok(o) => o,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Domain(e)) => {
            let doc = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{doc}");
            return ExitCode::from(1);
        }
    };

    let text = match cli.format {
        Format::Json => outcome.to_json(),
        Format::Csv => match outcome.to_csv() {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: writing csv: {e}");
                return ExitCode::from(1);
            }
        },
    };

    let written = match &cli.output {
        Some(path) => {
            fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
