mod args;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, FileConfig};
use crate::run::Failure;

const EXIT_DATA: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };

    let config = match cli.config.as_deref().map(FileConfig::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(message) => return report(Failure::Usage(message)),
    };

    match run::execute(cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => report(failure),
    }
}

fn report(failure: Failure) -> ExitCode {
    let (kind, message, code) = match failure {
        Failure::Usage(message) => ("Usage", message, EXIT_USAGE),
        Failure::Data { kind, message } => (kind, message, EXIT_DATA),
    };
    let record = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{record}");
    ExitCode::from(code)
}
