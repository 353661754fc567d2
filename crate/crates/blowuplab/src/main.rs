use std::process::ExitCode;

use blowuplab::cli::Cli;
use blowuplab::commands::dispatch;
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
