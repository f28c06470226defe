use std::process::ExitCode;

use clap::Parser;
use deeplrr_cli::args::Cli;
use deeplrr_cli::commands::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
