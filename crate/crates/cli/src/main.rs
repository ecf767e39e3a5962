use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use persuasion_lab::{configure_threads, emit, run, Cli, CliError, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    let config = RunConfig::from_cli(cli)?;
    let outcome = run(&config)?;
    emit(&config, &outcome)?;
    if outcome.exit_code == 3 {
        eprintln!("error: theorem-violation reported; see the report for diagnostics");
    }
    Ok(outcome.exit_code)
}
