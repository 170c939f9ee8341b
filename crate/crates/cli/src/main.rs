use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use nhse_cli::{execute, Cli, CliError};

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Validation(e.render().to_string().trim().to_string())),
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => fail(&CliError::Numerical("validation suite reported failures".into())),
        Err(e) => fail(&e),
    }
}
