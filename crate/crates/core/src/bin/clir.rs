use std::process::ExitCode;

use clir_core::cli::{self, CliError};

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match cli::run(std::env::args_os(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => e.exit(),
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
