use std::process::ExitCode;

use clap::Parser;
use sfc_cli::{flush_stdout, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    };
    flush_stdout();
    code
}
