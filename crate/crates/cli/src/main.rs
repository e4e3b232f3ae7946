use std::process::ExitCode;

use clap::Parser;
use recalib_cli::{run, Cli};

fn main() -> ExitCode {
    let cfg = Cli::parse().into_config();
    match run(&cfg) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
