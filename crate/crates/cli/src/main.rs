use std::process::ExitCode;

use clap::Parser;
use mbasis_cli::error::{EXIT_CONFIG, EXIT_OK};
use mbasis_cli::options::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match mbasis_cli::run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
