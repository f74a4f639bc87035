//! Command line front end: argument handling, file output and manifests.

pub mod commands;
pub mod error;
pub mod options;
pub mod report;

use error::CliResult;
use options::{Cli, Command};

/// Runs a parsed command line and returns the text to print.
pub fn run(cli: Cli) -> CliResult<String> {
    let (name, args) = match cli.command {
        Command::Run { manifest, out } => return commands::replay(&manifest, out.as_deref()),
        Command::Basis(a) => ("basis", a),
        Command::Test(a) => ("test", a),
        Command::Enumerate(a) => ("enumerate", a),
        Command::Sample(a) => ("sample", a),
    };
    let opts = args.resolve(name)?;
    commands::execute(name, &opts, &args.out)
}
