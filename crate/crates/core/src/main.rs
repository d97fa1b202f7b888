use std::process::ExitCode;

use clap::Parser;
use pbergman::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
