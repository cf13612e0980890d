//! Binary entry point; all logic lives in the library for testability.

use clap::Parser;

fn main() {
    let cli = qit_core::cli::Cli::parse();
    std::process::exit(qit_core::cli::run(&cli));
}
