use clap::Parser;

use stmatch::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
