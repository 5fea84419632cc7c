use clap::Parser;
use resolvent_lab::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
