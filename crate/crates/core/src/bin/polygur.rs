use clap::Parser;
use polygur::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
