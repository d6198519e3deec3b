use clap::Parser;

use rootmirror_cli::{main_impl, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(main_impl(&cli));
}
