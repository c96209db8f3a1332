use clap::Parser;

use mkmr_core::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("mkmr: {}: {e}", e.class());
        std::process::exit(e.exit_code());
    }
}
