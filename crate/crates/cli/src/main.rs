use clap::Parser;

use btsched_cli::args::Cli;
use btsched_cli::commands;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = commands::run(cli.command) {
        // one machine-readable error line, nonzero exit
        eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
        std::process::exit(1);
    }
}
