use clap::Parser;
use fluorocnn::cli::{run, Cli};
use fluorocnn::error::EXIT_OK;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
    std::process::exit(EXIT_OK);
}
