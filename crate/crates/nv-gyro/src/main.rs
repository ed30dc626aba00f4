use clap::Parser;
use nv_gyro::cli::{execute, Cli};

/// Exit codes: 0 success, 2 usage errors (raised by the argument parser),
/// 3 any domain, configuration, or I/O failure.
fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(3);
    }
}
