use std::process::exit;

use clap::Parser;
use wigmaj_cli::cli::{EXIT_ERROR, EXIT_OK};
use wigmaj_cli::Cli;

fn main() {
    // clap's own usage errors exit with 2, which is reserved for Incomparable
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            exit(code);
        }
    };
    match wigmaj_cli::run(cli) {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit(EXIT_ERROR);
        }
    }
}
