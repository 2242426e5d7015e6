use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use walkoff_cli::cmd::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match cmd::run(&cli) {
        Ok(output) => {
            print!("{}", output.text);
            let _ = std::io::stdout().flush();
            // Wall-clock time goes to stderr so report bytes stay identical
            // across reruns.
            eprintln!("completed in {:.3}s", started.elapsed().as_secs_f64());
            ExitCode::from(output.exit_code as u8)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
