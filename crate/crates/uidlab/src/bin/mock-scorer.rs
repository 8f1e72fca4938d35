use std::io;
use std::process::ExitCode;

use clap::Parser;
use uidlab::mock::{serve, MockOptions};

/// Test scorer speaking the scorer/1 line protocol on stdio.
#[derive(Parser)]
#[command(name = "mock-scorer", version)]
struct Cli {
    #[command(flatten)]
    options: MockOptions,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match serve(&cli.options, io::stdin().lock(), io::stdout().lock()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(status)) => std::process::exit(status),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mock-scorer: {e}");
            ExitCode::FAILURE
        }
    }
}
