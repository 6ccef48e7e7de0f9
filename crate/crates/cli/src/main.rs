use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use uofdm_cli::{exit_code, init_threads, run, Cli, EXIT_PARAM};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_PARAM as u8);
    }
    // argv[0] varies with how the binary is invoked; keep output reproducible
    let command_line = std::iter::once("uofdm".to_string())
        .chain(std::env::args().skip(1))
        .collect::<Vec<_>>()
        .join(" ");
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match run(&cli, &command_line, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    let _ = lock.flush();
    ExitCode::from(code as u8)
}
