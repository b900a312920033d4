use std::io::Write;
use std::process::ExitCode;

use afa_cli::{execute, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            for line in e.diagnostics() {
                eprintln!("error: {line}");
            }
            e.exit_code()
        }
    };
    let _ = lock.flush();
    ExitCode::from(code as u8)
}
