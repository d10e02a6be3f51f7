use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kaondyn_cli::{commands, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let status = commands::run(&cli, &mut out);
    let _ = out.flush();
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kaondyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
