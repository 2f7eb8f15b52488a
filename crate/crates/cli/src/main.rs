use std::process::ExitCode;

use waves_cli::{configure_threads, execute, RunConfig};

fn main() -> ExitCode {
    let config = match RunConfig::parse_from(std::env::args()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = configure_threads().and_then(|()| execute(&config, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
