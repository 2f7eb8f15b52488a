//! Command-line front end: `compute`, `curve`, `figure` and `verify`.

pub mod config;
pub mod emit;
pub mod error;
pub mod run;

pub use config::{Format, RunConfig};
pub use error::CliError;
pub use run::{run, ReportBundle};

/// Runs one invocation, writing the artifact to `--out` or `stdout`.
pub fn execute(config: &RunConfig, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let bundle = run(config)?;
    let io = |path: &std::path::Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    let bytes = emit::render(&bundle, config.format).map_err(io(std::path::Path::new("<render>")))?;
    match &config.out {
        Some(path) => std::fs::write(path, &bytes).map_err(io(path))?,
        None => emit::write_to(stdout, &bytes).map_err(io(std::path::Path::new("<stdout>")))?,
    }
    if bundle.failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(bundle.failed))
    }
}

/// Sizes the global thread pool from `WAVES_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WAVES_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("WAVES_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}
