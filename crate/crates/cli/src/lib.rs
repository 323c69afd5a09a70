//! Command-line front end for the `softcover` library.

// Negated float comparisons are deliberate: NaN must fail every validity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use commands::{execute, Outcome};
pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Caps rayon's global pool from `SOFTCOVER_THREADS`, if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("SOFTCOVER_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::validation(
            "SOFTCOVER_THREADS",
            format!("`{raw}` is not a positive integer"),
        )
    })?;
    // A pool that already exists (e.g. in tests) is left as is.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Writes the data document and its sidecar. With `--out -` or no `--out`
/// data goes to stdout and the sidecar to stderr; otherwise the sidecar
/// lands next to the output as `<out>.diagnostics.json`.
pub fn emit(outcome: &Outcome, out: Option<&str>) -> CliResult<()> {
    use std::io::Write;
    let io_err = |path: &str| {
        let path = path.to_string();
        move |source| CliError::Io { path, source }
    };
    match out {
        None | Some("-") => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.data.as_bytes())
                .map_err(io_err("<stdout>"))?;
            stdout.flush().map_err(io_err("<stdout>"))?;
            if let Some(side) = &outcome.sidecar {
                eprint!("{side}");
            }
        }
        Some(path) => {
            std::fs::write(path, &outcome.data).map_err(io_err(path))?;
            if let Some(side) = &outcome.sidecar {
                let side_path = format!("{path}.diagnostics.json");
                std::fs::write(&side_path, side).map_err(io_err(&side_path))?;
            }
        }
    }
    Ok(())
}
