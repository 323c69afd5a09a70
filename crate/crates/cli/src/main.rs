use clap::Parser;
use softcover_cli::args::Cli;
use softcover_cli::{configure_threads, emit, execute, CliResult};

fn run() -> CliResult<i32> {
    let cli = Cli::parse();
    configure_threads()?;
    let config = cli.resolve()?;
    let outcome = execute(&config)?;
    emit(&outcome, config.out.as_deref())?;
    Ok(outcome.exit_code)
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
