use std::process::ExitCode;

use clap::Parser;
use statwintgen_cli::{run, Cli, RunConfig, OUT_DIR_ENV};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(Into::into);
    let result = RunConfig::resolve(cli, out_dir).and_then(|config| run(&config));
    match result {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
