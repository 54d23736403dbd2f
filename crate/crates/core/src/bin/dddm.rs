use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use dddm::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let name = args.command.name();
    match cli::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = cli::exit_code(&e);
            let err = Err::<(), _>(e).with_context(|| format!("dddm {name} failed")).unwrap_err();
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
