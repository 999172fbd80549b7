mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{emit, CliError};

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Cond(args) => emit(args.out.as_deref(), &commands::cond(args)?),
        Command::Sample(args) => {
            let (matrix, rhs) = commands::sample(args)?;
            emit(args.out.as_deref(), &matrix)?;
            if let (Some(path), Some(rhs)) = (&args.rhs_out, rhs) {
                emit(Some(path), &rhs)?;
            }
            Ok(())
        }
        Command::Exp(exp) => {
            let (text, out) = commands::exp(exp)?;
            emit(out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
