mod args;
mod check;
mod commands;
mod failure;
mod output;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::{catalog_listing, Failure};

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::List => {
            print!("{}", catalog_listing());
            Ok(())
        }
        Command::Integrate(a) => commands::integrate(&a),
        Command::Check(a) => check::check(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Order(a) => commands::order(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
