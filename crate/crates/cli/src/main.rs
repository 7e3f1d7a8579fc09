mod args;
mod commands;
mod config;
mod pipeline;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use crate::args::Cli;

/// Failure classes, one exit code each.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Domain(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Domain(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Domain(m) => m,
        }
    }
}

impl From<hash2vec::Error> for Failure {
    fn from(e: hash2vec::Error) -> Self {
        use hash2vec::Error as E;
        match e {
            E::Io(_) | E::Ingest { .. } | E::Parse { .. } => Failure::Io(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn run(argv: Vec<OsString>) -> Result<(), Failure> {
    let names: Vec<String> = Cli::command()
        .get_subcommands()
        .flat_map(|c| std::iter::once(c.get_name().to_owned()).chain(c.get_all_aliases().map(str::to_owned)))
        .collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let argv = config::expand(argv, &names)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(Failure::Usage(first.trim_start_matches("error: ").to_owned()));
        }
    };
    commands::dispatch(cli.command)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hash2vec: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
