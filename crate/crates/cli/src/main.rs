mod args;
mod commands;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use run::{Run, UsageError};

const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_IO: u8 = 4;

fn execute(command: &Command) -> anyhow::Result<()> {
    let workers = command.common().workers;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    pool.install(|| {
        let mut run = Run::start(command)?;
        let summary = match command {
            Command::Census(a) => commands::census(a, &mut run)?,
            Command::Heuristics(a) => commands::heuristics(a, &mut run)?,
            Command::Orbits(a) => commands::orbits(a, &mut run)?,
            Command::Endo(a) => commands::endo(a, &mut run)?,
            Command::Cq(a) => commands::cq(a, &mut run)?,
            Command::Interp(a) => commands::interp(a, &mut run)?,
            Command::Tfp(a) => commands::tfp(a, &mut run)?,
        };
        run.finish(summary)
    })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<selfpower::Error>() {
            return match e {
                selfpower::Error::Resource { .. } => EXIT_RESOURCE,
                selfpower::Error::Domain(_) => EXIT_USAGE,
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    1
}

fn main() -> ExitCode {
    // clap exits with status 2 on bad flags
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
