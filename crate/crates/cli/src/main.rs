use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use fdci_cli::args::{Cli, SEED_ENV};
use fdci_cli::run::execute;
use fdci_cli::UsageError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("fdci: usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("fdci: error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let (settings, output) = execute(&cli.command, env_seed.as_deref())?;
    match &settings.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            output.write_to(settings.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            output.write_to(settings.format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
