mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::output::Output;

/// Spin-orbit quantum walks of photons in orbital angular momentum space.
#[derive(Debug, Parser)]
#[command(name = "oamwalk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-photon walk from a localized OAM input.
    Walk(RunArgs),
    /// Quasi-energy bands, group velocities and winding number.
    Bands(RunArgs),
    /// Gaussian wavepackets: propagation, Brillouin sweep or band-superposition split.
    Wavepacket(RunArgs),
    /// Two-photon walk under the indistinguishable and distinguishable models.
    Twophoton(RunArgs),
    /// Phase mask preparing a walker state.
    Hologram(RunArgs),
    /// Radial-mode content of the q-plate output and its propagation overlap.
    Radial(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config; missing keys take their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a dotted key with a JSON value (a bare word is read as a string).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory, created when missing.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

impl RunArgs {
    fn load<T: serde::de::DeserializeOwned>(&self) -> Result<T, CliError> {
        config::load(self.config.as_deref(), &self.set)
    }
}

fn dispatch(command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Walk(a) => commands::walk::run(a.load()?, &a.out),
        Command::Bands(a) => commands::bands::run(a.load()?, &a.out),
        Command::Wavepacket(a) => commands::wavepacket::run(a.load()?, &a.out),
        Command::Twophoton(a) => commands::twophoton::run(a.load()?, &a.out),
        Command::Hologram(a) => commands::hologram::run(a.load()?, &a.out),
        Command::Radial(a) => commands::radial::run(a.load()?, &a.out),
    }
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command).and_then(Output::finish) {
        Ok(paths) => {
            report(&paths);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oamwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
