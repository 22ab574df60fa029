//! `mmrecon`: build matrices, simulate reconciliation, run sweeps and
//! reconcile keys between two hosts.

mod commands;
mod settings;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "mmrecon", version, about = "Multi-matrix LDPC key reconciliation")]
struct Cli {
    /// Log progress to stderr (repeat for more detail)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Key-value config file; flags override its entries
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an ensemble of PEG matrices and write alist files plus a manifest
    GenMatrix {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate one (u, e) point and print a detailed report
    Simulate {
        /// Also time the harness with decoding switched off
        #[arg(long)]
        calibrate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep e x u x R and write CSV
    Bench {
        #[command(flatten)]
        common: Common,
    },
    /// Act as Bob: accept one session and decode
    Serve {
        #[arg(long)]
        listen: String,
        #[command(flatten)]
        common: Common,
    },
    /// Act as Alice: connect to Bob and disclose syndromes
    Connect {
        addr: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::GenMatrix { out, common } => {
            resolve(common).and_then(|s| commands::gen_matrix(&s, &out))
        }
        Command::Simulate { calibrate, common } => resolve(common).and_then(|s| commands::simulate(&s, calibrate)),
        Command::Bench { common } => resolve(common).and_then(|s| commands::bench(&s)),
        Command::Serve { listen, common } => resolve(common).and_then(|s| commands::serve(&s, &listen)),
        Command::Connect { addr, common } => resolve(common).and_then(|s| commands::connect(&s, &addr)),
    };
    if let Err(e) = result {
        eprintln!("mmrecon: {e:#}");
        std::process::exit(1);
    }
}

fn resolve(common: Common) -> anyhow::Result<Settings> {
    Settings::resolve(common.settings, common.config.as_deref())
}
