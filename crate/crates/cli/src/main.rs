use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dce_cli::{load_config, run, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "dce", version, about = "Photon statistics of a damped, parametrically driven cavity mode")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a config file.
    Run {
        config: PathBuf,
        /// Override the config's mode.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Sweep workers (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Override m_max (`auto` or an integer).
        #[arg(long)]
        m_max: Option<String>,
        /// Reserved; every pipeline is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        mode,
        out_dir,
        workers,
        m_max,
        seed: _,
    } = Cli::parse().command;
    let result = (|| -> Result<_, RunError> {
        let mut cfg = load_config(&config)?;
        if let Some(m) = mode {
            cfg = cfg.with_value("mode", &m)?;
        }
        if let Some(m) = m_max {
            cfg = cfg.with_value("m_max", &m)?;
        }
        run(&cfg, &RunOptions { out_dir, workers })
    })();
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
