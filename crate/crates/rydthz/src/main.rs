use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rydthz::{execute, Command};

#[derive(Parser, Debug)]
#[command(name = "rydthz", version, about = "Rydberg THz-to-optical converter experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment config; an empty file selects every default.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Caps the number of worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("rydthz: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command, &cli.config, &cli.out, cli.seed) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rydthz: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
