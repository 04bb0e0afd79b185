use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dyadnet_cli::{run, Command, Overrides};

#[derive(Debug, Parser)]
#[command(name = "dyadnet", version, about = "Dyadic flow-network analyses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline configuration (JSON).
    #[arg(long, global = true, default_value = "dyadnet.json")]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("dyadnet: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
    };
    ExitCode::from(run(cli.command, &cli.config, &overrides) as u8)
}
