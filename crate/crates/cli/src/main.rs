use std::path::PathBuf;
use std::process::ExitCode;

use chassis_ris_cli::{commands, CliError, CliResult, ExperimentConfig, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chassis-ris", version, about = "RIS channel shaping experiments")]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration field, e.g. `--set scene.seed=3`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Output directory (input directory for `report`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Replace an existing output directory.
    #[arg(long, global = true)]
    force: bool,

    /// Also render SVG plots.
    #[arg(long, global = true)]
    svg: bool,

    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Number of masks to use, replacing the configured count.
    #[arg(long, global = true)]
    masks: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the selected masks and export a sweep archive.
    Simulate,
    /// Per-frequency spread of |H| across masks and the selected band.
    Characterize,
    /// Search for the mask with the most compact impulse response.
    Optimize,
    /// Summarize an `optimize` output directory.
    Report { dir: Option<PathBuf> },
}

fn run(cli: Cli) -> CliResult<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let opts = RunOptions {
        out: cli.out.clone(),
        force: cli.force,
        svg: cli.svg,
        masks: cli.masks,
    };
    if let Command::Report { dir } = &cli.command {
        let dir = dir
            .clone()
            .or(cli.out)
            .unwrap_or_else(|| PathBuf::from("out").join("optimize"));
        print!("{}", commands::report(&dir)?);
        return Ok(());
    }
    let config = ExperimentConfig::load(cli.config.as_deref(), &cli.set)?;
    match cli.command {
        Command::Simulate => {
            commands::simulate(&config, &opts)?;
        }
        Command::Characterize => {
            commands::characterize(&config, &opts)?;
        }
        Command::Optimize => {
            commands::optimize(&config, &opts)?;
        }
        Command::Report { .. } => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
