use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rocsim::harness::{run_experiment, ExperimentConfig};
use rocsim::ingest::read_idx;

#[derive(Parser)]
#[command(name = "rocsim", version, about = "Pointwise ROC optimization experiments for similarity learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Replace the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Replace the output directory from the config file.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV and JSON artifacts.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a config file without running it.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the header of an IDX file.
    IdxInfo { file: PathBuf },
}

fn load(path: &PathBuf, o: &Overrides) -> anyhow::Result<ExperimentConfig> {
    let mut cfg =
        ExperimentConfig::from_path(path).with_context(|| format!("reading config {}", path.display()))?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(w) = o.workers {
        cfg.workers = Some(w);
    }
    if let Some(d) = &o.output_dir {
        cfg.output_dir = d.clone();
    }
    cfg.validate().context("invalid config")?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let summary = run_experiment(&cfg)
                .with_context(|| format!("{} failed; see {}", cfg.experiment.as_str(), cfg.output_dir.display()))?;
            for f in &summary.files {
                println!("{}", f.display());
            }
        }
        Command::Validate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            println!("{}: ok ({})", config.display(), cfg.experiment.as_str());
        }
        Command::IdxInfo { file } => {
            let t = read_idx(&file).with_context(|| format!("reading {}", file.display()))?;
            let kind = if t.dims.len() == 1 { "labels" } else { "images" };
            println!("{}", serde_json::json!({ "kind": kind, "magic": format!("{:#010x}", t.magic()), "dims": t.dims }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
