use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use cellfree_coexist::config::{RawConfig, SimConfig};
use cellfree_coexist::experiment::run_to_dir;
use cellfree_coexist::output::{self, read_results, summarize, write_summary};
use cellfree_coexist::Result;

/// Cell-free massive MIMO downlink simulator for eMBB/URLLC coexistence.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Sum-SE comparison of MR and LP-MMSE with two power policies.
    Fig1(PresetArgs),
    /// LP-MMSE only, all strategies.
    Fig2(PresetArgs),
    /// URLLC availability with 16-antenna APs and two slots.
    Fig3(PresetArgs),
    /// Recompute summary.csv and ecdf.csv from results.csv.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to the target stored in the directory's config.json.
        #[arg(long)]
        eps_target: Option<f64>,
    },
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn run_preset(name: &str, args: PresetArgs) -> Result<()> {
    let raw = RawConfig {
        preset: Some(name.into()),
        n_drops: args.drops,
        n_blocks: args.blocks,
        master_seed: args.seed,
        ..RawConfig::default()
    };
    let cfg = SimConfig::from_raw(&raw)?;
    run_to_dir(&cfg, args.workers, &args.out)?;
    Ok(())
}

fn stored_eps_target(dir: &std::path::Path) -> Option<f64> {
    let text = std::fs::read_to_string(dir.join(output::CONFIG_FILE)).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    v.get("eps_target")?.as_f64()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            workers,
        } => RawConfig::from_path(&config).and_then(|mut raw| {
            if seed.is_some() {
                raw.master_seed = seed;
            }
            let cfg = SimConfig::from_raw(&raw)?;
            run_to_dir(&cfg, workers, &out).map(|_| ())
        }),
        Command::Fig1(a) => run_preset("fig1", a),
        Command::Fig2(a) => run_preset("fig2", a),
        Command::Fig3(a) => run_preset("fig3", a),
        Command::Summarize { input, eps_target } => (|| {
            let rows = read_results(&input.join(output::RESULTS_FILE))?;
            let target = eps_target.or_else(|| stored_eps_target(&input)).unwrap_or(1e-5);
            let summary = summarize(&rows, target);
            if summary.is_empty() {
                log::warn!("no result rows; writing an empty summary");
            }
            write_summary(&input, &summary)
        })(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
