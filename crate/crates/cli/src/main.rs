use std::path::PathBuf;

use clap::{Parser, Subcommand};

use mfgp_cli::{cmd_bench, cmd_predict, cmd_train, BenchArgs, PredictArgs, TrainArgs};

/// Multi-fidelity gradient-enhanced GP surrogates: benchmarks, training and
/// prediction.
#[derive(Parser)]
#[command(name = "mfgp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named benchmark case and write report.csv / summary.csv
    Bench {
        /// Case name: 1d1, 1d2, branin, oscillator, power, or file
        #[arg(long)]
        case: String,
        /// Comma-separated list: kriging,gekriging,cokriging,gecokriging
        #[arg(long, default_value = "gekriging,cokriging,gecokriging")]
        models: String,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory for the CSV reports
        #[arg(long)]
        out: PathBuf,
        /// key=value overrides for the optimizer and search box
        #[arg(long)]
        config: Option<PathBuf>,
        /// Covariance jitter in [0, 1e-6]
        #[arg(long)]
        alpha: Option<f64>,
        /// Tabulated data file (required for --case file)
        #[arg(long)]
        input: Option<PathBuf>,
        /// Ingest gradients as central differences with this step
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// Train a model on tabulated data and write a model file
    Train {
        /// Tabulated input data
        #[arg(long)]
        input: PathBuf,
        /// kriging, gekriging, cokriging or gecokriging
        #[arg(long)]
        model: String,
        /// Output model file (JSON)
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Ingest gradients as central differences with this step
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// Evaluate a trained model on a grid or a query file
    Predict {
        /// Model file written by `train`
        #[arg(long)]
        model_file: PathBuf,
        /// Per-dimension start:end:count specs joined by commas, e.g. 0:1:101
        #[arg(long)]
        grid: Option<String>,
        /// File with one comma-separated coordinate row per query point
        #[arg(long)]
        points: Option<PathBuf>,
        /// Output CSV
        #[arg(long)]
        out: PathBuf,
    },
}

/// `MFGP_THREADS` caps worker parallelism; 0 or unset means automatic.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("MFGP_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench {
            case,
            models,
            runs,
            seed,
            out,
            config,
            alpha,
            input,
            fd_step,
        } => cmd_bench(&BenchArgs {
            case,
            models,
            runs,
            seed,
            out,
            config,
            alpha,
            input,
            fd_step,
        }),
        Command::Train {
            input,
            model,
            out,
            config,
            alpha,
            seed,
            fd_step,
        } => cmd_train(&TrainArgs {
            input,
            model,
            out,
            config,
            alpha,
            seed,
            fd_step,
        }),
        Command::Predict {
            model_file,
            grid,
            points,
            out,
        } => cmd_predict(&PredictArgs {
            model_file,
            grid,
            points,
            out,
        }),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
