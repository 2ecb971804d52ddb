use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use erpipe::{LoadedConfig, Pipeline, Stage, StageReport};
use erpipe_core::synthetic::SyntheticSpec;

#[derive(Parser)]
#[command(name = "erpipe", version, about = "Self-supervised entity resolution pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Pipeline config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Maximum number of worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Override every seed in the config (or the generator seed for make-synthetic)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the config's output_dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Use artifacts produced under a different config
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate both datasets
    Ingest,
    /// Embed every tuple
    Embed,
    /// Select candidate pairs by bidirectional top-k
    Block,
    /// Generate positive and negative pseudo-labels
    Label,
    /// Build and export the multi-relational graphs
    Graph,
    /// Train graph tuple embeddings with the margin loss
    TrainGraph,
    /// Train the collaborative classifier
    TrainCollab,
    /// Score every candidate pair
    Predict,
    /// Compare predictions and labels against the ground truth
    Eval,
    /// Report contradicting attribute values of matched pairs
    Anomaly,
    /// Run every stage in order
    RunAll,
    /// Generate a synthetic dataset pair, ground truth and config
    MakeSynthetic(SyntheticArgs),
    /// Compare analytic and numeric gradients of both training losses
    GradCheck,
}

#[derive(Args)]
struct SyntheticArgs {
    #[arg(long, default_value_t = 500)]
    left_size: usize,
    #[arg(long, default_value_t = 500)]
    right_size: usize,
    #[arg(long, default_value_t = 300)]
    matches: usize,
    /// Per-character typo probability in matched right rows
    #[arg(long, default_value_t = 0.1)]
    char_noise: f64,
    /// Per-row probability of swapping two values
    #[arg(long, default_value_t = 0.0)]
    swap_rate: f64,
    /// Per-cell deletion probability
    #[arg(long, default_value_t = 0.05)]
    deletion_rate: f64,
    /// Probability that a product is a near-duplicate variant of an earlier one
    #[arg(long, default_value_t = SyntheticSpec::default().variant_rate)]
    variant_rate: f64,
}

const GRAD_TOLERANCE: f64 = 1e-4;

fn report(r: &StageReport) {
    eprintln!("[{}] {}", r.stage, r.summary);
    if let Some(table) = &r.table {
        print!("{table}");
    }
}

fn run_pipeline(cli: &Cli, stage: Option<Stage>) -> ExitCode {
    let Some(path) = &cli.config else {
        eprintln!("error: --config <path> is required for this command");
        return ExitCode::from(1);
    };
    let mut loaded = match LoadedConfig::load(path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = cli.seed {
        loaded.config.set_seed(seed);
    }
    let pipeline = Pipeline::new(loaded, cli.out.clone(), cli.force);
    let result = match stage {
        Some(s) => pipeline.run_stage(s).map(|r| vec![r]),
        None => {
            let mut done = Vec::new();
            let mut failed = None;
            for &s in &erpipe::STAGES {
                match pipeline.run_stage(s) {
                    Ok(r) => {
                        report(&r);
                        done.push(r);
                    }
                    Err(e) => {
                        failed = Some(e);
                        break;
                    }
                }
            }
            match failed {
                Some(e) => Err(e),
                None => Ok(Vec::new()),
            }
        }
    };
    match result {
        Ok(reports) => {
            reports.iter().for_each(report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn make_synthetic(cli: &Cli, args: &SyntheticArgs) -> ExitCode {
    let spec = SyntheticSpec {
        left_size: args.left_size,
        right_size: args.right_size,
        matches: args.matches,
        char_noise: args.char_noise,
        swap_rate: args.swap_rate,
        deletion_rate: args.deletion_rate,
        variant_rate: args.variant_rate,
        seed: cli.seed.unwrap_or(0),
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("synthetic"));
    match erpipe::synthetic::write_fixture(&dir, &spec) {
        Ok(config) => {
            eprintln!("[make-synthetic] wrote {}", config.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: stage make-synthetic failed: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn grad_check() -> ExitCode {
    let graph = match erpipe_core::gnn::gradient_check(&Default::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: stage grad-check failed: {e}");
            return ExitCode::from(2);
        }
    };
    let collab = erpipe_core::collab::gradient_check(0, 1e-6);
    println!(
        "graph margin loss: max relative error {:.3e} over {} parameters",
        graph.max_relative_error, graph.parameters
    );
    println!(
        "collaborative loss: max relative error {:.3e} over {} parameters",
        collab.max_relative_error, collab.parameters
    );
    let worst = graph.max_relative_error.max(collab.max_relative_error);
    if worst < GRAD_TOLERANCE {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: stage grad-check failed: relative error {worst:.3e} exceeds {GRAD_TOLERANCE:e}");
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let stage = match &cli.command {
        Command::Ingest => Stage::Ingest,
        Command::Embed => Stage::Embed,
        Command::Block => Stage::Block,
        Command::Label => Stage::Label,
        Command::Graph => Stage::Graph,
        Command::TrainGraph => Stage::TrainGraph,
        Command::TrainCollab => Stage::TrainCollab,
        Command::Predict => Stage::Predict,
        Command::Eval => Stage::Eval,
        Command::Anomaly => Stage::Anomaly,
        Command::RunAll => return run_pipeline(&cli, None),
        Command::MakeSynthetic(args) => return make_synthetic(&cli, args),
        Command::GradCheck => return grad_check(),
    };
    run_pipeline(&cli, Some(stage))
}
