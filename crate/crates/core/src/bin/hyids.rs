use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use hyids::classifiers::{self, ClassifierSpec};
use hyids::datasets::SchemaName;
use hyids::experiment::{
    self, compare, emit_report, parse_report, run_matrix, DatasetConfig, ExperimentConfig, FitnessConfig,
    MatrixConfig, DATA_ROOT_ENV,
};
use hyids::fitness::FitnessMode;
use hyids::optimizers::{self, OptimizerSpec};

#[derive(Parser)]
#[command(name = "hyids", version, about = "Wrapper feature selection for intrusion detection datasets")]
struct Cli {
    /// Directory that relative dataset paths are resolved against.
    #[arg(long, global = true, env = DATA_ROOT_ENV)]
    data_root: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(Box<RunArgs>),
    /// Run every combination listed in a matrix config.
    Matrix {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare reports that share a dataset and classifier.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Print CSV instead of an aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// List the registered classifiers, optimizers and schemas.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config. Flags given alongside it override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<SchemaName>,
    /// Training data file(s) or directories of CSV files.
    #[arg(long, num_args = 1..)]
    data: Vec<PathBuf>,
    /// Separate test file(s); disables the random split.
    #[arg(long, num_args = 1..)]
    test_data: Vec<PathBuf>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_fes: Option<usize>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Use k-fold cross-validation with this many folds as the fitness.
    #[arg(long, conflicts_with = "holdout")]
    folds: Option<usize>,
    /// Use a holdout of this fraction of the training split as the fitness.
    #[arg(long)]
    holdout: Option<f64>,
    /// Per-class row cap; 0 disables.
    #[arg(long)]
    downsample: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    label_column: Option<String>,
    /// Columns to drop, replacing the schema's list.
    #[arg(long, num_args = 1..)]
    drop: Option<Vec<String>>,
    /// Report path. A `.curve.csv` file is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(a: RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let Some(schema) = a.dataset else {
                bail!("either --config or --dataset is required");
            };
            if a.data.is_empty() {
                bail!("--data is required with --dataset");
            }
            ExperimentConfig::new(
                DatasetConfig::new(schema, a.data.clone()),
                OptimizerSpec::None,
                ClassifierSpec::default(),
            )
        }
    };
    let ds = &mut cfg.dataset;
    if let Some(schema) = a.dataset {
        ds.schema = schema;
    }
    if !a.data.is_empty() {
        ds.paths = a.data;
    }
    if !a.test_data.is_empty() {
        ds.test_paths = a.test_data;
    }
    if let Some(v) = a.downsample {
        ds.downsample = v;
    }
    if let Some(v) = a.train_fraction {
        ds.train_fraction = v;
    }
    if a.label_column.is_some() {
        ds.label_column = a.label_column;
    }
    if a.drop.is_some() {
        ds.drop_columns = a.drop;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(name) = &a.classifier {
        cfg.classifier = classifiers::registry().spec(name)?;
    }
    if let Some(name) = &a.optimizer {
        cfg.optimizer = optimizers::registry().spec(name)?;
    }
    match &mut cfg.optimizer {
        OptimizerSpec::Evo(e) => {
            if let Some(v) = a.max_fes {
                e.max_fes = v;
            }
            if let Some(v) = a.particles {
                e.n_particles = v;
            }
        }
        OptimizerSpec::Gwo(g) => {
            if let Some(v) = a.iterations {
                g.n_iterations = v;
            }
            if let Some(v) = a.population {
                g.population_size = v;
            }
        }
        OptimizerSpec::None => {}
    }
    let mode = match (a.folds, a.holdout) {
        (Some(folds), _) => Some(FitnessMode::KfoldCv { folds }),
        (_, Some(validation_fraction)) => Some(FitnessMode::Holdout { validation_fraction }),
        _ => None,
    };
    if let Some(mode) = mode {
        let classifier = cfg.fitness.take().and_then(|f| f.classifier);
        cfg.fitness = Some(FitnessConfig {
            mode: Some(mode),
            classifier,
        });
    }
    if a.out.is_some() {
        cfg.output.report = a.out;
    }
    Ok(cfg)
}

fn print_summary(r: &experiment::ExperimentReport) {
    let s = &r.metrics.scores;
    println!(
        "{} {} {}: accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4} features {}/{}",
        r.dataset_name(),
        r.classifier_kind(),
        r.optimizer_kind(),
        r.metrics.accuracy,
        s.macro_precision,
        s.macro_recall,
        s.macro_f1,
        r.features_after,
        r.features_before,
    );
}

fn run(cli: Cli) -> Result<()> {
    if let Some(root) = &cli.data_root {
        std::env::set_var(DATA_ROOT_ENV, root);
    }
    match cli.command {
        Command::Run(args) => {
            let cfg = build_config(*args)?;
            let report = experiment::run_experiment(&cfg)?;
            match &cfg.output.report {
                Some(path) => {
                    emit_report(&report, path)?;
                    print_summary(&report);
                    println!("report written to {}", path.display());
                }
                None => print!("{}", report.to_text()),
            }
        }
        Command::Matrix { config } => {
            let cfg = MatrixConfig::load(&config)?;
            let outcome = run_matrix(&cfg)?;
            for r in &outcome.reports {
                print_summary(r);
            }
            println!("summary written to {}", outcome.summary_path.display());
        }
        Command::Compare { reports, csv } => {
            let mut parsed = Vec::with_capacity(reports.len());
            for path in &reports {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                let report = parse_report(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                parsed.push(report);
            }
            let c = compare(&parsed)?;
            print!("{}", if csv { c.to_csv() } else { c.to_table() });
        }
        Command::List => {
            println!("classifiers: {}", classifiers::registry().names().collect::<Vec<_>>().join(", "));
            println!("optimizers: {}", optimizers::registry().names().collect::<Vec<_>>().join(", "));
            let schemas: Vec<String> = SchemaName::ALL.iter().map(|s| s.to_string()).collect();
            println!("schemas: {}", schemas.join(", "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hyids: error: {e}");
            ExitCode::FAILURE
        }
    }
}
