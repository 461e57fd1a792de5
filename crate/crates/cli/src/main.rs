use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use epm_cli::artifacts::{self, DIAGRAMS_DIR};
use epm_cli::{stages, CliError, CliResult, DiagnoseOptions, ExperimentConfig};
use epm_core::Thresholds;
use log::{error, info};

#[derive(Parser, Debug)]
#[command(name = "epm", version, about = "Expected persistence measure pipeline")]
struct Cli {
    /// Experiment configuration (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the master seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Skip stages whose outputs and configuration hash are unchanged.
    #[arg(long, global = true)]
    resume: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write sample files to <out>/samples.
    Sample,
    /// Compute persistence diagrams for every sample file.
    Diagram {
        /// Directory of point cloud CSVs or PGM images [default: <out>/samples].
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Build the feature matrix, split and template system into <out>.
    Featurize {
        /// Diagram directory [default: <out>/diagrams].
        #[arg(long)]
        diagrams: Option<PathBuf>,
        /// Samples averaged per object.
        #[arg(long, default_value_t = 1)]
        samples_per_object: usize,
    },
    /// Fit the classifier on the training rows in <out>.
    Train,
    /// Score the model in <out> and write metrics.json.
    Evaluate,
    /// Print the OT∞ distance between two measure files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        /// Norm exponent (number or "inf"); defaults to the first file's.
        #[arg(long, value_parser = parse_q)]
        q: Option<f64>,
        /// Write an optimal coupling to this file.
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
    /// Boundedness, UODF and ODUT profiles of a directory of measure files.
    Diagnose {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        odut_eps: f64,
        #[arg(long = "bands", value_delimiter = ',', default_values_t = [1, 10, 100])]
        bands: Vec<u64>,
        #[arg(long, value_parser = parse_q)]
        q: Option<f64>,
        #[arg(long, default_value_t = f64::INFINITY)]
        max_diameter: f64,
        #[arg(long, default_value_t = f64::INFINITY)]
        max_uodf_mass: f64,
        #[arg(long, default_value_t = f64::INFINITY)]
        max_odut_mass: f64,
    },
    /// Run every stage and write the accuracy table and manifest.
    RunExperiment,
}

fn parse_q(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|e| format!("{e}")),
    }
}

fn load_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    let out: &Path = &cli.out;
    match &cli.command {
        Command::Sample => {
            let cfg = load_config(cli)?;
            let files = stages::sample(&cfg, out).map_err(|e| e.in_stage("sample"))?;
            info!("wrote {} sample files", files.len());
        }
        Command::Diagram { input } => {
            let cfg = load_config(cli)?;
            let input = input.clone().unwrap_or_else(|| stages::samples_dir(out));
            let files = stages::diagram(
                &input,
                &out.join(DIAGRAMS_DIR),
                &cfg.filtration(),
                &cfg.homology_degrees,
            )
            .map_err(|e| e.in_stage("diagram"))?;
            info!("wrote {} diagram files", files.len());
        }
        Command::Featurize {
            diagrams,
            samples_per_object,
        } => {
            let cfg = load_config(cli)?;
            let diagrams = diagrams.clone().unwrap_or_else(|| stages::diagrams_dir(out));
            stages::featurize(&diagrams, &cfg, *samples_per_object, out).map_err(|e| e.in_stage("featurize"))?;
        }
        Command::Train => {
            let cfg = load_config(cli)?;
            stages::train(out, &cfg).map_err(|e| e.in_stage("train"))?;
        }
        Command::Evaluate => {
            let (metrics, _) = stages::evaluate(out).map_err(|e| e.in_stage("evaluate"))?;
            print_json(&metrics)?;
        }
        Command::Distance { a, b, q, coupling } => {
            let report = epm_cli::distance(a, b, *q, coupling.as_deref())?;
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Diagnose {
            dir,
            eps,
            odut_eps,
            bands,
            q,
            max_diameter,
            max_uodf_mass,
            max_odut_mass,
        } => {
            let opts = DiagnoseOptions {
                eps: eps.clone(),
                odut_eps: *odut_eps,
                bands: bands.clone(),
                q: *q,
                thresholds: Thresholds {
                    diameter: *max_diameter,
                    uodf_mass: *max_uodf_mass,
                    odut_mass: *max_odut_mass,
                },
            };
            print_json(&epm_cli::diagnose(dir, &opts)?)?;
        }
        Command::RunExperiment => {
            let cfg = load_config(cli)?;
            let manifest = epm_cli::run_experiment(&cfg, out, cli.resume)?;
            let table = std::fs::read_to_string(out.join(artifacts::TABLE_TXT)).map_err(|e| CliError::io(out, e))?;
            print!("{table}");
            info!("{} stages recorded in the manifest", manifest.stages.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            error!("could not size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
