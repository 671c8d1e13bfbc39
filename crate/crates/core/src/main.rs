//! Command-line surface. Exit codes: 0 success, 1 verification failure,
//! 2 configuration error, 3 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use middlegan_lab::config::{parse_config, ExperimentConfig, ExperimentKind};
use middlegan_lab::runner::{plot_files, run_experiment};
use middlegan_lab::Error;

#[derive(Parser)]
#[command(
    name = "middlegan-lab",
    version,
    about = "Two-discriminator GAN laboratory: generator-in-the-middle training, \
             divergence oracles, and the domain-adaptation pipeline on synthetic 2-D domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train per-class generators; emit histories, samples, and plots
    Train(RunArgs),
    /// Solve the divergence centroid of the two domains on a density grid
    Centroid(RunArgs),
    /// Check the closed-form identity and centroid optimality gates
    Verify(RunArgs),
    /// Run the adaptation pipeline against the source-only baseline
    Adapt(RunArgs),
    /// Compare classifiers trained with plain versus rotated fake samples
    Agnostic(RunArgs),
    /// Finite-difference gradient verification over random architectures
    Gradcheck(RunArgs),
    /// Render dataset CSV files into one scatter SVG
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured seeds, e.g. --seed 1,2,3
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    /// Reject unknown config keys and sections (default)
    #[arg(long, default_value_t = true, overrides_with = "no_strict")]
    strict: bool,
    /// Accept and ignore unknown config keys and sections
    #[arg(long)]
    no_strict: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Dataset CSV files (header `x0,x1,label,domain`)
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Train(a) => (ExperimentKind::GanTrain, a),
        Command::Centroid(a) => (ExperimentKind::OracleCentroid, a),
        Command::Verify(a) => (ExperimentKind::VerifyIdentity, a),
        Command::Adapt(a) => (ExperimentKind::Adaptation, a),
        Command::Agnostic(a) => (ExperimentKind::Agnosticism, a),
        Command::Gradcheck(a) => (ExperimentKind::Gradcheck, a),
        Command::Plot(a) => {
            return match plot_files(&a.inputs, &a.out) {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => report(e),
            }
        }
    };
    match run(kind, args) {
        Ok(code) => code,
        Err(e) => report(e),
    }
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::InvalidConfig {
        line: None,
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let strict = !args.no_strict && args.strict;
    let mut cfg: ExperimentConfig = parse_config(&text, strict)?;
    if cfg.kind != kind {
        return Err(Error::config(format!(
            "config kind \"{}\" does not match the `{}` subcommand",
            cfg.kind.as_str(),
            kind.as_str()
        )));
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    if let Some(seeds) = args.seed {
        cfg.seeds = seeds;
        cfg.validate()?;
    }

    let outputs = run_experiment(&cfg)?;
    println!("experiment: {}", outputs.report.kind);
    println!("config digest: {}", outputs.report.config_digest);
    for (name, stat) in &outputs.report.aggregate {
        println!(
            "{name}: median {} (min {}, max {})",
            fmt_metric(stat.median),
            fmt_metric(stat.min),
            fmt_metric(stat.max)
        );
    }
    for file in &outputs.files {
        println!("wrote {}", file.display());
    }
    if let Some(detail) = outputs.verification_failure {
        eprintln!("verification failed: {detail}");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn fmt_metric(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-3 && v.abs() < 1e6) {
        format!("{v:.6}")
    } else {
        format!("{v:.3e}")
    }
}

fn report(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::InvalidConfig { .. } => ExitCode::from(2),
        Error::VerificationFailed(_) => ExitCode::from(1),
        _ => ExitCode::from(3),
    }
}
