use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wmc_core::patterns::RatingsFormat;
use wmc_harness::figures::{weight_entries, write_weight_entries};
use wmc_harness::{certify, run, write_csv, ExperimentConfig, ExperimentKind, HarnessError, Preset};

#[derive(Parser)]
#[command(name = "mc", version, about = "Weighted matrix completion experiments and pattern certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write its CSV.
    Run {
        #[arg(value_enum)]
        experiment: ExperimentKind,
        /// TOML file whose keys override the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Preset::Desk)]
        preset: Preset,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ratings file for real_pattern.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<RatingsFormat>,
    },
    /// Print λ, μ, eigenvalues and plug-in bounds for a pattern.
    Certify {
        #[arg(long)]
        pattern: PathBuf,
        /// Weight file; the best rank-1 approximation of the pattern otherwise.
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Pretty-printed JSON (the output is JSON either way).
        #[arg(long)]
        json: bool,
    },
    /// Write the entries of the two-plateau weight vector as CSV.
    Weights {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: f64,
        /// Lower plateau heights.
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<RatingsFormat, String> {
    match s {
        "movielens100k" | "movielens" => Ok(RatingsFormat::MovieLens100k),
        "jester_csv" | "jester" => Ok(RatingsFormat::JesterCsv),
        _ => Err(format!("unknown format {s:?}; expected movielens100k or jester_csv")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            experiment,
            config,
            preset,
            seed,
            out,
            dataset,
            format,
        } => {
            let text = config
                .map(|p| {
                    std::fs::read_to_string(&p)
                        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", p.display())))
                })
                .transpose()?;
            let mut cfg = ExperimentConfig::resolve_with(experiment, preset, text.as_deref(), |c| {
                if let Some(s) = seed {
                    c.master_seed = s;
                }
                if dataset.is_some() {
                    c.dataset = dataset.clone();
                }
                if format.is_some() {
                    c.dataset_format = format;
                }
            })?;
            if out.is_some() {
                cfg.output = out;
            }
            if experiment == ExperimentKind::Certify {
                return print_json(&certify(&cfg)?, true);
            }
            let result = run(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    let mut f = BufWriter::new(File::create(path)?);
                    write_csv(&mut f, &result.header, &result.rows)?;
                    f.flush()?;
                }
                None => write_csv(io::stdout().lock(), &result.header, &result.rows)?,
            }
            Ok(())
        }
        Command::Certify {
            pattern,
            weight,
            rank,
            beta,
            sigma,
            json,
        } => {
            let cfg = ExperimentConfig::resolve_with(ExperimentKind::Certify, Preset::Desk, None, |c| {
                c.pattern = Some(pattern.clone());
                c.weight = weight.clone();
                c.rank = rank;
                c.beta = beta;
                c.sigma = sigma;
            })?;
            print_json(&certify(&cfg)?, json)
        }
        Command::Weights { d, m, y, out } => {
            let entries = weight_entries(d, m, &y)?;
            match out {
                Some(path) => write_weight_entries(BufWriter::new(File::create(path)?), &entries),
                None => write_weight_entries(io::stdout().lock(), &entries),
            }
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T, pretty: bool) -> Result<(), HarnessError> {
    let text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) }
        .map_err(|e| HarnessError::Data(e.to_string()))?;
    println!("{text}");
    Ok(())
}
