mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};

use config::Config;
use stages::{Failure, Run};

const OVERRIDE_HELP: &str = "\
Any configuration key can be overridden as `--section.key value` or
`--section.key=value`, e.g. `--sbm.b_max 20 --train.epochs 1000`.
Exit status: 0 on success, 1 on usage errors, 2 on data errors.";

#[derive(Debug, Parser)]
#[command(name = "citesbm", version, about = "Citation-network communities and growth forecasts", after_help = OVERRIDE_HELP)]
struct Cli {
    /// Configuration file (`[section]` headers, `key = value` lines).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads; 0 lets the pool decide.
    #[arg(short, long, global = true, env = "CITESBM_JOBS")]
    jobs: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Load patents and citations CSV; write graph.dot and ingest.json.
    Ingest,
    /// Fit the nested block model; write hierarchy.json and clustered.dot.
    Cluster,
    /// Count citations per community and year; write series.csv.
    Series,
    /// Train one LSTM per community series; write checkpoints/.
    Train,
    /// Score checkpoints; write report.json, report.csv and predictions.csv.
    Evaluate,
    /// Generate a synthetic corpus (patents.csv, citations.csv, labels).
    Synth,
    /// Run ingest, cluster, series, train and evaluate in order.
    Pipeline,
}

/// Split `--section.key[=value]` overrides from the arguments clap sees.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match body.split_once('=') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if !name.contains('.') {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .ok_or_else(|| format!("override `--{name}` needs a value"))?,
        };
        overrides.push((name, value));
    }
    Ok((rest, overrides))
}

fn run(cli: &Cli, overrides: &[(String, String)]) -> Result<(), Failure> {
    let mut config = Config::default();
    if let Some(path) = &cli.config {
        config
            .parse_file(path)
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    for (k, v) in overrides {
        config.set(k, v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let run = Run::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Ingest => stages::ingest(&run),
        Command::Cluster => stages::cluster(&run),
        Command::Series => stages::build_series(&run),
        Command::Train => stages::train(&run),
        Command::Evaluate => stages::evaluate(&run),
        Command::Synth => stages::synth(&run),
        Command::Pipeline => stages::pipeline(&run),
    })
}

fn main() -> ExitCode {
    let (args, overrides) = match split_overrides(std::env::args().collect()) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
