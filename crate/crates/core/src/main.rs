use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use gmssc::harness::{emit_csv, emit_summary, generate_anchored, read_csv, run_experiment, ExperimentConfig};
use gmssc::instance::write_instance;
use gmssc::Error;

/// Environment variable read for log filtering, e.g. `GMSSC_LOG=info`.
const LOG_ENV: &str = "GMSSC_LOG";

#[derive(Parser)]
#[command(name = "gmssc", version, about = "Online min-sum set cover experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an anchored request stream as a JSON instance.
    Generate {
        #[arg(long)]
        n: usize,
        /// Comma-separated 1-based anchor items.
        #[arg(long, value_delimiter = ',', required = true)]
        anchors: Vec<usize>,
        #[arg(long)]
        extra: usize,
        #[arg(long = "T")]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-algorithm summary of a results CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        3
    } else if e.is_desk_scale() {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let table = run_experiment(&cfg)?;
            let summary = emit_summary(&table);
            match out.or(cfg.output.clone()) {
                Some(path) => {
                    emit_csv(&table, &path)?;
                    print!("{summary}");
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    gmssc::harness::table::write_csv(&table, &mut stdout)
                        .map_err(|e| Error::Internal(e.to_string()))?;
                    eprint!("{summary}");
                }
            }
            Ok(if table.failures.iter().any(|f| f.desk_scale) {
                2
            } else if table.failures.is_empty() {
                0
            } else {
                1
            })
        }
        Command::Generate {
            n,
            anchors,
            extra,
            rounds,
            seed,
            out,
        } => {
            let inst = generate_anchored(n, &anchors, extra, rounds, seed)?;
            write_instance(&inst, &out)?;
            Ok(0)
        }
        Command::Summarize { input } => {
            let table = read_csv(&input)?;
            print!("{}", emit_summary(&table));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
