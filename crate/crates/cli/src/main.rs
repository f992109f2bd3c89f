use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gabor_stab_cli::{load_config, run_config, CliError, RunContext};

/// Run a JSON-configured experiment and write its results under `--out`.
#[derive(Debug, Parser)]
#[command(name = "gabor-stab", version, about)]
struct Cli {
    /// Experiment configuration (JSON object tagged by "command").
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, global = true, env = "GGR_THREADS")]
    threads: Option<usize>,
    /// Replaces every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Sample a test signal to a GGR1 file.
    Gen,
    /// Gabor transform and spectrogram of a signal.
    Gabor,
    /// Cheeger constant of a weight.
    Cheeger,
    /// Log-derivative ball norms of an entire function.
    Entire,
    /// Stability report or instability sweep.
    Stability,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Gen => "gen",
            Self::Gabor => "gabor",
            Self::Cheeger => "cheeger",
            Self::Entire => "entire",
            Self::Stability => "stability",
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let config = load_config(path)?;
    if let Some(cmd) = cli.command {
        if cmd.name() != config.command() {
            return Err(CliError::Config(format!(
                "subcommand `{}` does not match config command `{}`",
                cmd.name(),
                config.command()
            )));
        }
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    run_config(&config, &RunContext { out_dir: cli.out.clone(), seed: cli.seed })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gabor-stab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
