use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use testbf::{execute, AppError, AppResult, Command, RunConfig};

#[derive(Parser)]
#[command(name = "testbf", version, about = "Model selection with test-based Bayes factors")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, overriding the config (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Report path, overriding the config ("-" for stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Score the model space and select models.
    Select(RunArgs),
    /// Select, then draw g and coefficients for the selected models.
    Sample(RunArgs),
    /// Bootstrap cross-validation of the configured strategy.
    Validate(RunArgs),
    /// Score predicted probabilities against binary outcomes.
    Scores {
        /// CSV with prediction and outcome columns.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "pred")]
        pred: String,
        #[arg(long, default_value = "y")]
        outcome: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_configured(command: Command, args: RunArgs) -> AppResult<()> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(out) = args.out {
        cfg.output.report = (out.as_os_str() != "-").then_some(out);
    }
    let report = execute(command, &cfg)?;
    report.write(cfg.output.report.as_deref(), cfg.output.exports.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Select(a) => run_configured(Command::Select, a),
        Cmd::Sample(a) => run_configured(Command::Sample, a),
        Cmd::Validate(a) => run_configured(Command::Validate, a),
        Cmd::Scores { input, pred, outcome, out } => (|| {
            let file = std::fs::File::open(&input).map_err(|e| AppError::io(input.display(), e))?;
            let score = testbf::run::score_csv(file, &pred, &outcome)?;
            testbf::report::scores_report(&score).write(out.as_deref(), None)
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
