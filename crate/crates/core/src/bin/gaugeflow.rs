use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};

use gaugeflow_core::scenario::{self, ConfigError, Mode};
use gaugeflow_core::{Error, ErrorCategory};

/// Charged particles in gauge fields: integrate scenarios, cross-check the
/// two formulations, check flux quantization and verify identities.
#[derive(Debug, Parser)]
#[command(name = "gaugeflow", version)]
#[command(group(ArgGroup::new("source").args(["config", "builtin"])))]
struct Cli {
    /// integrate | crosscheck | quantize | verify-identities
    #[arg(value_parser = parse_mode, required_unless_present = "list_scenarios")]
    mode: Option<Mode>,

    /// Scenario file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Built-in scenario name.
    #[arg(long)]
    builtin: Option<String>,

    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,

    /// Seed for sampled identity and residual tables.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Print the built-in scenario names and exit.
    #[arg(long)]
    list_scenarios: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_scenarios {
        for name in scenario::builtin_names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let mode = cli.mode.expect("required by clap");
    match execute(&cli, mode) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(ErrorCategory::Numeric.exit_code() as u8),
        Err(e) => {
            eprintln!("gaugeflow: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli, mode: Mode) -> Result<bool, Error> {
    let config = match (&cli.config, &cli.builtin) {
        (Some(path), _) => scenario::load_config(path)?,
        (None, Some(name)) => scenario::builtin_config(name)?,
        // verify-identities has a default scenario
        (None, None) if mode == Mode::VerifyIdentities => scenario::builtin_config("wong_su2")?,
        (None, None) => {
            return Err(Error::Config(ConfigError::Invariant {
                key: "--config".into(),
                message: "one of --config or --builtin is required".into(),
            }));
        }
    };
    let outcome = scenario::run(&config, mode, &cli.out_dir, cli.seed)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    for file in &outcome.files {
        println!("wrote {}", file.display());
    }
    Ok(outcome.passed)
}
