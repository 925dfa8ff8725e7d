use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use skdv::{run, Experiment, ExperimentConfig, HarnessError, RawConfig, RunOptions};

#[derive(Parser, Debug)]
#[command(name = "skdv", version, about = "Schrodinger-KdV experiment runner")]
struct Cli {
    /// simulate, invariants, picard, inflate or estimates
    experiment: String,
    /// Flat `section.key = value` configuration file
    #[arg(long)]
    config: PathBuf,
    /// Override one key, e.g. `--set grid.nx=512`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output_dir`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 4 when an acceptance band is missed
    #[arg(long)]
    assert: bool,
}

fn threads_from_env() -> Result<Option<usize>, HarnessError> {
    match std::env::var("SKDV_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::validation("SKDV_THREADS", format!("`{s}` is not a positive integer"))),
        },
    }
}

fn execute(cli: &Cli) -> Result<skdv::RunOutcome, HarnessError> {
    let experiment: Experiment = cli
        .experiment
        .parse()
        .map_err(|e: String| HarnessError::validation("experiment", e))?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| HarnessError::validation("config", format!("{}: {e}", cli.config.display())))?;
    let mut raw = RawConfig::parse(&text)?;
    for s in &cli.overrides {
        raw.set(s)?;
    }
    let cfg = ExperimentConfig::from_raw(&raw, Some(experiment))?;
    let opts = RunOptions {
        out_dir: cli.out.clone().or(Some(cfg.output_dir.clone())),
        threads: threads_from_env()?,
        assert: cli.assert,
    };
    run(&cfg, &opts)
}

fn write_error(dir: &Path, body: &str) {
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("error.json"), body);
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {} = {:e} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.band);
            }
            println!("wrote {}", outcome.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::to_string(&e.report()).expect("error report serializes");
            eprintln!("{body}");
            if let Some(dir) = &cli.out {
                write_error(dir, &body);
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
