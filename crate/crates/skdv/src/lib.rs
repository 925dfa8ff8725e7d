//! Reproducible experiment runner for the Schrodinger-KdV toolkit.
//!
//! [`run`] dispatches a validated [`ExperimentConfig`] to one experiment,
//! writes its CSV tables, a `summary.json` with the acceptance checks, the
//! resolved configuration and a `MANIFEST`, and reports band misses.

pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod report;

use std::path::PathBuf;

use serde_json::json;

pub use config::{Experiment, ExperimentConfig, RawConfig};
pub use error::{HarnessError, Result};
pub use experiments::Check;
pub use skdv_core::fit::{fit_loglog, FitResult};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the configured output directory.
    pub out_dir: Option<PathBuf>,
    /// Worker pool size; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Turn failed checks into [`HarnessError::BandMiss`].
    pub assert: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub outputs: report::Outputs,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn dispatch(cfg: &ExperimentConfig) -> Result<experiments::ExperimentOutput> {
    match cfg.experiment {
        Experiment::Simulate => experiments::simulate(cfg),
        Experiment::Invariants => experiments::invariants(cfg),
        Experiment::Picard => experiments::picard(cfg),
        Experiment::Inflate => experiments::inflate(cfg),
        Experiment::Estimates => experiments::estimates(cfg),
    }
}

/// Runs `cfg` and writes its reports.
///
/// Reports are written even when a check fails; with `opts.assert` the
/// failure is then returned as [`HarnessError::BandMiss`].
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let result = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::validation("SKDV_THREADS", e.to_string()))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    };
    let experiments::ExperimentOutput {
        mut outputs,
        summary,
        checks,
    } = result?;

    let summary = json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "result": summary,
        "checks": checks,
    });
    outputs.add_json("summary.json", &summary)?;
    outputs.add("config.resolved", cfg.canonical.clone());
    if cfg.gnuplot {
        outputs.add("plot.gp", report::gnuplot_script(cfg.experiment));
    }
    let manifest = report::manifest(&cfg.canonical, cfg.seed, cfg.experiment.name(), &outputs.files);
    outputs.add("MANIFEST", manifest);
    outputs.write_to(&out_dir)?;

    for c in &checks {
        log::info!("{} = {:e} ({}) {}", c.name, c.value, c.band, if c.pass { "ok" } else { "MISS" });
    }
    let outcome = RunOutcome {
        out_dir,
        outputs,
        summary,
        checks,
    };
    if opts.assert && !outcome.passed() {
        let missed: Vec<String> = outcome
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:e} not {}", c.name, c.value, c.band))
            .collect();
        return Err(HarnessError::BandMiss(missed.join("; ")));
    }
    Ok(outcome)
}
