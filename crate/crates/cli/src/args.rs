//! Command-line surface. Flags mirror [`RunConfig`](crate::driver::RunConfig)
//! fields; each subcommand takes the subset it uses.

use crate::driver::{parse_method, ParamOverrides, RunConfig, ScenarioChoice};
use crate::{CliError, CliResult};
use clap::{Args, Parser, Subcommand};
use soda_citron::sim::SensorSuite;
use soda_citron::EngineMode;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "soda-citron",
    version,
    about = "Online static-object association: simulate, run, compare, benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a scenario's ground truth and detection stream.
    Simulate(SimulateArgs),
    /// Feed a detection stream through one engine with checkpoint metrics.
    Run(RunArgs),
    /// Seeded repeated runs per method, with paired significance tests.
    Montecarlo(MontecarloArgs),
    /// Measure throughput and the runtime growth exponent.
    Bench(BenchArgs),
    /// Score a saved estimates file against a truth file.
    Evaluate(EvaluateArgs),
}

/// Flags shared by every stream-producing or stream-consuming command.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario: `a`, `b`, or a scenario-spec JSON path.
    #[arg(long, default_value = "a")]
    pub scenario: String,
    /// Sensor-suite JSON path (defaults to the built-in five-sensor suite).
    #[arg(long)]
    pub sensors: Option<PathBuf>,
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Detections between evaluation checkpoints.
    #[arg(long, default_value_t = 100)]
    pub checkpoint_interval: usize,
    /// Clustering radius r.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Confidence-weight curvature β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Confidence-weight ceiling w_max.
    #[arg(long)]
    pub wmax: Option<f64>,
    /// Output/initiation weight threshold w_min.
    #[arg(long)]
    pub wmin: Option<f64>,
    /// Intersection factor α for reclustering.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl CommonArgs {
    /// Resolve flags into a [`RunConfig`] with the given method.
    pub fn config(&self, method: EngineMode) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::new(self.out.clone())?;
        cfg.scenario = ScenarioChoice::parse(&self.scenario);
        if let Some(path) = &self.sensors {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("reading sensor suite {}: {e}", path.display()))
            })?;
            let suite: SensorSuite = serde_json::from_str(&text).map_err(|e| {
                CliError::data(format!("parsing sensor suite {}: {e}", path.display()))
            })?;
            suite.validate().map_err(CliError::from)?;
            cfg.sensors = suite;
        }
        cfg.method = method;
        cfg.overrides = ParamOverrides {
            radius: self.radius,
            beta: self.beta,
            w_max: self.wmax,
            w_min: self.wmin,
            alpha: self.alpha,
        };
        cfg.seed = self.seed;
        cfg.checkpoint_interval = self.checkpoint_interval;
        // Surface invalid parameter combinations before any work happens.
        cfg.params().validate().map_err(CliError::from)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Association method.
    #[arg(long, default_value = "soda-citron", value_parser = parse_method)]
    pub method: EngineMode,
    /// Detection stream (JSON lines), e.g. from `simulate`.
    #[arg(long)]
    pub detections: PathBuf,
    /// Ground-truth sidecar JSON.
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct MontecarloArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of seeded runs (seeds 0..runs).
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    /// Method(s) to run; repeat the flag to compare several.
    #[arg(long, value_parser = parse_method)]
    pub method: Vec<EngineMode>,
}

impl MontecarloArgs {
    /// Requested methods, defaulting to both for a paired comparison.
    pub fn methods(&self) -> Vec<EngineMode> {
        if self.method.is_empty() {
            vec![EngineMode::SodaCitron, EngineMode::DbstreamBaseline]
        } else {
            let mut seen = Vec::new();
            for &m in &self.method {
                if !seen.contains(&m) {
                    seen.push(m);
                }
            }
            seen
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Association method to benchmark.
    #[arg(long, default_value = "soda-citron", value_parser = parse_method)]
    pub method: EngineMode,
    /// Ascending stream sizes (detection counts).
    #[arg(long, value_delimiter = ',', default_values_t = [2000usize, 8000, 32000])]
    pub sizes: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Estimates JSON written by `run`.
    #[arg(long)]
    pub estimates: PathBuf,
    /// Ground-truth sidecar JSON.
    #[arg(long)]
    pub truth: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}
