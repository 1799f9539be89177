//! Shared plumbing for the subcommands: configuration resolution, the
//! checkpointed stream drive, and per-checkpoint metric assembly.

use crate::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use soda_citron::eval::{
    self, clear_mot, match_estimates, CheckpointSeries, MetricsRow, RadiusMode,
};
use soda_citron::sim::{self, ScenarioSpec, ScenarioTruth, SensorSuite};
use soda_citron::{Detection, Engine, EngineMode, EngineParams, EstimatedObject};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Which scenario a command operates on.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioChoice {
    A,
    B,
    File(PathBuf),
}

impl ScenarioChoice {
    /// `a`/`b` (case-insensitive) pick the built-in scenarios; anything
    /// else is read as a scenario-spec JSON file.
    pub fn parse(s: &str) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "a" => ScenarioChoice::A,
            "b" => ScenarioChoice::B,
            _ => ScenarioChoice::File(PathBuf::from(s)),
        }
    }

    pub fn resolve(&self) -> CliResult<ScenarioSpec> {
        let spec = match self {
            ScenarioChoice::A => sim::scenario_a_spec(),
            ScenarioChoice::B => sim::scenario_b_spec(),
            ScenarioChoice::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("reading scenario spec {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::data(format!("parsing scenario spec {}: {e}", path.display()))
                })?
            }
        };
        spec.validate().map_err(CliError::from)?;
        Ok(spec)
    }

    /// Label used in the metrics table's `scenario` column.
    pub fn label(&self) -> String {
        match self {
            ScenarioChoice::A => "a".into(),
            ScenarioChoice::B => "b".into(),
            ScenarioChoice::File(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

/// Engine-parameter overrides taken from flags; unset fields fall back to
/// the per-method defaults (the baseline's `w_min` differs).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub radius: Option<f64>,
    pub beta: Option<f64>,
    pub w_max: Option<f64>,
    pub w_min: Option<f64>,
    pub alpha: Option<f64>,
}

impl ParamOverrides {
    pub fn apply_to(&self, mode: EngineMode) -> EngineParams {
        let mut p = match mode {
            EngineMode::SodaCitron => EngineParams::default(),
            EngineMode::DbstreamBaseline => EngineParams::baseline_default(),
        };
        if let Some(v) = self.radius {
            p.r = v;
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.w_max {
            p.w_max = v;
        }
        if let Some(v) = self.w_min {
            p.w_min = v;
        }
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        p
    }
}

/// Resolved configuration shared by the subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioChoice,
    pub sensors: SensorSuite,
    pub method: EngineMode,
    pub overrides: ParamOverrides,
    pub seed: u64,
    pub checkpoint_interval: usize,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(out: impl Into<PathBuf>) -> CliResult<Self> {
        let cfg = RunConfig {
            scenario: ScenarioChoice::A,
            sensors: sim::default_sensors(),
            method: EngineMode::SodaCitron,
            overrides: ParamOverrides::default(),
            seed: 0,
            checkpoint_interval: 100,
            out: out.into(),
        };
        cfg.sensors.validate().map_err(CliError::from)?;
        Ok(cfg)
    }

    pub fn params(&self) -> EngineParams {
        self.overrides.apply_to(self.method)
    }

    pub fn engine(&self) -> CliResult<Engine> {
        Engine::new(self.params(), self.method).map_err(CliError::from)
    }

    pub fn method_label(&self) -> &'static str {
        method_label(self.method)
    }

    /// Ensure the output directory exists and return a path inside it.
    pub fn out_path(&self, file: &str) -> CliResult<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| {
            CliError::usage(format!("creating output directory {}: {e}", self.out.display()))
        })?;
        Ok(self.out.join(file))
    }
}

pub fn method_label(mode: EngineMode) -> &'static str {
    match mode {
        EngineMode::SodaCitron => "soda-citron",
        EngineMode::DbstreamBaseline => "dbstream-baseline",
    }
}

pub fn parse_method(s: &str) -> Result<EngineMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "soda-citron" => Ok(EngineMode::SodaCitron),
        "dbstream-baseline" => Ok(EngineMode::DbstreamBaseline),
        other => Err(format!(
            "unknown method `{other}` (expected soda-citron or dbstream-baseline)"
        )),
    }
}

/// A completed checkpointed drive of one detection stream.
#[derive(Debug, Clone)]
pub struct Driven {
    /// Checkpoints in stream order; the last one is the end of the stream
    /// and its estimates come from reclustering the engine itself.
    pub series: CheckpointSeries,
    /// Cumulative engine time (updates plus the recluster that produced
    /// the checkpoint's estimates) in milliseconds, aligned with
    /// `series.checkpoints`.
    pub runtimes_ms: Vec<f64>,
    /// Estimates at the end of the stream (empty for an empty stream).
    pub final_estimates: Vec<EstimatedObject>,
}

/// Feed `detections` through `engine`, reclustering a clone every
/// `interval` detections and the engine itself at the end of the stream.
/// Cloning keeps the online trajectory independent of how often it is
/// observed; the final recluster mutates the engine for real.
pub fn drive(
    engine: &mut Engine,
    detections: &[Detection],
    interval: usize,
) -> CliResult<Driven> {
    if interval == 0 {
        return Err(CliError::usage("checkpoint interval must be positive"));
    }
    let mut series = CheckpointSeries::default();
    let mut runtimes_ms = Vec::new();
    let mut update_ms = 0.0f64;

    for (i, det) in detections.iter().enumerate() {
        let m = det.measurement();
        let t = Instant::now();
        engine.update(&m).map_err(CliError::from)?;
        update_ms += t.elapsed().as_secs_f64() * 1e3;

        let consumed = i + 1;
        if consumed % interval == 0 && consumed < detections.len() {
            let mut probe = engine.clone();
            let t = Instant::now();
            let estimates = probe.recluster().map_err(CliError::from)?;
            let recluster_ms = t.elapsed().as_secs_f64() * 1e3;
            series
                .checkpoints
                .push(eval::Checkpoint { detections_consumed: consumed, estimates });
            runtimes_ms.push(update_ms + recluster_ms);
        }
    }

    let mut final_estimates = Vec::new();
    if !detections.is_empty() {
        let t = Instant::now();
        final_estimates = engine.recluster().map_err(CliError::from)?;
        let recluster_ms = t.elapsed().as_secs_f64() * 1e3;
        series.checkpoints.push(eval::Checkpoint {
            detections_consumed: detections.len(),
            estimates: final_estimates.clone(),
        });
        runtimes_ms.push(update_ms + recluster_ms);
    }
    Ok(Driven { series, runtimes_ms, final_estimates })
}

/// Score one checkpoint's estimates against the truth at both radii.
/// Tracking columns (`idsw`/`motp`/`mota`) are filled by the caller from
/// the CLEAR pass over the whole series.
fn score_checkpoint(
    estimates: &[EstimatedObject],
    truth: &ScenarioTruth,
    row: &mut MetricsRow,
) {
    let normal = match_estimates(estimates, truth, RadiusMode::Normal);
    let strict = match_estimates(estimates, truth, RadiusMode::Strict);
    row.tp = normal.tp();
    row.fp = normal.fp();
    row.fn_count = normal.missed();
    row.f1 = eval::f1(&normal).ok();
    row.precision = eval::precision(&normal).ok();
    row.recall = eval::recall(&normal).ok();
    row.rmse_normal = eval::rmse(&normal).ok();
    row.rmse_strict = eval::rmse(&strict).ok();
}

/// Build the full metrics table for a driven run.
pub fn metrics_rows(
    driven: &Driven,
    truth: &ScenarioTruth,
    seed: u64,
    method: EngineMode,
    scenario_label: &str,
) -> CliResult<Vec<MetricsRow>> {
    let mot = clear_mot(&driven.series, truth, RadiusMode::Normal).map_err(CliError::from)?;
    let mut rows = Vec::with_capacity(driven.series.checkpoints.len());
    for (i, cp) in driven.series.checkpoints.iter().enumerate() {
        let mut row = MetricsRow {
            run_seed: seed,
            method: method_label(method).into(),
            scenario: scenario_label.into(),
            checkpoint: i + 1,
            n_detections: cp.detections_consumed,
            tp: 0,
            fp: 0,
            fn_count: 0,
            idsw: Some(mot[i].id_switches),
            f1: None,
            precision: None,
            recall: None,
            rmse_normal: None,
            rmse_strict: None,
            motp: mot[i].motp,
            mota: Some(mot[i].mota),
            runtime_ms: driven.runtimes_ms[i],
        };
        score_checkpoint(&cp.estimates, truth, &mut row);
        rows.push(row);
    }
    Ok(rows)
}

/// Saved final estimates plus enough metadata to rescore them later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatesFile {
    pub scenario: String,
    pub method: String,
    pub seed: u64,
    pub checkpoint: usize,
    pub detections_consumed: usize,
    pub runtime_ms: f64,
    pub estimates: Vec<EstimatedObject>,
}

impl EstimatesFile {
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Internal(format!("serializing estimates: {e}")))?;
        std::fs::write(path, json + "\n")
            .map_err(|e| CliError::usage(format!("writing {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("parsing {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use soda_citron::sim::{gen_scenario_a, simulate};

    #[test]
    fn scenario_choice_parses() {
        assert_eq!(ScenarioChoice::parse("A"), ScenarioChoice::A);
        assert_eq!(ScenarioChoice::parse("b"), ScenarioChoice::B);
        assert_eq!(
            ScenarioChoice::parse("specs/custom.json"),
            ScenarioChoice::File(PathBuf::from("specs/custom.json"))
        );
        assert_eq!(ScenarioChoice::parse("specs/custom.json").label(), "custom");
    }

    #[test]
    fn overrides_respect_method_defaults() {
        let ov = ParamOverrides { beta: Some(4.0), ..Default::default() };
        let soda = ov.apply_to(EngineMode::SodaCitron);
        let base = ov.apply_to(EngineMode::DbstreamBaseline);
        assert_eq!(soda.beta, 4.0);
        assert_eq!(base.beta, 4.0);
        assert_eq!(soda.w_min, 4.0);
        assert_eq!(base.w_min, 3.0, "baseline keeps its own default w_min");
    }

    #[test]
    fn drive_checkpoints_at_interval_and_end() {
        let truth = gen_scenario_a(7);
        let detections = simulate(&truth, &sim::default_sensors(), 7).unwrap();
        let cfg = RunConfig::new("unused").unwrap();
        let mut engine = cfg.engine().unwrap();
        let driven = drive(&mut engine, &detections, 500).unwrap();

        let n = detections.len();
        let counts: Vec<usize> =
            driven.series.checkpoints.iter().map(|c| c.detections_consumed).collect();
        let expected: Vec<usize> =
            (1..).map(|k| k * 500).take_while(|&c| c < n).chain([n]).collect();
        assert_eq!(counts, expected);
        assert_eq!(driven.runtimes_ms.len(), counts.len());
        assert!(driven.runtimes_ms.windows(2).all(|w| w[0] <= w[1]), "cumulative time");
        assert_eq!(
            driven.final_estimates,
            driven.series.checkpoints.last().unwrap().estimates
        );
    }

    #[test]
    fn drive_empty_stream_yields_no_checkpoints() {
        let cfg = RunConfig::new("unused").unwrap();
        let mut engine = cfg.engine().unwrap();
        let driven = drive(&mut engine, &[], 100).unwrap();
        assert!(driven.series.checkpoints.is_empty());
        assert!(driven.final_estimates.is_empty());
    }

    #[test]
    fn metrics_rows_align_with_checkpoints() {
        let truth = gen_scenario_a(3);
        let detections = simulate(&truth, &sim::default_sensors(), 3).unwrap();
        let cfg = RunConfig::new("unused").unwrap();
        let mut engine = cfg.engine().unwrap();
        let driven = drive(&mut engine, &detections, 400).unwrap();
        let rows =
            metrics_rows(&driven, &truth, 3, EngineMode::SodaCitron, "a").unwrap();
        assert_eq!(rows.len(), driven.series.checkpoints.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.checkpoint, i + 1);
            assert_eq!(row.method, "soda-citron");
            assert!(row.idsw.is_some() && row.mota.is_some());
        }
        // By the end of a full scenario-A stream the engine finds most of
        // the 100 objects.
        let last = rows.last().unwrap();
        assert!(last.f1.unwrap() > 0.5, "final f1 = {:?}", last.f1);
    }
}
