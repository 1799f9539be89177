//! Subcommand implementations. Each returns a structured summary so the
//! test suites can drive the tool as a library; `main` prints the
//! human-readable side.

use crate::driver::{drive, method_label, metrics_rows, Driven, EstimatesFile, RunConfig};
use crate::{CliError, CliResult};
use rayon::prelude::*;
use soda_citron::eval::{self, match_estimates, wilcoxon_signed_rank, MetricsRow, RadiusMode};
use soda_citron::sim::{self, generate, simulate, ObjectKind, ScenarioTruth, SensorSuite};
use soda_citron::stream::{read_detections_path, write_detections_path};
use soda_citron::{Detection, EngineMode};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable bounding the Monte Carlo worker-pool size.
pub const WORKERS_ENV: &str = "SODA_CITRON_WORKERS";

/// Artifacts written by `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOut {
    pub truth_path: PathBuf,
    pub detections_path: PathBuf,
    pub n_objects: usize,
    pub n_detections: usize,
}

/// Generate the configured scenario and write `truth.json` plus
/// `detections.jsonl` into the output directory.
pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<SimulateOut> {
    let spec = cfg.scenario.resolve()?;
    let truth = generate(&spec, cfg.seed).map_err(CliError::from)?;
    let detections = simulate(&truth, &cfg.sensors, cfg.seed).map_err(CliError::from)?;

    let truth_path = cfg.out_path("truth.json")?;
    sim::write_truth_path(&truth_path, &truth)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let detections_path = cfg.out_path("detections.jsonl")?;
    write_detections_path(&detections_path, &detections)
        .map_err(|e| CliError::usage(e.to_string()))?;

    Ok(SimulateOut {
        truth_path,
        detections_path,
        n_objects: truth.objects.len(),
        n_detections: detections.len(),
    })
}

/// Artifacts and metrics from one checkpointed run.
#[derive(Debug, Clone)]
pub struct RunOut {
    pub rows: Vec<MetricsRow>,
    pub estimates: EstimatesFile,
    pub csv_path: PathBuf,
    pub estimates_path: PathBuf,
}

/// Feed a detection stream through the configured engine, scoring at
/// every checkpoint; write `metrics.csv` and `estimates.json`.
pub fn cmd_run(cfg: &RunConfig, detections: &Path, truth: &Path) -> CliResult<RunOut> {
    let detections = read_detections_path(detections).map_err(CliError::from)?;
    let truth = sim::read_truth_path(truth).map_err(CliError::from)?;

    let (rows, estimates) = run_in_memory(cfg, &detections, &truth)?;
    let csv_path = cfg.out_path("metrics.csv")?;
    eval::write_csv(&csv_path, &rows).map_err(|e| CliError::usage(e.to_string()))?;
    let estimates_path = cfg.out_path("estimates.json")?;
    estimates.write(&estimates_path)?;
    Ok(RunOut { rows, estimates, csv_path, estimates_path })
}

/// The run pipeline without file I/O; shared by `run` and `montecarlo`.
pub fn run_in_memory(
    cfg: &RunConfig,
    detections: &[Detection],
    truth: &ScenarioTruth,
) -> CliResult<(Vec<MetricsRow>, EstimatesFile)> {
    let mut engine = cfg.engine()?;
    let driven: Driven = drive(&mut engine, detections, cfg.checkpoint_interval)?;
    let rows = metrics_rows(&driven, truth, cfg.seed, cfg.method, &cfg.scenario.label())?;
    let estimates = EstimatesFile {
        scenario: cfg.scenario.label(),
        method: cfg.method_label().into(),
        seed: cfg.seed,
        checkpoint: rows.len(),
        detections_consumed: detections.len(),
        runtime_ms: driven.runtimes_ms.last().copied().unwrap_or(0.0),
        estimates: driven.final_estimates,
    };
    Ok((rows, estimates))
}

/// One method-vs-method significance result on a per-run final metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: &'static str,
    pub method_a: &'static str,
    pub method_b: &'static str,
    pub median_a: f64,
    pub median_b: f64,
    /// Runs where the metric was defined for both methods.
    pub n_pairs: usize,
    /// Two-sided paired Wilcoxon p-value; `None` when too few pairs.
    pub p_value: Option<f64>,
}

/// Campaign artifacts: every per-checkpoint row plus the significance
/// comparisons over final-checkpoint metrics.
#[derive(Debug, Clone)]
pub struct MonteCarloOut {
    pub rows: Vec<MetricsRow>,
    pub comparisons: Vec<Comparison>,
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
    pub report: String,
}

/// Run seeds `0..runs` for each method over fresh scenario draws, write
/// the aggregate CSV and a significance report.
pub fn cmd_montecarlo(
    cfg: &RunConfig,
    runs: usize,
    methods: &[EngineMode],
) -> CliResult<MonteCarloOut> {
    if runs < 2 {
        return Err(CliError::usage(format!("need at least 2 runs, got {runs}")));
    }
    if methods.is_empty() {
        return Err(CliError::usage("need at least one method"));
    }
    let spec = cfg.scenario.resolve()?;

    let per_seed: Vec<Vec<Vec<MetricsRow>>> = worker_pool()?.install(|| {
        (0..runs as u64)
            .into_par_iter()
            .map(|seed| {
                let truth = generate(&spec, seed).map_err(CliError::from)?;
                let detections =
                    simulate(&truth, &cfg.sensors, seed).map_err(CliError::from)?;
                methods
                    .iter()
                    .map(|&method| {
                        let mut run_cfg = cfg.clone();
                        run_cfg.method = method;
                        run_cfg.seed = seed;
                        let (rows, _) = run_in_memory(&run_cfg, &detections, &truth)?;
                        Ok(rows)
                    })
                    .collect::<CliResult<Vec<_>>>()
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    // Flatten in (seed, method) order so output is scheduling-independent.
    let mut rows = Vec::new();
    for seed_rows in &per_seed {
        for method_rows in seed_rows {
            rows.extend(method_rows.iter().cloned());
        }
    }

    // Final-checkpoint metric per (method, seed); None when a run had no
    // checkpoints or the metric was undefined.
    let finals = |mi: usize, pick: fn(&MetricsRow) -> Option<f64>| -> Vec<Option<f64>> {
        per_seed.iter().map(|seed_rows| seed_rows[mi].last().and_then(pick)).collect()
    };
    let mut comparisons = Vec::new();
    for a in 0..methods.len() {
        for b in a + 1..methods.len() {
            for (metric, pick) in [
                ("final_f1", (|r: &MetricsRow| r.f1) as fn(&MetricsRow) -> Option<f64>),
                ("final_rmse", |r: &MetricsRow| r.rmse_normal),
            ] {
                comparisons.push(compare(
                    metric,
                    method_label(methods[a]),
                    method_label(methods[b]),
                    &finals(a, pick),
                    &finals(b, pick),
                )?);
            }
        }
    }

    let report = render_report(cfg, runs, &comparisons);
    let csv_path = cfg.out_path("montecarlo.csv")?;
    eval::write_csv(&csv_path, &rows).map_err(|e| CliError::usage(e.to_string()))?;
    let report_path = cfg.out_path("report.txt")?;
    std::fs::write(&report_path, &report)
        .map_err(|e| CliError::usage(format!("writing {}: {e}", report_path.display())))?;
    Ok(MonteCarloOut { rows, comparisons, csv_path, report_path, report })
}

fn compare(
    metric: &'static str,
    method_a: &'static str,
    method_b: &'static str,
    a: &[Option<f64>],
    b: &[Option<f64>],
) -> CliResult<Comparison> {
    let pairs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| x.zip(*y))
        .collect();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let p_value = match wilcoxon_signed_rank(&xs, &ys) {
        Ok(out) => Some(out.p_value),
        Err(soda_citron::Error::InsufficientSamples(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Comparison {
        metric,
        method_a,
        method_b,
        median_a: median(&xs),
        median_b: median(&ys),
        n_pairs: pairs.len(),
        p_value,
    })
}

/// Median of a sample; NaN when empty.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

fn render_report(cfg: &RunConfig, runs: usize, comparisons: &[Comparison]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "montecarlo: scenario {}, {} runs, checkpoint interval {}",
        cfg.scenario.label(),
        runs,
        cfg.checkpoint_interval
    );
    let _ = writeln!(s, "paired wilcoxon (two-sided) on final-checkpoint metrics");
    for c in comparisons {
        let p = match c.p_value {
            Some(p) => format!("p = {p:.3e}"),
            None => "p unavailable (too few defined pairs)".into(),
        };
        let _ = writeln!(
            s,
            "{}: {} median {:.4} vs {} median {:.4}, {} (n = {})",
            c.metric, c.method_a, c.median_a, c.method_b, c.median_b, p, c.n_pairs
        );
    }
    s
}

fn worker_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                CliError::usage(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Internal(format!("building worker pool: {e}")))
}

/// One measured stream size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub requested: usize,
    pub n_detections: usize,
    pub seconds: f64,
    pub detections_per_sec: f64,
}

/// Throughput/scaling results and where they were written.
#[derive(Debug, Clone)]
pub struct BenchOut {
    pub rows: Vec<BenchRow>,
    /// Slope of log(time) vs log(detections); `None` below two sizes.
    pub exponent: Option<f64>,
    pub csv_path: PathBuf,
}

/// Time update+periodic-recluster over synthetic streams whose expected
/// sizes match `sizes` (uniform scenario-A statistics, object counts
/// scaled inside the standard ROI). Single-threaded.
pub fn cmd_bench(cfg: &RunConfig, sizes: &[usize]) -> CliResult<BenchOut> {
    if sizes.is_empty() {
        return Err(CliError::usage("need at least one stream size"));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::usage("stream sizes must be strictly ascending"));
    }

    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        let detections = scaled_stream(&cfg.sensors, size, cfg.seed.wrapping_add(i as u64))?;
        let n = detections.len();
        let mut engine = cfg.engine()?;
        // Ten evenly spaced in-place reclusters per stream, as a
        // checkpointed deployment would run them.
        let step = (n / 10).max(1);
        let start = Instant::now();
        for (k, det) in detections.iter().enumerate() {
            engine.update(&det.measurement()).map_err(CliError::from)?;
            if (k + 1) % step == 0 || k + 1 == n {
                engine.recluster().map_err(CliError::from)?;
            }
        }
        let seconds = start.elapsed().as_secs_f64();
        rows.push(BenchRow {
            requested: size,
            n_detections: n,
            seconds,
            detections_per_sec: n as f64 / seconds,
        });
    }

    let exponent = (rows.len() >= 2).then(|| {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| ((r.n_detections as f64).ln(), r.seconds.ln()))
            .collect();
        ols_slope(&points)
    });

    let mut csv = String::from("requested,n_detections,seconds,detections_per_sec\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.requested, r.n_detections, r.seconds, r.detections_per_sec
        );
    }
    let csv_path = cfg.out_path("bench.csv")?;
    std::fs::write(&csv_path, csv)
        .map_err(|e| CliError::usage(format!("writing {}: {e}", csv_path.display())))?;
    Ok(BenchOut { rows, exponent, csv_path })
}

/// A uniform stream with scenario-A statistics whose expected length is
/// `target`: per-type object counts are solved from the analytic
/// per-object detection rate, clutter stays at the suite's rates.
pub fn scaled_stream(
    sensors: &SensorSuite,
    target: usize,
    seed: u64,
) -> CliResult<Vec<Detection>> {
    let base = sim::scenario_a_spec();
    let roi = base.roi();
    let one_each: BTreeMap<ObjectKind, usize> =
        ObjectKind::ALL.iter().map(|&k| (k, 1)).collect();
    let per_object_set = sim::expected_stream_size(&one_each, sensors, 0.0);
    let clutter = sim::expected_stream_size(&BTreeMap::new(), sensors, roi.area());
    let per_type =
        (((target as f64 - clutter) / per_object_set).round().max(1.0)) as usize;

    let counts: BTreeMap<ObjectKind, usize> =
        ObjectKind::ALL.iter().map(|&k| (k, per_type)).collect();
    let spec = sim::ScenarioSpec::Uniform { roi, counts };
    let truth = generate(&spec, seed).map_err(CliError::from)?;
    simulate(&truth, sensors, seed).map_err(CliError::from)
}

/// Least-squares slope of y on x.
pub fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    num / den
}

/// Scoring of a saved estimates file.
#[derive(Debug, Clone)]
pub struct EvaluateOut {
    pub row: MetricsRow,
    pub csv_path: PathBuf,
}

/// Score `estimates.json` against `truth.json` and write a one-row CSV.
pub fn cmd_evaluate(estimates: &Path, truth: &Path, out: &Path) -> CliResult<EvaluateOut> {
    let file = EstimatesFile::read(estimates)?;
    let truth = sim::read_truth_path(truth).map_err(CliError::from)?;

    let normal = match_estimates(&file.estimates, &truth, RadiusMode::Normal);
    let strict = match_estimates(&file.estimates, &truth, RadiusMode::Strict);
    let row = MetricsRow {
        run_seed: file.seed,
        method: file.method.clone(),
        scenario: file.scenario.clone(),
        checkpoint: file.checkpoint,
        n_detections: file.detections_consumed,
        tp: normal.tp(),
        fp: normal.fp(),
        fn_count: normal.missed(),
        idsw: None,
        f1: eval::f1(&normal).ok(),
        precision: eval::precision(&normal).ok(),
        recall: eval::recall(&normal).ok(),
        rmse_normal: eval::rmse(&normal).ok(),
        rmse_strict: eval::rmse(&strict).ok(),
        motp: None,
        mota: None,
        runtime_ms: file.runtime_ms,
    };

    std::fs::create_dir_all(out)
        .map_err(|e| CliError::usage(format!("creating {}: {e}", out.display())))?;
    let csv_path = out.join("evaluation.csv");
    eval::write_csv(&csv_path, std::slice::from_ref(&row))
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(EvaluateOut { row, csv_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn ols_slope_recovers_exponent() {
        // t = c · n^1.17 exactly.
        let points: Vec<(f64, f64)> = [2000.0_f64, 8000.0, 32000.0]
            .iter()
            .map(|&n| (n.ln(), (0.003 * n.powf(1.17)).ln()))
            .collect();
        assert!((ols_slope(&points) - 1.17).abs() < 1e-9);
    }

    #[test]
    fn scaled_stream_hits_target_size() {
        let sensors = sim::default_sensors();
        for &target in &[2000usize, 8000] {
            let n = scaled_stream(&sensors, target, 1).unwrap().len();
            let slack = (target as f64 * 0.2) as usize + 200;
            assert!(
                n.abs_diff(target) < slack,
                "target {target} produced {n} detections"
            );
        }
    }

    #[test]
    fn bench_rejects_bad_sizes() {
        let cfg = RunConfig::new(std::env::temp_dir().join("soda-bench-args")).unwrap();
        assert_eq!(cmd_bench(&cfg, &[]).unwrap_err().exit_code(), 1);
        assert_eq!(cmd_bench(&cfg, &[100, 100]).unwrap_err().exit_code(), 1);
        assert_eq!(cmd_bench(&cfg, &[200, 100]).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn montecarlo_needs_two_runs() {
        let cfg = RunConfig::new(std::env::temp_dir().join("soda-mc-args")).unwrap();
        let err =
            cmd_montecarlo(&cfg, 1, &[EngineMode::SodaCitron]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
