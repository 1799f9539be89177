//! Scoring of estimated objects against ground truth.
//!
//! [`assignment`] gates estimate–truth pairs by per-type radius and
//! matches them optimally; this module derives F1/precision/recall and
//! position RMSE from a match; [`clearmot`] scores tracking quality over
//! online checkpoints; [`wilcoxon`] compares paired per-run metrics
//! between methods. [`MetricsRow`]/[`write_csv`] define the tabular
//! output shared by all commands (detection counts and F1 are reported at
//! the normal radius; the strict radius appears via `rmse_strict`).

pub mod assignment;
pub mod clearmot;
pub mod wilcoxon;

pub use assignment::{match_estimates, MatchResult, MatchedPair};
pub use clearmot::{clear_mot, Checkpoint, CheckpointSeries, MotPoint};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonOutcome};

use crate::error::{Error, Result};
use crate::sim::ObjectKind;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Gating-radius mode for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusMode {
    Normal,
    Strict,
}

impl RadiusMode {
    /// Matching radius for the given object type under this mode.
    pub fn radius(self, kind: ObjectKind) -> f64 {
        match self {
            RadiusMode::Normal => kind.radius_normal(),
            RadiusMode::Strict => kind.radius_strict(),
        }
    }
}

/// F1 = 2·TP / (2·TP + FP + FN). Undefined when all three are zero.
pub fn f1(m: &MatchResult) -> Result<f64> {
    let (tp, fp, fn_) = (m.tp(), m.fp(), m.missed());
    if tp + fp + fn_ == 0 {
        return Err(Error::UndefinedMetric("f1 with no truth and no estimates"));
    }
    Ok(2.0 * tp as f64 / (2.0 * tp as f64 + fp as f64 + fn_ as f64))
}

/// TP / (TP + FP). Undefined without any estimates.
pub fn precision(m: &MatchResult) -> Result<f64> {
    let (tp, fp) = (m.tp(), m.fp());
    if tp + fp == 0 {
        return Err(Error::UndefinedMetric("precision with no estimates"));
    }
    Ok(tp as f64 / (tp + fp) as f64)
}

/// TP / (TP + FN). Undefined without any ground truth.
pub fn recall(m: &MatchResult) -> Result<f64> {
    let (tp, fn_) = (m.tp(), m.missed());
    if tp + fn_ == 0 {
        return Err(Error::UndefinedMetric("recall with no ground truth"));
    }
    Ok(tp as f64 / (tp + fn_) as f64)
}

/// Root mean squared distance over matched pairs. Undefined (distinct
/// from zero) when nothing matched.
pub fn rmse(m: &MatchResult) -> Result<f64> {
    if m.pairs.is_empty() {
        return Err(Error::UndefinedMetric("rmse with zero matched pairs"));
    }
    let sum_sq: f64 = m.pairs.iter().map(|p| p.distance * p.distance).sum();
    Ok((sum_sq / m.pairs.len() as f64).sqrt())
}

/// One row of the metrics table. Optional cells render as empty fields
/// (undefined metric, or a metric the method does not support).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub run_seed: u64,
    pub method: String,
    pub scenario: String,
    /// Checkpoint ordinal within the run, starting at 1.
    pub checkpoint: usize,
    /// Detections consumed up to this checkpoint.
    pub n_detections: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
    pub idsw: Option<usize>,
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub rmse_normal: Option<f64>,
    pub rmse_strict: Option<f64>,
    pub motp: Option<f64>,
    pub mota: Option<f64>,
    /// Cumulative engine processing time for the run up to this
    /// checkpoint, in milliseconds (excludes evaluation).
    pub runtime_ms: f64,
}

/// Header line of the metrics table.
pub const CSV_HEADER: &str = "run_seed,method,scenario,checkpoint,n_detections,tp,fp,fn,idsw,f1,precision,recall,rmse_normal,rmse_strict,motp,mota,runtime_ms";

fn opt_usize(v: &Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64(v: &Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render rows as CSV text (header included).
pub fn to_csv_string(rows: &[MetricsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.run_seed,
            r.method,
            r.scenario,
            r.checkpoint,
            r.n_detections,
            r.tp,
            r.fp,
            r.fn_count,
            opt_usize(&r.idsw),
            opt_f64(&r.f1),
            opt_f64(&r.precision),
            opt_f64(&r.recall),
            opt_f64(&r.rmse_normal),
            opt_f64(&r.rmse_strict),
            opt_f64(&r.motp),
            opt_f64(&r.mota),
            r.runtime_ms,
        ));
    }
    out
}

/// Write rows to a CSV file.
pub fn write_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::Internal(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(to_csv_string(rows).as_bytes())
        .map_err(|e| Error::Internal(format!("writing {}: {e}", path.display())))
}
