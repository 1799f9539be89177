//! Shared value types: detections, engine parameters, potential and
//! estimated objects, and the shared-density table.

use crate::error::{Error, Result};
use crate::infofilter::InfoState;
use crate::math::{Mat2, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Identifier of a potential object. Unique within one engine instance
/// and never reused, even after deletion by fusion.
pub type ObjectId = u64;

/// Ground-truth annotation carried by simulated detections. Evaluation
/// reads it; the association engine never sees it (its API accepts only
/// [`Measurement`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Truth {
    /// Detection of the ground-truth object with this id.
    Object { id: u64 },
    /// False alarm.
    Clutter,
}

/// One sensor report: a position measurement with noise covariance and a
/// sensor-supplied confidence score, plus optional ground-truth labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Reporting sensor name (free-form; informational).
    pub sensor: String,
    /// Measured position.
    pub z: Vec2,
    /// Confidence score in [0, 1].
    pub pi: f64,
    /// Measurement noise covariance (symmetric positive-definite).
    pub r: Mat2,
    /// Ground-truth label, when the stream came from simulation.
    pub truth: Option<Truth>,
}

impl Detection {
    /// The slice of the detection the association engine is allowed to
    /// see. Dropping the truth label here (rather than by convention)
    /// keeps evaluation data out of the estimator by construction.
    pub fn measurement(&self) -> Measurement {
        Measurement { z: self.z, pi: self.pi, r: self.r }
    }

    pub fn validate(&self) -> Result<()> {
        self.measurement().validate()
    }
}

/// The engine-facing part of a detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub z: Vec2,
    pub pi: f64,
    pub r: Mat2,
}

impl Measurement {
    pub fn validate(&self) -> Result<()> {
        if !self.z.is_finite() {
            return Err(Error::InvalidDetection("non-finite position".into()));
        }
        if !(self.pi >= 0.0 && self.pi <= 1.0) {
            return Err(Error::InvalidDetection(format!(
                "confidence {} outside [0, 1]",
                self.pi
            )));
        }
        if !self.r.is_spd() {
            return Err(Error::NonSpdCovariance);
        }
        Ok(())
    }
}

/// Tuning parameters of the association engine.
///
/// Defaults are the operating point used throughout the experiments:
/// β = 6, w_max = 10, r = 1.1 m, w_min = 4, α = 0.3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineParams {
    /// Clustering radius in meters: neighbor search radius, minimum
    /// center separation, and spatial-hash cell size.
    pub r: f64,
    /// Confidence-weighting curvature (Eq. weight = (e^{βπ}-1)/(e^β-1)·w_max).
    pub beta: f64,
    /// Weight assigned to a confidence of exactly 1.
    pub w_max: f64,
    /// Minimum accumulated weight for a potential object to be reported
    /// (and to participate in fusion).
    pub w_min: f64,
    /// Shared-density ratio threshold for fusing two potential objects.
    pub alpha: f64,
    /// Floor for initial log-odds computation, guarding `ln(pi/(1-pi))`
    /// at the endpoints: pi is clamped to [eps_odds, 1 - eps_odds].
    pub eps_odds: f64,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams { r: 1.1, beta: 6.0, w_max: 10.0, w_min: 4.0, alpha: 0.3, eps_odds: 1e-6 }
    }
}

impl EngineParams {
    /// Defaults for the unweighted baseline variant, which promotes
    /// potential objects after 3 detections.
    pub fn baseline_default() -> Self {
        EngineParams { w_min: 3.0, ..EngineParams::default() }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, msg: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParams(msg.into()))
            }
        }
        check(self.r.is_finite() && self.r > 0.0, "radius r must be finite and > 0")?;
        check(self.beta.is_finite() && self.beta > 0.0, "beta must be finite and > 0")?;
        check(self.w_max.is_finite() && self.w_max > 0.0, "w_max must be finite and > 0")?;
        check(self.w_min.is_finite() && self.w_min > 0.0, "w_min must be finite and > 0")?;
        check(
            self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 1.0,
            "alpha must be in (0, 1]",
        )?;
        check(
            self.eps_odds.is_finite() && self.eps_odds > 0.0 && self.eps_odds < 0.5,
            "eps_odds must be in (0, 0.5)",
        )?;
        Ok(())
    }
}

/// Monotone id allocator. Serialized with engine snapshots so that ids
/// stay unique across export/import.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdSource {
    next: u64,
}

impl IdSource {
    pub fn next_id(&mut self) -> ObjectId {
        let id = self.next;
        self.next += 1;
        id
    }

    /// Number of ids handed out so far.
    pub fn issued(&self) -> u64 {
        self.next
    }
}

/// A candidate object tracked by the engine: an information-form position
/// estimate plus clustering bookkeeping.
///
/// Exports as `{"id": .., "y": [..], "Y": [[..]], "w": .., "l": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialObject {
    pub id: ObjectId,
    /// Position estimate in information form.
    #[serde(flatten)]
    pub info: InfoState,
    /// Accumulated confidence weight.
    #[serde(rename = "w")]
    pub weight: f64,
    /// Log-odds of the confidence of the initiating detection.
    #[serde(rename = "l")]
    pub initial_log_odds: f64,
    /// Cached recovered position; kept in lockstep with `info` so the
    /// spatial index and distance checks never re-invert.
    #[serde(skip)]
    center: Vec2,
}

impl PotentialObject {
    /// Build a potential object, recovering and caching its center.
    /// Fails if the information matrix is not invertible.
    pub fn new(id: ObjectId, info: InfoState, weight: f64, initial_log_odds: f64) -> Result<Self> {
        let (center, _) = info.recover()?;
        Ok(PotentialObject { id, info, weight, initial_log_odds, center })
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    /// Replace the information state and refresh the cached center.
    pub fn set_info(&mut self, info: InfoState) -> Result<()> {
        let (center, _) = info.recover()?;
        self.info = info;
        self.center = center;
        Ok(())
    }
}

/// Equality over the estimation state; the cached center is derived and
/// excluded (a freshly deserialized object has not recovered it yet).
impl PartialEq for PotentialObject {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.info == other.info
            && self.weight == other.weight
            && self.initial_log_odds == other.initial_log_odds
    }
}

/// A confirmed object estimate produced by reclustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedObject {
    pub id: ObjectId,
    /// Recovered position estimate.
    pub position: Vec2,
    /// Recovered position covariance.
    pub covariance: Mat2,
    /// Accumulated confidence weight at output time.
    pub weight: f64,
}

/// Symmetric map of accumulated shared density between pairs of potential
/// objects. Keys are stored with the smaller id first; `i == j` entries
/// are forbidden.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DensityEntry>", into = "Vec<DensityEntry>")]
pub struct SharedDensityTable {
    entries: BTreeMap<(ObjectId, ObjectId), f64>,
}

/// Wire form of one shared-density entry.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensityEntry {
    pub i: ObjectId,
    pub j: ObjectId,
    pub d: f64,
}

impl SharedDensityTable {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(i: ObjectId, j: ObjectId) -> (ObjectId, ObjectId) {
        debug_assert_ne!(i, j, "shared density is defined between distinct objects");
        if i < j {
            (i, j)
        } else {
            (j, i)
        }
    }

    /// Accumulate `amount` onto the (i, j) entry, creating it at zero if
    /// absent.
    pub fn add(&mut self, i: ObjectId, j: ObjectId, amount: f64) {
        *self.entries.entry(Self::key(i, j)).or_insert(0.0) += amount;
    }

    /// Current shared density between i and j (0 when never co-updated).
    pub fn get(&self, i: ObjectId, j: ObjectId) -> f64 {
        if i == j {
            return 0.0;
        }
        self.entries.get(&Self::key(i, j)).copied().unwrap_or(0.0)
    }

    /// Drop every entry touching any of the given ids.
    pub fn purge(&mut self, deleted: &BTreeSet<ObjectId>) {
        if deleted.is_empty() {
            return;
        }
        self.entries.retain(|&(i, j), _| !deleted.contains(&i) && !deleted.contains(&j));
    }

    /// Entries in ascending (i, j) order.
    pub fn iter(&self) -> impl Iterator<Item = ((ObjectId, ObjectId), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl From<SharedDensityTable> for Vec<DensityEntry> {
    fn from(t: SharedDensityTable) -> Self {
        t.entries.into_iter().map(|((i, j), d)| DensityEntry { i, j, d }).collect()
    }
}

impl TryFrom<Vec<DensityEntry>> for SharedDensityTable {
    type Error = Error;

    fn try_from(v: Vec<DensityEntry>) -> Result<Self> {
        let mut t = SharedDensityTable::new();
        for e in v {
            if e.i == e.j {
                return Err(Error::InvalidParams(format!(
                    "shared-density entry with i == j == {}",
                    e.i
                )));
            }
            if t.entries.insert(SharedDensityTable::key(e.i, e.j), e.d).is_some() {
                return Err(Error::InvalidParams(format!(
                    "duplicate shared-density entry ({}, {})",
                    e.i, e.j
                )));
            }
        }
        Ok(t)
    }
}
