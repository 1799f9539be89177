//! Scenario and sensor configuration: object types, sensor model
//! parameters, scenario layouts, and the built-in five-sensor suite used
//! throughout the experiments.

use crate::error::{Error, Result};
use crate::math::{normal_cdf, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Object type. Types differ in per-sensor detectability and in the
/// matching radii used by evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectKind {
    A,
    B,
    C,
    D,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 4] = [ObjectKind::A, ObjectKind::B, ObjectKind::C, ObjectKind::D];

    /// Matching radius in meters for the normal evaluation mode.
    pub fn radius_normal(self) -> f64 {
        match self {
            ObjectKind::A => 0.8,
            ObjectKind::B => 0.7,
            ObjectKind::C => 0.75,
            ObjectKind::D => 0.95,
        }
    }

    /// Matching radius in meters for the strict evaluation mode.
    pub fn radius_strict(self) -> f64 {
        match self {
            ObjectKind::A => 0.3,
            ObjectKind::B => 0.2,
            ObjectKind::C => 0.25,
            ObjectKind::D => 0.45,
        }
    }
}

/// Axis-aligned rectangular region of interest, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Roi {
    pub fn square(side: f64) -> Self {
        Roi { x_min: 0.0, y_min: 0.0, x_max: side, y_max: side }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::InvalidParams("ROI must be a non-empty finite rectangle".into()));
        }
        Ok(())
    }
}

/// Number of detections a sensor emits for one detected object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountModel {
    /// Always exactly `n` detections.
    Fixed { n: u32 },
    /// Gaussian draw rounded to the nearest integer.
    DiscreteNormal { mean: f64, sd: f64 },
}

impl CountModel {
    /// Expected emitted count, honoring the round-to-nearest rule with
    /// counts clamped to a minimum of 1.
    pub fn expected(&self) -> f64 {
        match *self {
            CountModel::Fixed { n } => n as f64,
            CountModel::DiscreteNormal { mean, sd } => {
                // E[max(1, round(X))] summed over the integer cells of a
                // comfortably wide window around the mean.
                let lo = (mean - 10.0 * sd).floor() as i64;
                let hi = (mean + 10.0 * sd).ceil() as i64;
                let mut e = 0.0;
                for k in lo..=hi {
                    let p = normal_cdf((k as f64 + 0.5 - mean) / sd)
                        - normal_cdf((k as f64 - 0.5 - mean) / sd);
                    e += (k.max(1)) as f64 * p;
                }
                // Tail mass beyond the window maps to its nearest bound.
                e += normal_cdf((lo as f64 - 0.5 - mean) / sd) * lo.max(1) as f64;
                e += (1.0 - normal_cdf((hi as f64 + 0.5 - mean) / sd)) * hi.max(1) as f64;
                e
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CountModel::Fixed { n } => {
                if n == 0 {
                    return Err(Error::InvalidParams("fixed count must be >= 1".into()));
                }
            }
            CountModel::DiscreteNormal { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
                    return Err(Error::InvalidParams(
                        "discrete-normal count needs finite mean and sd > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Distribution of the sensor-reported confidence score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfidenceModel {
    /// Three-point mass: 0.5 w.p. 0.25, 0.75 w.p. 0.25, 1.0 w.p. 0.5.
    PmfS1,
    /// Beta(a, b) on [0, 1].
    Beta { a: f64, b: f64 },
}

impl ConfidenceModel {
    pub fn validate(&self) -> Result<()> {
        if let ConfidenceModel::Beta { a, b } = *self {
            if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
                return Err(Error::InvalidParams("beta parameters must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Detection statistics of one sensor. A sensor cannot detect object
/// types absent from `pd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub name: String,
    /// Detection probability per object type.
    pub pd: BTreeMap<ObjectKind, f64>,
    /// Detections emitted per detected object, per type.
    pub count_model: BTreeMap<ObjectKind, CountModel>,
    /// Isotropic position-noise variance in m² (R = sigma2 * I).
    pub sigma2: f64,
    /// Confidence distribution for true-object detections.
    pub conf_det: ConfidenceModel,
    /// Confidence distribution for clutter detections.
    pub conf_clutter: ConfidenceModel,
    /// Clutter intensity in detections per m² per scan.
    pub clutter_rate: f64,
}

impl SensorSpec {
    pub fn validate(&self) -> Result<()> {
        for (kind, &p) in &self.pd {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidParams(format!(
                    "sensor {}: pd({kind:?}) = {p} outside [0, 1]",
                    self.name
                )));
            }
            let count = self.count_model.get(kind).ok_or_else(|| {
                Error::InvalidParams(format!(
                    "sensor {}: no count model for detectable type {kind:?}",
                    self.name
                ))
            })?;
            count.validate()?;
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "sensor {}: sigma2 must be > 0",
                self.name
            )));
        }
        if !(self.clutter_rate.is_finite() && self.clutter_rate >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "sensor {}: clutter rate must be >= 0",
                self.name
            )));
        }
        self.conf_det.validate()?;
        self.conf_clutter.validate()
    }
}

/// A set of sensors that each scan the ROI once per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSuite {
    pub sensors: Vec<SensorSpec>,
}

impl SensorSuite {
    pub fn validate(&self) -> Result<()> {
        if self.sensors.is_empty() {
            return Err(Error::InvalidParams("sensor suite is empty".into()));
        }
        for s in &self.sensors {
            s.validate()?;
        }
        Ok(())
    }
}

/// The built-in five-sensor suite: heterogeneous detection probabilities,
/// multi-detection counts, noise levels, confidence distributions, and
/// clutter rates.
pub fn default_sensors() -> SensorSuite {
    fn pd(entries: &[(ObjectKind, f64)]) -> BTreeMap<ObjectKind, f64> {
        entries.iter().copied().collect()
    }
    fn counts(entries: &[(ObjectKind, CountModel)]) -> BTreeMap<ObjectKind, CountModel> {
        entries.iter().copied().collect()
    }
    let one = CountModel::Fixed { n: 1 };
    let n31 = CountModel::DiscreteNormal { mean: 3.0, sd: 1.0 };
    let n21 = CountModel::DiscreteNormal { mean: 2.0, sd: 1.0 };
    use ObjectKind::{A, B, C, D};

    SensorSuite {
        sensors: vec![
            SensorSpec {
                name: "S1".into(),
                pd: pd(&[(A, 0.4), (B, 0.7), (C, 0.9), (D, 0.8)]),
                count_model: counts(&[(A, one), (B, one), (C, one), (D, one)]),
                sigma2: 0.015,
                conf_det: ConfidenceModel::PmfS1,
                conf_clutter: ConfidenceModel::PmfS1,
                clutter_rate: 0.0005,
            },
            SensorSpec {
                name: "S2".into(),
                pd: pd(&[(A, 0.8), (C, 0.4), (D, 0.4)]),
                count_model: counts(&[(A, n31), (C, n31), (D, n31)]),
                sigma2: 0.167,
                conf_det: ConfidenceModel::Beta { a: 8.0, b: 2.5 },
                conf_clutter: ConfidenceModel::Beta { a: 8.0, b: 8.0 },
                clutter_rate: 0.02,
            },
            SensorSpec {
                name: "S3".into(),
                pd: pd(&[(B, 0.85), (C, 0.4), (D, 0.4)]),
                count_model: counts(&[(B, one), (C, one), (D, one)]),
                sigma2: 0.082,
                conf_det: ConfidenceModel::Beta { a: 8.0, b: 2.5 },
                conf_clutter: ConfidenceModel::Beta { a: 8.0, b: 8.0 },
                clutter_rate: 0.01,
            },
            SensorSpec {
                name: "S4".into(),
                pd: pd(&[(A, 0.6), (B, 0.6), (C, 0.6), (D, 0.6)]),
                count_model: counts(&[(A, one), (B, one), (C, one), (D, one)]),
                sigma2: 0.082,
                conf_det: ConfidenceModel::Beta { a: 8.0, b: 2.5 },
                conf_clutter: ConfidenceModel::Beta { a: 8.0, b: 8.0 },
                clutter_rate: 0.01,
            },
            SensorSpec {
                name: "S5".into(),
                pd: pd(&[(A, 0.8), (B, 0.3), (C, 0.7), (D, 0.7)]),
                count_model: counts(&[(A, n21), (B, n21), (C, n21), (D, n21)]),
                sigma2: 0.376,
                conf_det: ConfidenceModel::Beta { a: 8.0, b: 2.5 },
                conf_clutter: ConfidenceModel::Beta { a: 8.0, b: 8.0 },
                clutter_rate: 0.02,
            },
        ],
    }
}

/// Declarative scenario layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    /// Independently uniform object positions.
    Uniform { roi: Roi, counts: BTreeMap<ObjectKind, usize> },
    /// Evenly spaced rows of `row_kind` objects (grid plus Gaussian
    /// jitter), each paired with one `pair_kind` object placed uniformly
    /// in an annulus around it.
    PairedRows {
        roi: Roi,
        rows: usize,
        per_row: usize,
        /// Distance between rows; row r sits at y = row_spacing * (r + 0.5).
        row_spacing: f64,
        /// In-row pitch; position i sits at x = in_row_spacing * (i + 1).
        in_row_spacing: f64,
        /// Standard deviation of the per-object grid jitter, both axes.
        jitter_sd: f64,
        pair_radius_min: f64,
        pair_radius_max: f64,
        row_kind: ObjectKind,
        pair_kind: ObjectKind,
    },
}

impl ScenarioSpec {
    pub fn roi(&self) -> Roi {
        match self {
            ScenarioSpec::Uniform { roi, .. } => *roi,
            ScenarioSpec::PairedRows { roi, .. } => *roi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.roi().validate()?;
        match self {
            ScenarioSpec::Uniform { counts, .. } => {
                if counts.values().sum::<usize>() == 0 {
                    return Err(Error::InvalidParams("scenario places no objects".into()));
                }
            }
            ScenarioSpec::PairedRows {
                rows,
                per_row,
                row_spacing,
                in_row_spacing,
                jitter_sd,
                pair_radius_min,
                pair_radius_max,
                ..
            } => {
                if *rows == 0 || *per_row == 0 {
                    return Err(Error::InvalidParams("scenario places no objects".into()));
                }
                let ok = row_spacing.is_finite()
                    && *row_spacing > 0.0
                    && in_row_spacing.is_finite()
                    && *in_row_spacing > 0.0
                    && jitter_sd.is_finite()
                    && *jitter_sd >= 0.0
                    && pair_radius_min.is_finite()
                    && pair_radius_max.is_finite()
                    && *pair_radius_min > 0.0
                    && pair_radius_max >= pair_radius_min;
                if !ok {
                    return Err(Error::InvalidParams("bad paired-rows geometry".into()));
                }
            }
        }
        Ok(())
    }
}

/// Uniform scenario: 150x150 m ROI, 25 objects of each type.
pub fn scenario_a_spec() -> ScenarioSpec {
    ScenarioSpec::Uniform {
        roi: Roi::square(150.0),
        counts: ObjectKind::ALL.iter().map(|&k| (k, 25)).collect(),
    }
}

/// Paired-rows scenario: 5 rows of 21 type-A objects, each with a type-B
/// companion 0.5-1.5 m away (105 + 105 objects).
pub fn scenario_b_spec() -> ScenarioSpec {
    ScenarioSpec::PairedRows {
        roi: Roi::square(150.0),
        rows: 5,
        per_row: 21,
        row_spacing: 25.0,
        in_row_spacing: 5.0,
        jitter_sd: 0.25,
        pair_radius_min: 0.5,
        pair_radius_max: 1.5,
        row_kind: ObjectKind::A,
        pair_kind: ObjectKind::B,
    }
}
