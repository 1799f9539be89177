//! Monte Carlo scenario and detection-stream generation.
//!
//! A scenario draw places ground-truth objects in the ROI; a simulation
//! pass runs every configured sensor over the truth exactly once and
//! emits detections with position noise, sensor-modeled confidence
//! scores, multi-detection counts, and Poisson clutter, concatenated and
//! uniformly shuffled. Everything is a pure function of (config, seed).

pub mod config;

pub use config::{
    default_sensors, scenario_a_spec, scenario_b_spec, ConfidenceModel, CountModel, ObjectKind,
    Roi, ScenarioSpec, SensorSpec, SensorSuite,
};

use crate::error::{Error, Result};
use crate::math::{Mat2, Vec2};
use crate::rng::{stream_rng, STREAM_SCENARIO, STREAM_SENSOR};
use crate::types::{Detection, Truth};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// One ground-truth object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TruthObjectRecord", into = "TruthObjectRecord")]
pub struct TruthObject {
    pub id: u64,
    pub kind: ObjectKind,
    pub position: Vec2,
}

/// Wire form: `{"id": 0, "type": "A", "x": 1.0, "y": 2.0}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct TruthObjectRecord {
    id: u64,
    #[serde(rename = "type")]
    kind: ObjectKind,
    x: f64,
    y: f64,
}

impl From<TruthObjectRecord> for TruthObject {
    fn from(r: TruthObjectRecord) -> Self {
        TruthObject { id: r.id, kind: r.kind, position: Vec2::new(r.x, r.y) }
    }
}

impl From<TruthObject> for TruthObjectRecord {
    fn from(o: TruthObject) -> Self {
        TruthObjectRecord { id: o.id, kind: o.kind, x: o.position.x, y: o.position.y }
    }
}

/// A scenario draw: the ROI and every object in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTruth {
    pub roi: Roi,
    pub objects: Vec<TruthObject>,
}

impl ScenarioTruth {
    /// Object count per type.
    pub fn counts(&self) -> BTreeMap<ObjectKind, usize> {
        let mut counts = BTreeMap::new();
        for o in &self.objects {
            *counts.entry(o.kind).or_insert(0) += 1;
        }
        counts
    }

    pub fn get(&self, id: u64) -> Option<&TruthObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

/// Draw a scenario from its layout spec. Pure in (spec, seed).
pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<ScenarioTruth> {
    spec.validate()?;
    let mut rng = stream_rng(seed, STREAM_SCENARIO);
    let roi = spec.roi();
    let mut objects = Vec::new();
    let mut next_id = 0u64;
    let mut push = |objects: &mut Vec<TruthObject>, kind: ObjectKind, p: Vec2| {
        let position = Vec2::new(
            p.x.clamp(roi.x_min, roi.x_max),
            p.y.clamp(roi.y_min, roi.y_max),
        );
        objects.push(TruthObject { id: next_id, kind, position });
        next_id += 1;
    };

    match spec {
        ScenarioSpec::Uniform { counts, .. } => {
            for (&kind, &count) in counts {
                for _ in 0..count {
                    let p = Vec2::new(
                        rng.random_range(roi.x_min..=roi.x_max),
                        rng.random_range(roi.y_min..=roi.y_max),
                    );
                    push(&mut objects, kind, p);
                }
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
            row_kind,
            pair_kind,
            ..
        } => {
            let jitter = Normal::new(0.0, jitter_sd.max(f64::MIN_POSITIVE))
                .map_err(|e| Error::InvalidParams(format!("jitter sd: {e}")))?;
            for row in 0..*rows {
                let y = row_spacing * (row as f64 + 0.5);
                for i in 0..*per_row {
                    let x = in_row_spacing * (i as f64 + 1.0);
                    let anchor = Vec2::new(
                        x + jitter.sample(&mut rng),
                        y + jitter.sample(&mut rng),
                    );
                    push(&mut objects, *row_kind, anchor);

                    // Companion: uniform over the annulus (area-uniform
                    // radius, uniform angle).
                    let (r0, r1) = (*pair_radius_min, *pair_radius_max);
                    let u: f64 = rng.random();
                    let radius = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
                    let angle = rng.random_range(0.0..std::f64::consts::TAU);
                    let offset = Vec2::new(radius * angle.cos(), radius * angle.sin());
                    push(&mut objects, *pair_kind, anchor + offset);
                }
            }
        }
    }
    Ok(ScenarioTruth { roi, objects })
}

/// Uniform scenario draw: 150x150 m, 25 objects per type.
pub fn gen_scenario_a(seed: u64) -> ScenarioTruth {
    generate(&scenario_a_spec(), seed).expect("built-in scenario spec is valid")
}

/// Paired-rows scenario draw: 105 A + 105 B objects.
pub fn gen_scenario_b(seed: u64) -> ScenarioTruth {
    generate(&scenario_b_spec(), seed).expect("built-in scenario spec is valid")
}

/// Simulation switches beyond the sensor models themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    /// Clamp discrete-normal detection counts to a minimum of 0 instead
    /// of the default 1 (an object the Bernoulli gate marked "detected"
    /// may then still emit nothing).
    pub count_floor_zero: bool,
}

/// One full pass of every sensor over the truth. Returns the shuffled
/// detection stream. Pure in (truth, sensors, seed).
pub fn simulate(truth: &ScenarioTruth, sensors: &SensorSuite, seed: u64) -> Result<Vec<Detection>> {
    simulate_with_options(truth, sensors, seed, SimOptions::default())
}

/// As [`simulate`] with explicit [`SimOptions`].
pub fn simulate_with_options(
    truth: &ScenarioTruth,
    sensors: &SensorSuite,
    seed: u64,
    options: SimOptions,
) -> Result<Vec<Detection>> {
    sensors.validate()?;
    truth.roi.validate()?;
    let mut rng = stream_rng(seed, STREAM_SENSOR);
    let count_floor = if options.count_floor_zero { 0 } else { 1 };
    let mut detections = Vec::new();

    for sensor in &sensors.sensors {
        let noise = Normal::new(0.0, sensor.sigma2.sqrt())
            .map_err(|e| Error::InvalidParams(format!("sensor {}: {e}", sensor.name)))?;
        let r = Mat2::scaled_identity(sensor.sigma2);

        for object in &truth.objects {
            let Some(&pd) = sensor.pd.get(&object.kind) else {
                continue;
            };
            if !rng.random_bool(pd) {
                continue;
            }
            let count = match sensor.count_model[&object.kind] {
                CountModel::Fixed { n } => n as i64,
                CountModel::DiscreteNormal { mean, sd } => {
                    let draw = Normal::new(mean, sd)
                        .map_err(|e| Error::InvalidParams(format!("count model: {e}")))?
                        .sample(&mut rng);
                    (draw.round() as i64).max(count_floor)
                }
            };
            for _ in 0..count {
                let z = object.position + Vec2::new(noise.sample(&mut rng), noise.sample(&mut rng));
                detections.push(Detection {
                    sensor: sensor.name.clone(),
                    z,
                    pi: sample_confidence(&sensor.conf_det, &mut rng),
                    r,
                    truth: Some(Truth::Object { id: object.id }),
                });
            }
        }

        let lambda = sensor.clutter_rate * truth.roi.area();
        if lambda > 0.0 {
            let n_clutter = Poisson::new(lambda)
                .map_err(|e| Error::InvalidParams(format!("clutter rate: {e}")))?
                .sample(&mut rng) as u64;
            for _ in 0..n_clutter {
                let z = Vec2::new(
                    rng.random_range(truth.roi.x_min..=truth.roi.x_max),
                    rng.random_range(truth.roi.y_min..=truth.roi.y_max),
                );
                detections.push(Detection {
                    sensor: sensor.name.clone(),
                    z,
                    pi: sample_confidence(&sensor.conf_clutter, &mut rng),
                    r,
                    truth: Some(Truth::Clutter),
                });
            }
        }
    }

    detections.shuffle(&mut rng);
    Ok(detections)
}

fn sample_confidence<R: Rng>(model: &ConfidenceModel, rng: &mut R) -> f64 {
    match *model {
        ConfidenceModel::PmfS1 => sample_pi_s1(rng),
        ConfidenceModel::Beta { a, b } => sample_beta(a, b, rng),
    }
}

/// Three-point confidence mass function: 0.5 w.p. 0.25, 0.75 w.p. 0.25,
/// 1.0 w.p. 0.5.
pub fn sample_pi_s1<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if u < 0.25 {
        0.5
    } else if u < 0.5 {
        0.75
    } else {
        1.0
    }
}

/// Beta(a, b) variate as a ratio of two Gamma draws: x / (x + y) with
/// x ~ Gamma(a, 1), y ~ Gamma(b, 1) (Marsaglia-Tsang under the hood).
pub fn sample_beta<R: Rng>(a: f64, b: f64, rng: &mut R) -> f64 {
    let ga = Gamma::new(a, 1.0).expect("shape > 0 validated by config");
    let gb = Gamma::new(b, 1.0).expect("shape > 0 validated by config");
    let x = ga.sample(rng);
    let y = gb.sample(rng);
    if x + y > 0.0 {
        x / (x + y)
    } else {
        0.5
    }
}

/// Analytic expectation of the stream length for one run: per-sensor
/// clutter intensity plus, per detectable (sensor, type) pair,
/// `pd * E[count]` summed over the objects.
pub fn expected_stream_size(truth_counts: &BTreeMap<ObjectKind, usize>, sensors: &SensorSuite, roi_area: f64) -> f64 {
    let mut total = 0.0;
    for sensor in &sensors.sensors {
        total += sensor.clutter_rate * roi_area;
        for (kind, &pd) in &sensor.pd {
            let n = truth_counts.get(kind).copied().unwrap_or(0) as f64;
            total += n * pd * sensor.count_model[kind].expected();
        }
    }
    total
}

/// Write a truth sidecar (`truth.json`).
pub fn write_truth_path(path: &Path, truth: &ScenarioTruth) -> Result<()> {
    let json = serde_json::to_string_pretty(truth)
        .map_err(|e| Error::Internal(format!("serializing truth: {e}")))?;
    std::fs::write(path, json)
        .map_err(|e| Error::Internal(format!("writing {}: {e}", path.display())))
}

/// Read a truth sidecar.
pub fn read_truth_path(path: &Path) -> Result<ScenarioTruth> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::MalformedStream {
        line: 0,
        message: format!("cannot open {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedStream {
        line: 0,
        message: format!("malformed truth file {}: {e}", path.display()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::STREAM_TEST;
    use std::collections::BTreeSet;

    #[test]
    fn scenario_a_shape() {
        for seed in [0, 1, 7] {
            let truth = gen_scenario_a(seed);
            assert_eq!(truth.objects.len(), 100);
            for (kind, count) in truth.counts() {
                assert_eq!(count, 25, "{kind:?}");
            }
            for o in &truth.objects {
                assert!(truth.roi.contains(o.position));
            }
        }
        assert_ne!(gen_scenario_a(1).objects, gen_scenario_a(2).objects);
        assert_eq!(gen_scenario_a(3), gen_scenario_a(3));
    }

    #[test]
    fn scenario_b_shape() {
        let truth = gen_scenario_b(42);
        let counts = truth.counts();
        assert_eq!(counts[&ObjectKind::A], 105);
        assert_eq!(counts[&ObjectKind::B], 105);

        // Objects alternate A, B with each B in the 0.5-1.5 m annulus of
        // its preceding A.
        for pair in truth.objects.chunks(2) {
            assert_eq!(pair[0].kind, ObjectKind::A);
            assert_eq!(pair[1].kind, ObjectKind::B);
            let d = pair[0].position.distance(pair[1].position);
            assert!((0.5..=1.5).contains(&d), "pair distance {d}");
        }

        // Row structure: A-object y values cluster near the 5 row lines.
        let rows = [12.5, 37.5, 62.5, 87.5, 112.5];
        for o in truth.objects.iter().filter(|o| o.kind == ObjectKind::A) {
            let nearest = rows.iter().map(|r| (o.position.y - r).abs()).fold(f64::MAX, f64::min);
            assert!(nearest < 2.0, "A object at y = {}", o.position.y);
        }
    }

    #[test]
    fn simulate_is_reproducible() {
        let truth = gen_scenario_a(5);
        let suite = default_sensors();
        let a = simulate(&truth, &suite, 5).unwrap();
        let b = simulate(&truth, &suite, 5).unwrap();
        assert_eq!(a, b);
        let c = simulate(&truth, &suite, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn detection_counts_respect_count_models() {
        let truth = gen_scenario_a(9);
        let suite = default_sensors();
        let multi_capable: BTreeSet<&str> = ["S2", "S5"].into_iter().collect();
        for seed in 0..5 {
            let stream = simulate(&truth, &suite, seed).unwrap();
            let mut per_pair: BTreeMap<(String, u64), u32> = BTreeMap::new();
            for d in &stream {
                if let Some(Truth::Object { id }) = d.truth {
                    *per_pair.entry((d.sensor.clone(), id)).or_insert(0) += 1;
                }
            }
            for ((sensor, _), count) in per_pair {
                assert!(count >= 1);
                if count >= 2 {
                    assert!(
                        multi_capable.contains(sensor.as_str()),
                        "{sensor} emitted {count} detections for one object"
                    );
                }
            }
        }
    }

    #[test]
    fn sensors_skip_undetectable_types() {
        let truth = gen_scenario_a(3);
        let suite = default_sensors();
        let type_of: BTreeMap<u64, ObjectKind> =
            truth.objects.iter().map(|o| (o.id, o.kind)).collect();
        for seed in 0..10 {
            for d in simulate(&truth, &suite, seed).unwrap() {
                if let Some(Truth::Object { id }) = d.truth {
                    let kind = type_of[&id];
                    match d.sensor.as_str() {
                        "S2" => assert_ne!(kind, ObjectKind::B, "S2 cannot detect B"),
                        "S3" => assert_ne!(kind, ObjectKind::A, "S3 cannot detect A"),
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn pi_s1_pmf() {
        let mut rng = stream_rng(10, STREAM_TEST);
        let mut counts = BTreeMap::new();
        let n = 100_000;
        for _ in 0..n {
            let v = sample_pi_s1(&mut rng);
            *counts.entry(format!("{v}")).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 3, "support is exactly three points");
        let freq = |k: &str| counts[k] as f64 / n as f64;
        assert!((freq("0.5") - 0.25).abs() < 0.01);
        assert!((freq("0.75") - 0.25).abs() < 0.01);
        assert!((freq("1") - 0.5).abs() < 0.01);
    }

    #[test]
    fn beta_sampler_moments() {
        let mut rng = stream_rng(11, STREAM_TEST);
        let mean = |a: f64, b: f64, rng: &mut _| -> f64 {
            let n = 100_000;
            (0..n).map(|_| sample_beta(a, b, rng)).sum::<f64>() / n as f64
        };
        assert!((mean(8.0, 2.5, &mut rng) - 8.0 / 10.5).abs() < 0.01);
        assert!((mean(8.0, 8.0, &mut rng) - 0.5).abs() < 0.01);
    }

    #[test]
    fn beta_1_1_is_uniform() {
        // Kolmogorov-Smirnov statistic against Uniform(0,1).
        let mut rng = stream_rng(12, STREAM_TEST);
        let n = 10_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_beta(1.0, 1.0, &mut rng)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let lo = (x - i as f64 / n as f64).abs();
                let hi = (x - (i + 1) as f64 / n as f64).abs();
                lo.max(hi)
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS statistic {ks}");
    }

    #[test]
    fn empirical_stream_size_tracks_expectation() {
        let suite = default_sensors();
        let truth = gen_scenario_a(0);
        let expected = expected_stream_size(&truth.counts(), &suite, truth.roi.area());
        // Clamped count models push the analytic value a bit above the
        // nominal ~1777; both land inside the observed envelope.
        assert!((1650.0..1900.0).contains(&expected), "{expected}");

        let runs = 40;
        let mut total = 0usize;
        for seed in 0..runs {
            total += simulate(&truth, &suite, seed).unwrap().len();
        }
        let mean = total as f64 / runs as f64;
        // sd per run ≈ 60; mean of 40 runs within ±4 sd/sqrt(40) ≈ 38.
        assert!((mean - expected).abs() < 40.0, "mean {mean} vs expected {expected}");
    }

    #[test]
    fn count_floor_zero_option_lowers_totals() {
        let truth = gen_scenario_a(2);
        let suite = default_sensors();
        let mut floored = 0usize;
        let mut free = 0usize;
        for seed in 0..20 {
            floored += simulate(&truth, &suite, seed).unwrap().len();
            free += simulate_with_options(
                &truth,
                &suite,
                seed,
                SimOptions { count_floor_zero: true },
            )
            .unwrap()
            .len();
        }
        assert!(free < floored, "zero-floor must reduce emitted detections");
    }

    #[test]
    fn clutter_is_uniform_chi_square() {
        // All-clutter stream (no objects), 10x10 grid over the ROI,
        // aggregated over 100 seeds. Critical value for 99 degrees of
        // freedom at significance 0.01 is 134.642.
        let truth = ScenarioTruth { roi: Roi::square(150.0), objects: Vec::new() };
        let suite = default_sensors();
        let mut bins = [[0u64; 10]; 10];
        let mut n = 0u64;
        for seed in 0..100 {
            for d in simulate(&truth, &suite, seed).unwrap() {
                assert_eq!(d.truth, Some(Truth::Clutter));
                let i = ((d.z.x / 15.0).floor() as usize).min(9);
                let j = ((d.z.y / 15.0).floor() as usize).min(9);
                bins[i][j] += 1;
                n += 1;
            }
        }
        let e = n as f64 / 100.0;
        let chi2: f64 = bins
            .iter()
            .flatten()
            .map(|&o| {
                let d = o as f64 - e;
                d * d / e
            })
            .sum();
        assert!(chi2 < 134.642, "chi-square {chi2} over {n} clutter points");
    }

    #[test]
    fn truth_sidecar_roundtrip() {
        let truth = gen_scenario_b(4);
        let dir = std::env::temp_dir().join("soda-sim-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("truth.json");
        write_truth_path(&path, &truth).unwrap();
        let back = read_truth_path(&path).unwrap();
        assert_eq!(back, truth);
        let json = std::fs::read_to_string(&path).unwrap();
        assert!(json.contains("\"type\": \"A\""), "wire format uses a type field");
    }
}
