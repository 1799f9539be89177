//! CLEAR multi-object tracking metrics over online checkpoints.
//!
//! "Frames" are detection-count checkpoints: after every N consumed
//! detections the engine's current estimates form one frame. Matching
//! follows the CLEAR protocol — correspondences from the previous frame
//! are kept while still within the gating radius, the remainder are
//! matched optimally — and MOTP/MOTA are cumulative up to each frame.
//! Identity switches are counted against a ground-truth object's most
//! recent matched estimate id. Requires estimates with persistent ids;
//! run it on id-stable methods only.

use crate::error::{Error, Result};
use crate::eval::assignment::match_estimates;
use crate::eval::RadiusMode;
use crate::sim::ScenarioTruth;
use crate::types::{EstimatedObject, ObjectId};
use std::collections::BTreeMap;

/// Engine output after a given number of consumed detections.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub detections_consumed: usize,
    pub estimates: Vec<EstimatedObject>,
}

/// Checkpoints in stream order; `detections_consumed` strictly increases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckpointSeries {
    pub checkpoints: Vec<Checkpoint>,
}

impl CheckpointSeries {
    pub fn validate(&self) -> Result<()> {
        for pair in self.checkpoints.windows(2) {
            if pair[1].detections_consumed <= pair[0].detections_consumed {
                return Err(Error::ContractViolation(
                    "checkpoint detection counts must strictly increase".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Cumulative tracking metrics up to one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotPoint {
    pub detections_consumed: usize,
    /// Cumulative matched pairs over all frames so far.
    pub tp: usize,
    pub fp: usize,
    pub misses: usize,
    pub id_switches: usize,
    /// Mean matched-pair distance; `None` until the first match exists.
    pub motp: Option<f64>,
    /// 1 − (misses + false positives + switches) / cumulative gt count.
    /// May be negative.
    pub mota: f64,
}

/// Run the CLEAR protocol over a checkpoint series. The (static) truth
/// provides every frame's ground-truth set.
pub fn clear_mot(
    series: &CheckpointSeries,
    truth: &ScenarioTruth,
    mode: RadiusMode,
) -> Result<Vec<MotPoint>> {
    series.validate()?;
    let mut gts = truth.objects.clone();
    gts.sort_by_key(|o| o.id);

    // gt id -> estimate id matched in the previous frame (for carry-over)
    // and most recently in any frame (for switch counting).
    let mut prev_match: BTreeMap<u64, ObjectId> = BTreeMap::new();
    let mut last_known: BTreeMap<u64, ObjectId> = BTreeMap::new();

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut misses = 0usize;
    let mut id_switches = 0usize;
    let mut gt_total = 0usize;
    let mut distance_total = 0.0f64;

    let mut out = Vec::with_capacity(series.checkpoints.len());
    for frame in &series.checkpoints {
        let estimates: BTreeMap<ObjectId, &EstimatedObject> =
            frame.estimates.iter().map(|e| (e.id, e)).collect();

        // Carry over still-valid correspondences.
        let mut current: BTreeMap<u64, (ObjectId, f64)> = BTreeMap::new();
        for gt in &gts {
            if let Some(&est_id) = prev_match.get(&gt.id) {
                if let Some(est) = estimates.get(&est_id) {
                    let d = gt.position.distance(est.position);
                    if d <= mode.radius(gt.kind) {
                        current.insert(gt.id, (est_id, d));
                    }
                }
            }
        }

        // Optimal assignment over what remains.
        let free_gts: Vec<_> = gts.iter().filter(|g| !current.contains_key(&g.id)).collect();
        let taken: std::collections::BTreeSet<ObjectId> =
            current.values().map(|&(id, _)| id).collect();
        let free_ests: Vec<&EstimatedObject> = frame
            .estimates
            .iter()
            .filter(|e| !taken.contains(&e.id))
            .collect();
        if !free_gts.is_empty() && !free_ests.is_empty() {
            let truth_rest = ScenarioTruth {
                roi: truth.roi,
                objects: free_gts.iter().map(|&&o| o).collect(),
            };
            let ests_rest: Vec<EstimatedObject> =
                free_ests.iter().map(|&e| e.clone()).collect();
            let matched = match_estimates(&ests_rest, &truth_rest, mode);
            for p in matched.pairs {
                if let Some(&old) = last_known.get(&p.gt_id) {
                    if old != p.estimate_id {
                        id_switches += 1;
                    }
                }
                current.insert(p.gt_id, (p.estimate_id, p.distance));
            }
        }

        let n_matched = current.len();
        tp += n_matched;
        fp += frame.estimates.len() - n_matched;
        misses += gts.len() - n_matched;
        gt_total += gts.len();
        distance_total += current.values().map(|&(_, d)| d).sum::<f64>();

        prev_match = current.iter().map(|(&g, &(e, _))| (g, e)).collect();
        for (&g, &(e, _)) in &current {
            last_known.insert(g, e);
        }

        out.push(MotPoint {
            detections_consumed: frame.detections_consumed,
            tp,
            fp,
            misses,
            id_switches,
            motp: if tp > 0 { Some(distance_total / tp as f64) } else { None },
            mota: if gt_total > 0 {
                1.0 - (misses + fp + id_switches) as f64 / gt_total as f64
            } else {
                1.0
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Mat2, Vec2};
    use crate::sim::{ObjectKind, Roi, TruthObject};

    fn est(id: ObjectId, x: f64, y: f64) -> EstimatedObject {
        EstimatedObject { id, position: Vec2::new(x, y), covariance: Mat2::IDENTITY, weight: 10.0 }
    }

    fn scene(objects: Vec<TruthObject>) -> ScenarioTruth {
        ScenarioTruth { roi: Roi::square(150.0), objects }
    }

    fn gt(id: u64, x: f64, y: f64) -> TruthObject {
        TruthObject { id, kind: ObjectKind::A, position: Vec2::new(x, y) }
    }

    #[test]
    fn perfect_stable_tracking() {
        let truth = scene(vec![gt(0, 1.0, 1.0), gt(1, 5.0, 5.0)]);
        let frame = |n: usize| Checkpoint {
            detections_consumed: n,
            estimates: vec![est(100, 1.0, 1.0), est(101, 5.0, 5.0)],
        };
        let series = CheckpointSeries { checkpoints: vec![frame(100), frame(200), frame(300)] };
        let points = clear_mot(&series, &truth, RadiusMode::Normal).unwrap();
        for p in &points {
            assert_eq!(p.motp, Some(0.0));
            assert_eq!(p.mota, 1.0);
            assert_eq!(p.id_switches, 0);
        }
        assert_eq!(points[2].tp, 6);
    }

    #[test]
    fn id_switch_counts_once_and_halves_mota() {
        // One gt matched by id 3 then id 7: IDSW = 1, MOTA = 1 - 1/2.
        let truth = scene(vec![gt(0, 0.0, 0.0)]);
        let series = CheckpointSeries {
            checkpoints: vec![
                Checkpoint { detections_consumed: 100, estimates: vec![est(3, 0.1, 0.0)] },
                Checkpoint { detections_consumed: 200, estimates: vec![est(7, 0.1, 0.0)] },
            ],
        };
        let points = clear_mot(&series, &truth, RadiusMode::Normal).unwrap();
        assert_eq!(points[0].id_switches, 0);
        assert_eq!(points[1].id_switches, 1);
        assert_eq!(points[1].mota, 0.5);
    }

    #[test]
    fn empty_frames_zero_mota() {
        let truth = scene(vec![gt(0, 0.0, 0.0), gt(1, 3.0, 0.0)]);
        let series = CheckpointSeries {
            checkpoints: (1..=3)
                .map(|k| Checkpoint { detections_consumed: 100 * k, estimates: Vec::new() })
                .collect(),
        };
        let points = clear_mot(&series, &truth, RadiusMode::Normal).unwrap();
        let last = points.last().unwrap();
        assert_eq!(last.mota, 0.0, "all-miss tracking scores zero");
        assert_eq!(last.motp, None, "MOTP undefined with no matches");
        assert_eq!(last.misses, 6);
    }

    #[test]
    fn false_positives_push_mota_negative() {
        let truth = scene(vec![gt(0, 0.0, 0.0)]);
        let series = CheckpointSeries {
            checkpoints: vec![Checkpoint {
                detections_consumed: 100,
                estimates: vec![est(1, 50.0, 50.0), est(2, 60.0, 60.0), est(3, 70.0, 70.0)],
            }],
        };
        let points = clear_mot(&series, &truth, RadiusMode::Normal).unwrap();
        // 1 miss + 3 fps over 1 gt: MOTA = 1 - 4 = -3.
        assert_eq!(points[0].mota, -3.0);
    }

    #[test]
    fn carry_over_beats_closer_newcomer() {
        // Frame 1 matches gt to estimate 3. In frame 2 a new estimate 9
        // sits marginally closer, but the standing correspondence is kept
        // while within radius — no switch, newcomer becomes FP.
        let truth = scene(vec![gt(0, 0.0, 0.0)]);
        let series = CheckpointSeries {
            checkpoints: vec![
                Checkpoint { detections_consumed: 100, estimates: vec![est(3, 0.3, 0.0)] },
                Checkpoint {
                    detections_consumed: 200,
                    estimates: vec![est(3, 0.3, 0.0), est(9, 0.2, 0.0)],
                },
            ],
        };
        let points = clear_mot(&series, &truth, RadiusMode::Normal).unwrap();
        assert_eq!(points[1].id_switches, 0);
        assert_eq!(points[1].fp, 1);
        assert_eq!(points[1].tp, 2);
    }

    #[test]
    fn reappearing_old_id_after_gap_is_not_a_switch() {
        // gt matched to 3, then unmatched for a frame, then matched to 3
        // again: zero switches. Matching to 8 instead would switch.
        let truth = scene(vec![gt(0, 0.0, 0.0)]);
        let series = CheckpointSeries {
            checkpoints: vec![
                Checkpoint { detections_consumed: 100, estimates: vec![est(3, 0.2, 0.0)] },
                Checkpoint { detections_consumed: 200, estimates: vec![] },
                Checkpoint { detections_consumed: 300, estimates: vec![est(3, 0.2, 0.0)] },
            ],
        };
        let points = clear_mot(&series, &truth, RadiusMode::Normal).unwrap();
        assert_eq!(points[2].id_switches, 0);

        let series = CheckpointSeries {
            checkpoints: vec![
                Checkpoint { detections_consumed: 100, estimates: vec![est(3, 0.2, 0.0)] },
                Checkpoint { detections_consumed: 200, estimates: vec![] },
                Checkpoint { detections_consumed: 300, estimates: vec![est(8, 0.2, 0.0)] },
            ],
        };
        let points = clear_mot(&series, &truth, RadiusMode::Normal).unwrap();
        assert_eq!(points[2].id_switches, 1, "switch detected against last-known id");
    }

    #[test]
    fn non_increasing_series_rejected() {
        let truth = scene(vec![gt(0, 0.0, 0.0)]);
        let series = CheckpointSeries {
            checkpoints: vec![
                Checkpoint { detections_consumed: 200, estimates: vec![] },
                Checkpoint { detections_consumed: 200, estimates: vec![] },
            ],
        };
        assert!(matches!(
            clear_mot(&series, &truth, RadiusMode::Normal),
            Err(Error::ContractViolation(_))
        ));
    }
}
