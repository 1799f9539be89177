//! Radius-gated optimal matching of estimates to ground truth.
//!
//! Matching maximizes true-positive count first and minimizes total
//! distance second. Both goals are met with one minimum-cost square
//! assignment: infeasible (out-of-radius) and padding cells carry a cost
//! far above any achievable sum of real distances, so cheaper solutions
//! always contain more feasible pairs.

use crate::eval::RadiusMode;
use crate::sim::ScenarioTruth;
use crate::types::{EstimatedObject, ObjectId};
use serde::{Deserialize, Serialize};

/// Cost of an infeasible or padded assignment cell. Real matched
/// distances are bounded by the largest gating radius (< 1 m), so any
/// matching is cheaper than leaving a feasible pair unmatched as long as
/// problem sizes stay far below this value.
const BIG: f64 = 1e7;

/// One matched (ground truth, estimate) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub gt_id: u64,
    pub estimate_id: ObjectId,
    pub distance: f64,
}

/// Outcome of matching one estimate set against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub false_positives: Vec<ObjectId>,
    pub false_negatives: Vec<u64>,
    pub radius_mode: RadiusMode,
}

impl MatchResult {
    pub fn tp(&self) -> usize {
        self.pairs.len()
    }

    pub fn fp(&self) -> usize {
        self.false_positives.len()
    }

    pub fn missed(&self) -> usize {
        self.false_negatives.len()
    }
}

/// Minimum-cost perfect assignment on a square cost matrix via shortest
/// augmenting paths with dual potentials, O(n³). Returns `row -> column`.
/// Deterministic: equal-cost alternatives resolve by scan order, i.e. by
/// ascending index of the rows/columns as presented.
pub fn solve_square(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    debug_assert!(cost.iter().all(|row| row.len() == n), "matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    // 1-based internals; index 0 is the virtual start column/row.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut assigned_row = vec![0usize; n + 1]; // column -> row (0 = free)
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        // Augment along the recorded path.
        while j0 != 0 {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[assigned_row[j] - 1] = j - 1;
    }
    row_to_col
}

/// Match estimates against ground truth under the given radius mode:
/// an optimal one-to-one assignment over pairs within the gt object's
/// per-type radius (inclusive), minimizing total distance at maximum
/// cardinality. Unmatched estimates become false positives, unmatched
/// ground-truth objects false negatives.
pub fn match_estimates(
    estimates: &[EstimatedObject],
    truth: &ScenarioTruth,
    mode: RadiusMode,
) -> MatchResult {
    let mut gts = truth.objects.clone();
    gts.sort_by_key(|o| o.id);
    let mut ests = estimates.to_vec();
    ests.sort_by_key(|e| e.id);

    let n = gts.len().max(ests.len());
    if n == 0 {
        return MatchResult {
            pairs: Vec::new(),
            false_positives: Vec::new(),
            false_negatives: Vec::new(),
            radius_mode: mode,
        };
    }

    let mut cost = vec![vec![BIG; n]; n];
    for (g, gt) in gts.iter().enumerate() {
        let radius = mode.radius(gt.kind);
        for (e, est) in ests.iter().enumerate() {
            let d = gt.position.distance(est.position);
            if d <= radius {
                cost[g][e] = d;
            }
        }
    }

    let assignment = solve_square(&cost);
    let mut pairs = Vec::new();
    let mut matched_est = vec![false; ests.len()];
    let mut matched_gt = vec![false; gts.len()];
    for (g, gt) in gts.iter().enumerate() {
        let e = assignment[g];
        if e >= ests.len() {
            continue;
        }
        let d = gt.position.distance(ests[e].position);
        if d <= mode.radius(gt.kind) {
            pairs.push(MatchedPair { gt_id: gt.id, estimate_id: ests[e].id, distance: d });
            matched_gt[g] = true;
            matched_est[e] = true;
        }
    }

    MatchResult {
        pairs,
        false_positives: ests
            .iter()
            .enumerate()
            .filter(|(e, _)| !matched_est[*e])
            .map(|(_, est)| est.id)
            .collect(),
        false_negatives: gts
            .iter()
            .enumerate()
            .filter(|(g, _)| !matched_gt[*g])
            .map(|(_, gt)| gt.id)
            .collect(),
        radius_mode: mode,
    }
}
