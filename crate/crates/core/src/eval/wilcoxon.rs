//! Two-sided Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped and absolute differences are ranked with
//! midranks for ties. Up to [`EXACT_MAX_N`] pairs the smaller rank sum is
//! tested exactly, by convolving the signed-rank null distribution; past
//! that the rank lattice is fine enough for the normal approximation with
//! tie-corrected variance and a continuity correction, which is what the
//! Monte Carlo campaigns (dozens to hundreds of runs) exercise.

use crate::error::{Error, Result};
use crate::math::normal_cdf;

/// Largest sample size handled by exact enumeration of the null
/// distribution; the normal approximation takes over beyond it.
pub const EXACT_MAX_N: usize = 20;

/// Test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonOutcome {
    /// Two-sided p-value in [0, 1].
    pub p_value: f64,
    /// The test statistic W = min(W+, W−).
    pub w: f64,
    /// Pairs remaining after zero differences are dropped.
    pub n_used: usize,
}

/// Paired two-sided test of `x` against `y`.
///
/// All differences zero returns p = 1 (the samples are indistinguishable,
/// not an error). Otherwise at least 10 nonzero differences are required.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonOutcome> {
    if x.len() != y.len() {
        return Err(Error::InvalidParams(format!(
            "paired samples differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("samples must be finite".into()));
    }

    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok(WilcoxonOutcome { p_value: 1.0, w: 0.0, n_used: 0 });
    }
    let n = diffs.len();
    if n < 10 {
        return Err(Error::InsufficientSamples(format!(
            "{n} nonzero differences; at least 10 are required"
        )));
    }

    let (ranks, tie_correction) = midranks(&diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let nf = n as f64;
    let rank_sum = nf * (nf + 1.0) / 2.0;
    let w_minus = rank_sum - w_plus;
    let w = w_plus.min(w_minus);

    let p = if n <= EXACT_MAX_N {
        exact_p_value(&ranks, w)
    } else {
        let mean = nf * (nf + 1.0) / 4.0;
        let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_correction;
        if variance <= 0.0 {
            return Err(Error::Internal("non-positive variance in signed-rank test".into()));
        }
        let z = (w - mean + 0.5) / variance.sqrt();
        (2.0 * normal_cdf(z)).clamp(0.0, 1.0)
    };
    Ok(WilcoxonOutcome { p_value: p, w, n_used: n })
}

/// Midranks of |d| (1-based, ties averaged) and the tie term
/// sum(t^3 - t)/48 subtracted from the approximation's variance.
fn midranks(diffs: &[f64]) -> (Vec<f64>, f64) {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diffs[a].abs().partial_cmp(&diffs[b].abs()).unwrap());
    let mut ranks = vec![0.0f64; n];
    let mut tie_correction = 0.0f64;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // A tie group spanning 1-based ranks start+1..=end shares their
        // average.
        let midrank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = midrank;
        }
        let t = (end - start) as f64;
        tie_correction += (t * t * t - t) / 48.0;
        start = end;
    }
    (ranks, tie_correction)
}

/// Exact P(min(W+, W−) ≤ w_obs) under the null, where every sign vector
/// over the observed midranks is equally likely. Doubling the ranks makes
/// them integers (midranks are multiples of 1/2), so the distribution of
/// 2·W+ is a subset-sum convolution over at most n(n+1) cells.
fn exact_p_value(ranks: &[f64], w_obs: f64) -> f64 {
    let n = ranks.len();
    let ranks2: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total2: usize = ranks2.iter().sum();
    let w2_obs = (2.0 * w_obs).round() as usize;

    let mut counts = vec![0u64; total2 + 1];
    counts[0] = 1;
    for &r in &ranks2 {
        for s in (r..=total2).rev() {
            counts[s] += counts[s - r];
        }
    }
    let hits: u64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (*s).min(total2 - *s) <= w2_obs)
        .map(|(_, c)| *c)
        .sum();
    hits as f64 / (1u64 << n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, STREAM_TEST};
    use rand::Rng;

    #[test]
    fn identical_samples_p_one() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let out = wilcoxon_signed_rank(&x, &x).unwrap();
        assert_eq!(out.p_value, 1.0);
        assert_eq!(out.n_used, 0);
    }

    #[test]
    fn constant_shift_is_detected() {
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
        let out = wilcoxon_signed_rank(&x, &y).unwrap();
        assert!(out.p_value < 0.001, "p = {}", out.p_value);
        assert_eq!(out.w, 0.0, "all differences share one sign");
    }

    #[test]
    fn symmetric_differences_p_near_one() {
        // Differences +d and −d in equal numbers with equal magnitudes:
        // W+ = W− so the statistic sits exactly at its mean and every
        // sign vector is at least as extreme.
        let x: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { v + 1.0 } else { v - 1.0 })
            .collect();
        let out = wilcoxon_signed_rank(&x, &y).unwrap();
        assert!(out.p_value > 0.9, "p = {}", out.p_value);
    }

    #[test]
    fn small_samples_rejected() {
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
        assert!(matches!(
            wilcoxon_signed_rank(&x, &y),
            Err(Error::InsufficientSamples(_))
        ));
        // Zeros don't count toward n.
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| if i < 15 { *v } else { v + 1.0 })
            .collect();
        assert!(wilcoxon_signed_rank(&x, &y).is_err());
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(wilcoxon_signed_rank(&[1.0, 2.0], &[1.0]).is_err());
    }

    /// Exact two-sided p-value by brute-force enumeration of all 2^n sign
    /// assignments over the observed midranks: P(min(W+, W−) ≤ observed).
    /// Independent of the convolution in `exact_p_value`.
    fn enumerated_p(diffs: &[f64]) -> f64 {
        let n = diffs.len();
        let (ranks, _) = midranks(diffs);
        let w_plus: f64 = diffs
            .iter()
            .zip(&ranks)
            .filter(|(d, _)| **d > 0.0)
            .map(|(_, r)| r)
            .sum();
        let total: f64 = ranks.iter().sum();
        let w_obs = w_plus.min(total - w_plus);

        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            let wp: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if wp.min(total - wp) <= w_obs + 1e-12 {
                hits += 1;
            }
        }
        hits as f64 / (1u64 << n) as f64
    }

    fn random_quarter_step_diffs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        // Quarter-step magnitudes give occasional tie pairs, exercising
        // the midrank path through the null distribution.
        (0..n)
            .map(|_| {
                let mag = (rng.random_range(1..=40u32)) as f64 * 0.25;
                if rng.random_bool(0.65) {
                    mag
                } else {
                    -mag
                }
            })
            .collect()
    }

    #[test]
    fn exact_path_matches_sign_enumeration() {
        let mut rng = stream_rng(33, STREAM_TEST);
        for trial in 0..60 {
            let n = rng.random_range(10..=14usize);
            let diffs = random_quarter_step_diffs(&mut rng, n);
            let x: Vec<f64> = diffs.iter().map(|d| 10.0 + d).collect();
            let y = vec![10.0; n];
            let p = wilcoxon_signed_rank(&x, &y).unwrap().p_value;
            let exact = enumerated_p(&diffs);
            assert!(
                (p - exact).abs() < 1e-12,
                "trial {trial}: p {p} vs enumerated {exact} (diffs {diffs:?})"
            );
        }
    }

    #[test]
    fn exact_path_covers_cutoff_size() {
        let mut rng = stream_rng(34, STREAM_TEST);
        let diffs = random_quarter_step_diffs(&mut rng, EXACT_MAX_N);
        let x: Vec<f64> = diffs.iter().map(|d| 10.0 + d).collect();
        let y = vec![10.0; EXACT_MAX_N];
        let p = wilcoxon_signed_rank(&x, &y).unwrap().p_value;
        assert!((p - enumerated_p(&diffs)).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn normal_path_tracks_enumeration_past_cutoff() {
        // Just past the exact cutoff the approximation's central lattice
        // error is already below a couple of percent.
        let mut rng = stream_rng(35, STREAM_TEST);
        for trial in 0..5 {
            let n = EXACT_MAX_N + 1;
            let diffs = random_quarter_step_diffs(&mut rng, n);
            let x: Vec<f64> = diffs.iter().map(|d| 10.0 + d).collect();
            let y = vec![10.0; n];
            let approx = wilcoxon_signed_rank(&x, &y).unwrap().p_value;
            let exact = enumerated_p(&diffs);
            assert!(
                (approx - exact).abs() < 0.02,
                "trial {trial}: approx {approx} vs exact {exact}"
            );
        }
    }
}
