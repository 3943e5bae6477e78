//! Medians and the two-sided Wilcoxon signed-rank test used by the benchmark
//! harness.
//!
//! The test follows the textbook procedure: zero differences are discarded,
//! absolute differences are ranked with average ranks for ties, and the
//! decision comes from the exact null distribution for n <= 25 (computed by
//! dynamic programming over the doubled ranks) or from the normal
//! approximation with tie correction above that.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest sample size handled by the exact distribution.
pub const EXACT_LIMIT: usize = 25;

/// Minimum number of non-zero differences for a conclusive test.
pub const MIN_NONZERO: usize = 5;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("paired samples differ in length ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("median of an empty sample")]
    EmptySample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonDecision {
    /// The null hypothesis (symmetric differences around zero) is rejected.
    Reject,
    FailToReject,
    /// Fewer than [`MIN_NONZERO`] non-zero differences.
    Inconclusive,
}

/// Sign of the median non-zero difference `x - y`, reported when the test
/// rejects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffSign {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WilcoxonOutcome {
    /// Non-zero differences actually used.
    pub n_used: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// The test statistic, `min(w_plus, w_minus)`.
    pub w: f64,
    pub decision: WilcoxonDecision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<DiffSign>,
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
pub fn wilcoxon_signed_rank(
    x: &[f64],
    y: &[f64],
    alpha: f64,
) -> Result<WilcoxonOutcome, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < MIN_NONZERO {
        return Ok(WilcoxonOutcome {
            n_used: n,
            w_plus: 0.0,
            w_minus: 0.0,
            w: 0.0,
            decision: WilcoxonDecision::Inconclusive,
            direction: None,
        });
    }

    let ranks = average_ranks(&diffs);
    let mut w_plus = 0.0;
    let mut w_minus = 0.0;
    for (d, r) in diffs.iter().zip(&ranks) {
        if *d > 0.0 {
            w_plus += r;
        } else {
            w_minus += r;
        }
    }
    let w = w_plus.min(w_minus);

    let p = if n <= EXACT_LIMIT {
        exact_two_sided_p(&ranks, w)
    } else {
        normal_two_sided_p(&ranks, w_plus)
    };

    let decision = if p <= alpha {
        WilcoxonDecision::Reject
    } else {
        WilcoxonDecision::FailToReject
    };
    let direction = if decision == WilcoxonDecision::Reject {
        Some(median_sign(&diffs, w_plus, w_minus))
    } else {
        None
    };
    Ok(WilcoxonOutcome {
        n_used: n,
        w_plus,
        w_minus,
        w,
        decision,
        direction,
    })
}

/// Ranks of |diffs| in ascending order, ties replaced by their average rank.
fn average_ranks(diffs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&i, &j| {
        diffs[i]
            .abs()
            .partial_cmp(&diffs[j].abs())
            .expect("differences are finite")
    });
    let mut ranks = vec![0.0; diffs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        // positions start..end hold one tie group; ranks are 1-based
        let average = (start + 1 + end) as f64 / 2.0;
        for &index in &order[start..end] {
            ranks[index] = average;
        }
        start = end;
    }
    ranks
}

/// Exact two-sided p-value: 2 * P(W <= w) under random signs, over the
/// observed ranks. Ranks are halves at worst, so doubling makes them exact
/// integers for the tabulation.
fn exact_two_sided_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    // counts[s] = number of sign assignments whose positive-rank sum is s/2
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reachable = 0usize;
    for &r in &doubled {
        reachable += r;
        for s in (r..=reachable).rev() {
            counts[s] += counts[s - r];
        }
    }
    let threshold = (2.0 * w).round() as usize;
    let below: f64 = counts[..=threshold.min(total)].iter().sum();
    let assignments = (ranks.len() as f64).exp2();
    (2.0 * below / assignments).min(1.0)
}

/// Normal approximation with tie correction for n > [`EXACT_LIMIT`].
fn normal_two_sided_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    variance -= tie_correction(ranks) / 48.0;
    let z = (w_plus - mean) / variance.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Sum of t^3 - t over tie groups, recovered from repeated average ranks.
fn tie_correction(ranks: &[f64]) -> f64 {
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut correction = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        correction += t * t * t - t;
        start = end;
    }
    correction
}

fn median_sign(diffs: &[f64], w_plus: f64, w_minus: f64) -> DiffSign {
    let m = median_f64(diffs).expect("non-empty differences");
    if m < 0.0 || (m == 0.0 && w_plus < w_minus) {
        DiffSign::Negative
    } else {
        DiffSign::Positive
    }
}

/// Complementary error function (Abramowitz & Stegun 7.1.26; |error| < 1.5e-7),
/// enough precision for a fixed-level decision.
fn erfc(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    poly * (-x * x).exp()
}

/// Median: middle element for odd lengths, mean of the two middle elements
/// for even lengths.
pub fn median_f64(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("median over finite values"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        Ok(sorted[mid])
    } else {
        Ok((sorted[mid - 1] + sorted[mid]) / 2.0)
    }
}

/// Median of arbitrary-precision integers; even lengths take the floor of the
/// mean of the two middle values.
pub fn median_biguint(values: &[BigUint]) -> Result<BigUint, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort();
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        Ok(sorted[mid].clone())
    } else {
        Ok((&sorted[mid - 1] + &sorted[mid]) / 2u32)
    }
}
