// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Collection-latency distribution and profiling-overhead arithmetic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no latencies recorded")]
    Empty,
    #[error("{0} runtime list is empty")]
    EmptyRuntimes(&'static str),
    #[error("baseline mean runtime is zero")]
    ZeroBaseline,
    #[error("runtimes must be finite and non-negative")]
    BadRuntime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HistogramBucket {
    /// Inclusive upper bound.
    pub upper_ns: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollectionLatencyStats {
    pub count: u64,
    pub min_ns: u64,
    pub mean_ns: f64,
    pub p50_ns: u64,
    pub p90_ns: u64,
    pub p99_ns: u64,
    pub max_ns: u64,
    pub threshold_ns: u64,
    /// Fraction of samples strictly below `threshold_ns`.
    pub fraction_under: f64,
    /// Power-of-two buckets starting at 1024 ns.
    pub histogram: Vec<HistogramBucket>,
}

/// Nearest-rank percentile of an ascending slice, with the percentile given
/// in per-mille so the rank is exact integer arithmetic:
/// `rank = ceil(permille * n / 1000)`, clamped to `1..=n`.
pub fn nearest_rank(sorted: &[u64], permille: u64) -> Option<u64> {
    let n = sorted.len() as u64;
    if n == 0 {
        return None;
    }
    let rank = (permille * n).div_ceil(1000).clamp(1, n);
    Some(sorted[(rank - 1) as usize])
}

pub fn fraction_under(latencies: &[u64], threshold_ns: u64) -> f64 {
    if latencies.is_empty() {
        return 0.0;
    }
    latencies.iter().filter(|l| **l < threshold_ns).count() as f64 / latencies.len() as f64
}

fn histogram(sorted: &[u64]) -> Vec<HistogramBucket> {
    let max = *sorted.last().unwrap_or(&0);
    let mut buckets = Vec::new();
    let mut upper = 1024u64;
    let mut idx = 0;
    loop {
        let start = idx;
        while idx < sorted.len() && sorted[idx] <= upper {
            idx += 1;
        }
        buckets.push(HistogramBucket { upper_ns: upper, count: (idx - start) as u64 });
        if upper >= max || upper == u64::MAX {
            break;
        }
        upper = upper.saturating_mul(2);
    }
    buckets
}

pub fn latency_stats(latencies: &[u64], threshold_ns: u64) -> Result<CollectionLatencyStats, StatsError> {
    if latencies.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut sorted = latencies.to_vec();
    sorted.sort_unstable();
    let sum: u128 = sorted.iter().map(|v| *v as u128).sum();
    Ok(CollectionLatencyStats {
        count: sorted.len() as u64,
        min_ns: sorted[0],
        mean_ns: sum as f64 / sorted.len() as f64,
        p50_ns: nearest_rank(&sorted, 500).unwrap(),
        p90_ns: nearest_rank(&sorted, 900).unwrap(),
        p99_ns: nearest_rank(&sorted, 990).unwrap(),
        max_ns: *sorted.last().unwrap(),
        threshold_ns,
        fraction_under: fraction_under(&sorted, threshold_ns),
        histogram: histogram(&sorted),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OverheadResult {
    pub baseline_mean_seconds: f64,
    pub profiled_mean_seconds: f64,
    pub mean_percent: f64,
    /// Sample standard deviation of the profiled runtimes as a percentage
    /// of the baseline mean; zero for a single profiled run.
    pub stddev_percent: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn overhead_percent(baseline: &[f64], profiled: &[f64]) -> Result<OverheadResult, StatsError> {
    if baseline.is_empty() {
        return Err(StatsError::EmptyRuntimes("baseline"));
    }
    if profiled.is_empty() {
        return Err(StatsError::EmptyRuntimes("profiled"));
    }
    if baseline.iter().chain(profiled).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(StatsError::BadRuntime);
    }
    let base = mean(baseline);
    if base == 0.0 {
        return Err(StatsError::ZeroBaseline);
    }
    let prof = mean(profiled);
    let stddev = if profiled.len() > 1 {
        let var = profiled.iter().map(|v| (v - prof).powi(2)).sum::<f64>() / (profiled.len() - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    Ok(OverheadResult {
        baseline_mean_seconds: base,
        profiled_mean_seconds: prof,
        mean_percent: (prof - base) / base * 100.0,
        stddev_percent: stddev / base * 100.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_one_to_hundred() {
        let v: Vec<u64> = (1..=100).collect();
        let s = latency_stats(&v, 50).unwrap();
        assert_eq!(s.p90_ns, 90);
        assert_eq!(s.p50_ns, 50);
        assert_eq!(s.p99_ns, 99);
        assert_eq!(s.max_ns, 100);
        assert_eq!(s.fraction_under, 0.49);
    }

    #[test]
    fn single_latency() {
        let s = latency_stats(&[777], 1000).unwrap();
        assert_eq!((s.p50_ns, s.p90_ns, s.p99_ns, s.max_ns, s.min_ns), (777, 777, 777, 777, 777));
        assert_eq!(s.histogram.iter().map(|b| b.count).sum::<u64>(), 1);
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(latency_stats(&[], 1), Err(StatsError::Empty));
    }

    #[test]
    fn histogram_covers_all() {
        let v = [1, 1024, 1025, 5000, 1_000_000];
        let s = latency_stats(&v, 1).unwrap();
        assert_eq!(s.histogram.iter().map(|b| b.count).sum::<u64>(), 5);
        assert!(s.histogram.last().unwrap().upper_ns >= 1_000_000);
        assert_eq!(s.histogram[0].count, 2);
    }

    #[test]
    fn overhead_examples() {
        let r = overhead_percent(&[100.0], &[101.0]).unwrap();
        assert!((r.mean_percent - 1.0).abs() < 1e-12);
        assert_eq!(r.stddev_percent, 0.0);

        let r = overhead_percent(&[5.0, 7.0], &[5.0, 7.0]).unwrap();
        assert_eq!(r.mean_percent, 0.0);

        let r = overhead_percent(&[28800.0], &[28820.2]).unwrap();
        assert_eq!(format!("{:.2}", r.mean_percent), "0.07");
    }

    #[test]
    fn overhead_errors() {
        assert_eq!(overhead_percent(&[], &[1.0]), Err(StatsError::EmptyRuntimes("baseline")));
        assert_eq!(overhead_percent(&[1.0], &[]), Err(StatsError::EmptyRuntimes("profiled")));
        assert_eq!(overhead_percent(&[0.0, 0.0], &[1.0]), Err(StatsError::ZeroBaseline));
        assert_eq!(overhead_percent(&[f64::NAN], &[1.0]), Err(StatsError::BadRuntime));
    }

    #[test]
    fn overhead_stddev() {
        // profiled 10, 12 -> sample stddev sqrt(2); baseline mean 10
        let r = overhead_percent(&[10.0], &[10.0, 12.0]).unwrap();
        assert!((r.stddev_percent - 2f64.sqrt() * 10.0).abs() < 1e-12);
        assert!((r.mean_percent - 10.0).abs() < 1e-12);
    }
}
