// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Counter deltas, gauge resampling and derived series.
//!
//! Samples are grouped into buckets on a grid anchored at the first
//! snapshot: bucket `j` closes at the first sample whose monotonic time is
//! at least `t0 + j*target - interval/2`, and the final sample always
//! closes the last bucket. Consecutive buckets share their boundary
//! sample, so counter buckets telescope: the sum over all buckets is
//! last-minus-first regardless of the target interval.

use super::rules::{Method, RuleSet, RunConstants};
use super::run::ProfileRun;
use super::AnalysisError;
use crate::catalog::{lookup, Level};
use crate::snapshot::{ProcessMetrics, Scalar, Snapshot};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPoint {
    /// Wall clock of the sample closing the bucket.
    pub wall_clock: f64,
    pub monotonic_ns: u64,
    pub value: Scalar,
    /// A counter went backwards inside the bucket; that step counted as 0.
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSeries {
    pub metric: String,
    /// Set for per-process series.
    pub pid: Option<u32>,
    pub process_name: Option<String>,
    pub interval_seconds: f64,
    pub points: Vec<DeltaPoint>,
}

impl DeltaSeries {
    /// `metric` or `metric/pid` for per-process series.
    pub fn label(&self) -> String {
        match self.pid {
            Some(pid) => format!("{}/{pid}", self.metric),
            None => self.metric.clone(),
        }
    }

    pub fn values(&self) -> Vec<Scalar> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// Indices of the samples closing each bucket.
pub fn bucket_ends(monotonic_ns: &[u64], target_ns: u64, interval_ns: u64) -> Vec<usize> {
    let n = monotonic_ns.len();
    if n < 2 {
        return Vec::new();
    }
    let t0 = monotonic_ns[0];
    let half = interval_ns / 2;
    let target = target_ns.max(1);
    let mut ends = Vec::new();
    let mut j: u64 = 1;
    for (i, &t) in monotonic_ns.iter().enumerate().skip(1) {
        let elapsed = t - t0;
        if elapsed + half >= j * target {
            ends.push(i);
            // A gap wider than the grid spacing folds into this bucket.
            j = (elapsed + half) / target + 1;
        }
    }
    if ends.last() != Some(&(n - 1)) {
        ends.push(n - 1);
    }
    ends
}

type Cell = Option<(Scalar, bool)>;

fn counter_bucket(values: &[Option<Scalar>], start: usize, end: usize) -> Cell {
    values[end]?;
    let mut prev: Option<Scalar> = None;
    let mut int_sum: u64 = 0;
    let mut float_sum = 0.0;
    let mut all_int = true;
    let mut reset = false;
    let mut pairs = 0;
    for v in values[start..=end].iter().flatten() {
        if let Some(p) = prev {
            pairs += 1;
            match (p, *v) {
                (Scalar::Int(a), Scalar::Int(b)) => {
                    if b >= a {
                        int_sum = int_sum.saturating_add(b - a);
                        float_sum += (b - a) as f64;
                    } else {
                        reset = true;
                    }
                }
                (a, b) => {
                    all_int = false;
                    let d = b.as_f64() - a.as_f64();
                    if d >= 0.0 {
                        float_sum += d;
                    } else {
                        reset = true;
                    }
                }
            }
        }
        prev = Some(*v);
    }
    if pairs == 0 {
        return None;
    }
    let value = if all_int { Scalar::Int(int_sum) } else { Scalar::Float(float_sum) };
    Some((value, reset))
}

fn resolve(values: &[Option<Scalar>], ends: &[usize], method: &Method) -> Vec<Cell> {
    let mut start = 0;
    ends.iter()
        .map(|&end| {
            let cell = match method {
                Method::Delta => counter_bucket(values, start, end),
                _ => values[end].map(|v| (v, false)),
            };
            start = end;
            cell
        })
        .collect()
}

fn to_series(metric: &str, interval: f64, snaps: &[Snapshot], ends: &[usize], cells: &[Cell]) -> DeltaSeries {
    let points = ends
        .iter()
        .zip(cells)
        .filter_map(|(&i, cell)| {
            cell.map(|(value, reset)| DeltaPoint {
                wall_clock: snaps[i].wall_clock,
                monotonic_ns: snaps[i].monotonic_clock,
                value,
                reset,
            })
        })
        .collect();
    DeltaSeries { metric: metric.to_string(), pid: None, process_name: None, interval_seconds: interval, points }
}

fn check_target(run: &ProfileRun, target_seconds: f64) -> Result<(), AnalysisError> {
    let interval = run.interval_seconds();
    if !(target_seconds.is_finite() && target_seconds + 1e-9 >= interval) {
        return Err(AnalysisError::TargetInterval { target: target_seconds, run: interval });
    }
    Ok(())
}

fn process_table(snaps: &[Snapshot]) -> BTreeMap<u32, Vec<Option<&ProcessMetrics>>> {
    let mut table: BTreeMap<u32, Vec<Option<&ProcessMetrics>>> = BTreeMap::new();
    for (i, s) in snaps.iter().enumerate() {
        for p in s.processes.iter().flatten() {
            let row = table.entry(p.pid).or_insert_with(|| vec![None; snaps.len()]);
            row[i].get_or_insert(p);
        }
    }
    table
}

/// Applies every rule to the run at the target interval. Series with no
/// points (metric absent from the run) are omitted; per-process metrics
/// yield one series per pid.
pub fn compute_deltas(
    run: &ProfileRun,
    rules: &RuleSet,
    target_seconds: f64,
) -> Result<Vec<DeltaSeries>, AnalysisError> {
    check_target(run, target_seconds)?;
    let snaps = &run.snapshots;
    let monos: Vec<u64> = snaps.iter().map(|s| s.monotonic_clock).collect();
    let interval_ns = (run.interval_seconds() * 1e9).round() as u64;
    let target_ns = (target_seconds * 1e9).round() as u64;
    let ends = bucket_ends(&monos, target_ns, interval_ns);
    let constants = RunConstants {
        sector_size_bytes: run.sector_size_bytes(),
        clock_ticks_per_second: run.clock_ticks_per_second(),
        interval_seconds: target_seconds,
    };

    let mut resolved: HashMap<&str, Vec<Cell>> = HashMap::new();
    let mut out = Vec::new();
    let processes = process_table(snaps);
    for rule in rules.rules() {
        let name = rule.metric.as_str();
        if let Method::Derived(expr) = &rule.method {
            let cells: Vec<Cell> = (0..ends.len())
                .map(|b| {
                    let mut reset = false;
                    let get = |m: &str| resolved.get(m).and_then(|c| c[b]).map(|(v, _)| v);
                    let v = expr.eval(&get, &constants)?;
                    for m in expr.metrics() {
                        reset |= resolved.get(m).and_then(|c| c[b]).is_some_and(|(_, r)| r);
                    }
                    Some((v, reset))
                })
                .collect();
            out.push(to_series(name, target_seconds, snaps, &ends, &cells));
            resolved.insert(name, cells);
            continue;
        }
        match lookup(name).map(|d| d.level) {
            Some(Level::Process) => {
                for (&pid, row) in &processes {
                    let values: Vec<Option<Scalar>> = row.iter().map(|p| p.and_then(|p| p.metric(name))).collect();
                    let cells = resolve(&values, &ends, &rule.method);
                    let mut s = to_series(name, target_seconds, snaps, &ends, &cells);
                    s.pid = Some(pid);
                    s.process_name = row.iter().flatten().last().map(|p| p.name.clone());
                    out.push(s);
                }
            }
            _ => {
                let values: Vec<Option<Scalar>> = snaps.iter().map(|s| s.metric(name)).collect();
                let cells = resolve(&values, &ends, &rule.method);
                out.push(to_series(name, target_seconds, snaps, &ends, &cells));
                resolved.insert(name, cells);
            }
        }
    }
    out.retain(|s| !s.points.is_empty());
    Ok(out)
}

/// One of the built-in derivations (`vBytesWritten`, `vMemoryUsed`) at the
/// run's own interval.
pub fn derive_metric(run: &ProfileRun, name: &str) -> Result<DeltaSeries, AnalysisError> {
    let rules = RuleSet::defaults();
    let rule = rules.get(name).ok_or_else(|| AnalysisError::UnknownMetric(name.to_string()))?;
    let Method::Derived(expr) = &rule.method else {
        return Err(AnalysisError::UnknownMetric(name.to_string()));
    };
    let missing: Vec<String> = expr
        .metrics()
        .into_iter()
        .filter(|m| !run.snapshots.iter().any(|s| s.metric(m).is_some()))
        .map(str::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(AnalysisError::Unavailable { metric: name.to_string(), missing });
    }
    let interval = run.interval_seconds();
    compute_deltas(run, &rules, interval)?
        .into_iter()
        .find(|s| s.metric == name)
        .ok_or_else(|| AnalysisError::Unavailable { metric: name.to_string(), missing: Vec::new() })
}

/// Series whose label or metric name is in `names`, in `names` order.
pub fn select_series(series: &[DeltaSeries], names: &[String]) -> Vec<DeltaSeries> {
    names.iter().flat_map(|n| series.iter().filter(move |s| &s.metric == n || &s.label() == n)).cloned().collect()
}
