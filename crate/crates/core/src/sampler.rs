// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Periodic sampling loop with interval compensation.
//!
//! Ticks are anchored to a nominal schedule: tick `i + 1` is due exactly one
//! interval after the nominal start of tick `i`, so time spent collecting is
//! subtracted from the following sleep and never accumulates as drift. When
//! a collection runs past its slot the loop records an overrun, skips the
//! sleep and re-anchors the schedule at the current time. Missed slots are
//! not replayed.

use crate::analysis::stats::{latency_stats, CollectionLatencyStats, StatsError};
use crate::clock::{Clock, StopSignal};
use crate::collector::Collector;
use crate::snapshot::{serialize_metadata, serialize_snapshot, RunMetadata, Snapshot};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;
use thiserror::Error;

pub const RUN_METADATA_FILE: &str = "run_metadata.json";
pub const SAMPLER_REPORT_FILE: &str = "sampler_report.json";

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("sampling interval must be positive")]
    ZeroInterval,
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Anything that can produce a snapshot on demand.
pub trait SnapshotSource {
    fn collect(&mut self, clock: &dyn Clock) -> Snapshot;

    fn drain_warnings(&mut self) -> BTreeMap<String, u64> {
        BTreeMap::new()
    }

    fn skipped_pids(&self) -> u64 {
        0
    }
}

impl SnapshotSource for Collector {
    fn collect(&mut self, clock: &dyn Clock) -> Snapshot {
        self.collect_snapshot(clock)
    }

    fn drain_warnings(&mut self) -> BTreeMap<String, u64> {
        self.take_warnings()
    }

    fn skipped_pids(&self) -> u64 {
        Collector::skipped_pids(self)
    }
}

pub trait SnapshotSink {
    fn write(&mut self, snapshot: &Snapshot) -> Result<(), SamplerError>;
}

/// Writes each snapshot to `<dir>/<epoch_ns>.json`.
///
/// Names come from the snapshot's wall clock and are bumped by one
/// nanosecond when needed so they strictly increase.
#[derive(Debug)]
pub struct DirectorySink {
    dir: PathBuf,
    last_stamp: Option<u128>,
    written: u64,
}

impl DirectorySink {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DirectorySink { dir: dir.into(), last_stamp: None, written: 0 }
    }

    pub fn written(&self) -> u64 {
        self.written
    }
}

impl SnapshotSink for DirectorySink {
    fn write(&mut self, snapshot: &Snapshot) -> Result<(), SamplerError> {
        let mut stamp = (snapshot.wall_clock.max(0.0) * 1e9).round() as u128;
        if let Some(last) = self.last_stamp {
            if stamp <= last {
                stamp = last + 1;
            }
        }
        let path = self.dir.join(format!("{stamp}.json"));
        fs::write(&path, serialize_snapshot(snapshot)).map_err(|source| SamplerError::Write { path, source })?;
        self.last_stamp = Some(stamp);
        self.written += 1;
        Ok(())
    }
}

/// Counts and drops snapshots.
#[derive(Debug, Default)]
pub struct DiscardSink {
    pub count: u64,
}

impl SnapshotSink for DiscardSink {
    fn write(&mut self, _snapshot: &Snapshot) -> Result<(), SamplerError> {
        self.count += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub interval: Duration,
    pub max_duration: Option<Duration>,
    pub max_samples: Option<u64>,
}

impl SamplerConfig {
    pub fn every(interval: Duration) -> Self {
        SamplerConfig { interval, max_duration: None, max_samples: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Signal,
    MaxDuration,
    MaxSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplerReport {
    pub interval_ns: u64,
    pub samples_written: u64,
    /// Collection-plus-write time of every tick.
    pub latencies_ns: Vec<u64>,
    /// Monotonic start of every tick.
    pub tick_starts_ns: Vec<u64>,
    /// Sleep owed after every tick; zero on overrun. The final tick's entry
    /// is recorded even though the loop exits instead of sleeping.
    pub sleeps_ns: Vec<u64>,
    pub overruns: u64,
    pub warnings: BTreeMap<String, u64>,
    pub skipped_pids: u64,
    pub stop_reason: StopReason,
}

impl SamplerReport {
    pub fn latency_stats(&self, threshold_ns: u64) -> Result<CollectionLatencyStats, StatsError> {
        latency_stats(&self.latencies_ns, threshold_ns)
    }
}

pub struct Sampler<'a> {
    config: SamplerConfig,
    clock: &'a dyn Clock,
    stop: StopSignal,
}

impl<'a> Sampler<'a> {
    pub fn new(config: SamplerConfig, clock: &'a dyn Clock, stop: StopSignal) -> Result<Self, SamplerError> {
        if config.interval.is_zero() {
            return Err(SamplerError::ZeroInterval);
        }
        Ok(Sampler { config, clock, stop })
    }

    pub fn run(
        &self,
        source: &mut dyn SnapshotSource,
        sink: &mut dyn SnapshotSink,
    ) -> Result<SamplerReport, SamplerError> {
        self.run_with(source, sink, &mut |_| {})
    }

    /// Like [`Sampler::run`], calling `on_tick(samples_written)` right after
    /// each snapshot is written.
    pub fn run_with(
        &self,
        source: &mut dyn SnapshotSource,
        sink: &mut dyn SnapshotSink,
        on_tick: &mut dyn FnMut(u64),
    ) -> Result<SamplerReport, SamplerError> {
        let clock = self.clock;
        let interval = self.config.interval.as_nanos() as u64;
        let max_duration = self.config.max_duration.map(|d| d.as_nanos() as u64);
        let mut report = SamplerReport {
            interval_ns: interval,
            samples_written: 0,
            latencies_ns: Vec::new(),
            tick_starts_ns: Vec::new(),
            sleeps_ns: Vec::new(),
            overruns: 0,
            warnings: BTreeMap::new(),
            skipped_pids: 0,
            stop_reason: StopReason::Signal,
        };

        let start = clock.monotonic_ns();
        let mut nominal = start;
        let reason = loop {
            if self.stop.is_triggered() {
                break StopReason::Signal;
            }
            if self.config.max_samples.is_some_and(|m| report.samples_written >= m) {
                break StopReason::MaxSamples;
            }
            let t0 = clock.monotonic_ns();
            if max_duration.is_some_and(|d| t0 - start >= d) {
                break StopReason::MaxDuration;
            }

            let snapshot = source.collect(clock);
            sink.write(&snapshot)?;
            report.samples_written += 1;
            on_tick(report.samples_written);

            let now = clock.monotonic_ns();
            report.tick_starts_ns.push(t0);
            report.latencies_ns.push(now - t0);
            for (k, v) in source.drain_warnings() {
                *report.warnings.entry(k).or_insert(0) += v;
            }

            let last = self.config.max_samples.is_some_and(|m| report.samples_written >= m);
            let due = nominal + interval;
            if now >= due {
                report.overruns += 1;
                report.sleeps_ns.push(0);
                nominal = now;
            } else {
                let deadline = match max_duration {
                    Some(d) => due.min(start + d),
                    None => due,
                };
                report.sleeps_ns.push(deadline.saturating_sub(now));
                if !last {
                    clock.sleep_until(deadline, &self.stop);
                }
                nominal = due;
            }
            if last {
                break StopReason::MaxSamples;
            }
        };
        report.stop_reason = reason;
        report.skipped_pids = source.skipped_pids();
        Ok(report)
    }
}

fn write_file(path: PathBuf, contents: &str) -> Result<(), SamplerError> {
    fs::write(&path, contents).map_err(|source| SamplerError::Write { path, source })
}

/// Samples into a run directory: `run_metadata.json`, one file per tick,
/// and `sampler_report.json` once the loop stops.
pub fn sample_to_directory(
    dir: &Path,
    metadata: &RunMetadata,
    sampler: &Sampler<'_>,
    source: &mut dyn SnapshotSource,
    on_tick: &mut dyn FnMut(u64),
) -> Result<SamplerReport, SamplerError> {
    fs::create_dir_all(dir).map_err(|source| SamplerError::Write { path: dir.to_path_buf(), source })?;
    write_file(dir.join(RUN_METADATA_FILE), &serialize_metadata(metadata))?;
    let mut sink = DirectorySink::new(dir);
    let report = sampler.run_with(source, &mut sink, on_tick)?;
    write_report(dir, &report)?;
    Ok(report)
}

pub fn write_report(dir: &Path, report: &SamplerReport) -> Result<(), SamplerError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    write_file(dir.join(SAMPLER_REPORT_FILE), &text)
}

/// Runs `n` collections back to back without writing anything and returns
/// the distribution of their durations.
pub fn measure_self_latency(
    source: &mut dyn SnapshotSource,
    clock: &dyn Clock,
    n: usize,
    threshold_ns: u64,
) -> Result<CollectionLatencyStats, StatsError> {
    let mut latencies = Vec::with_capacity(n);
    for _ in 0..n {
        let t0 = clock.monotonic_ns();
        let snap = source.collect(clock);
        latencies.push(clock.monotonic_ns() - t0);
        drop(snap);
    }
    source.drain_warnings();
    latency_stats(&latencies, threshold_ns)
}
