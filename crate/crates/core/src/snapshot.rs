// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Snapshot and run-metadata schema plus their JSON encoding.
//!
//! A run directory holds `run_metadata.json` and one `<epoch_ns>.json`
//! document per sample. Field names in the documents are the catalog
//! metric names (`vCpuTimeUserMode`, `cDiskReadBytes`, ...). Absent metrics
//! are omitted rather than written as `null`.

use crate::catalog::Level;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot document at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("unknown key `{0}` in snapshot document")]
    UnknownKey(String),
    #[error("snapshot violates invariant: {0}")]
    Invalid(String),
}

impl SnapshotError {
    fn from_json(err: serde_json::Error) -> Self {
        SnapshotError::Malformed { line: err.line(), column: err.column(), message: err.to_string() }
    }
}

/// The set of sampling levels enabled for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Level>", try_from = "Vec<Level>")]
pub struct Verbosity {
    pub host: bool,
    pub container: bool,
    pub process: bool,
}

impl Verbosity {
    pub const ALL: Verbosity = Verbosity { host: true, container: true, process: true };
    pub const HOST: Verbosity = Verbosity { host: true, container: false, process: false };

    pub fn new(host: bool, container: bool, process: bool) -> Self {
        Verbosity { host, container, process }
    }

    pub fn contains(&self, level: Level) -> bool {
        match level {
            Level::Host => self.host,
            Level::Container => self.container,
            Level::Process => self.process,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.host || self.container || self.process)
    }

    pub fn levels(&self) -> Vec<Level> {
        Level::ALL.into_iter().filter(|l| self.contains(*l)).collect()
    }
}

impl Default for Verbosity {
    fn default() -> Self {
        Verbosity::ALL
    }
}

impl From<Verbosity> for Vec<Level> {
    fn from(v: Verbosity) -> Self {
        v.levels()
    }
}

impl TryFrom<Vec<Level>> for Verbosity {
    type Error = String;

    fn try_from(levels: Vec<Level>) -> Result<Self, Self::Error> {
        if levels.is_empty() {
            return Err("verbosity must name at least one level".into());
        }
        let mut v = Verbosity::new(false, false, false);
        for l in levels {
            match l {
                Level::Host => v.host = true,
                Level::Container => v.container = true,
                Level::Process => v.process = true,
            }
        }
        Ok(v)
    }
}

/// A numeric metric reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Int(u64),
    Float(f64),
}

impl Scalar {
    pub fn as_f64(self) -> f64 {
        match self {
            Scalar::Int(v) => v as f64,
            Scalar::Float(v) => v,
        }
    }

    pub fn as_int(self) -> Option<u64> {
        match self {
            Scalar::Int(v) => Some(v),
            Scalar::Float(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HostMetrics {
    #[serde(rename = "vCpuTimeUserMode", default, skip_serializing_if = "Option::is_none")]
    pub cpu_time_user_mode: Option<u64>,
    #[serde(rename = "vCpuTimeKernelMode", default, skip_serializing_if = "Option::is_none")]
    pub cpu_time_kernel_mode: Option<u64>,
    #[serde(rename = "vCpuIdleTime", default, skip_serializing_if = "Option::is_none")]
    pub cpu_idle_time: Option<u64>,
    #[serde(rename = "vCpuTimeIOWait", default, skip_serializing_if = "Option::is_none")]
    pub cpu_time_io_wait: Option<u64>,
    #[serde(rename = "vCpuContextSwitches", default, skip_serializing_if = "Option::is_none")]
    pub cpu_context_switches: Option<u64>,
    #[serde(rename = "vCpuNice", default, skip_serializing_if = "Option::is_none")]
    pub cpu_nice: Option<u64>,
    #[serde(rename = "vCpuSteal", default, skip_serializing_if = "Option::is_none")]
    pub cpu_steal: Option<u64>,
    #[serde(rename = "vDiskSectorReads", default, skip_serializing_if = "Option::is_none")]
    pub disk_sector_reads: Option<u64>,
    #[serde(rename = "vDiskSectorWrites", default, skip_serializing_if = "Option::is_none")]
    pub disk_sector_writes: Option<u64>,
    #[serde(rename = "vDiskReadTime", default, skip_serializing_if = "Option::is_none")]
    pub disk_read_time: Option<u64>,
    #[serde(rename = "vDiskWriteTime", default, skip_serializing_if = "Option::is_none")]
    pub disk_write_time: Option<u64>,
    #[serde(rename = "vNetworkBytesRecvd", default, skip_serializing_if = "Option::is_none")]
    pub network_bytes_recvd: Option<u64>,
    #[serde(rename = "vNetworkBytesSent", default, skip_serializing_if = "Option::is_none")]
    pub network_bytes_sent: Option<u64>,
    #[serde(rename = "vMemoryTotal", default, skip_serializing_if = "Option::is_none")]
    pub memory_total: Option<u64>,
    #[serde(rename = "vMemoryFree", default, skip_serializing_if = "Option::is_none")]
    pub memory_free: Option<u64>,
    #[serde(rename = "vMemoryBuffers", default, skip_serializing_if = "Option::is_none")]
    pub memory_buffers: Option<u64>,
    #[serde(rename = "vMemoryCached", default, skip_serializing_if = "Option::is_none")]
    pub memory_cached: Option<u64>,
    #[serde(rename = "vLoadAvg", default, skip_serializing_if = "Option::is_none")]
    pub load_avg: Option<[f64; 3]>,
    #[serde(rename = "vId", default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl HostMetrics {
    /// Numeric reading by catalog name. `vLoadAvg` resolves to the
    /// 1-minute average.
    pub fn metric(&self, name: &str) -> Option<Scalar> {
        let int = |v: Option<u64>| v.map(Scalar::Int);
        match name {
            "vCpuTimeUserMode" => int(self.cpu_time_user_mode),
            "vCpuTimeKernelMode" => int(self.cpu_time_kernel_mode),
            "vCpuIdleTime" => int(self.cpu_idle_time),
            "vCpuTimeIOWait" => int(self.cpu_time_io_wait),
            "vCpuContextSwitches" => int(self.cpu_context_switches),
            "vCpuNice" => int(self.cpu_nice),
            "vCpuSteal" => int(self.cpu_steal),
            "vDiskSectorReads" => int(self.disk_sector_reads),
            "vDiskSectorWrites" => int(self.disk_sector_writes),
            "vDiskReadTime" => int(self.disk_read_time),
            "vDiskWriteTime" => int(self.disk_write_time),
            "vNetworkBytesRecvd" => int(self.network_bytes_recvd),
            "vNetworkBytesSent" => int(self.network_bytes_sent),
            "vMemoryTotal" => int(self.memory_total),
            "vMemoryFree" => int(self.memory_free),
            "vMemoryBuffers" => int(self.memory_buffers),
            "vMemoryCached" => int(self.memory_cached),
            "vLoadAvg" => self.load_avg.map(|l| Scalar::Float(l[0])),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContainerMetrics {
    #[serde(rename = "cCpuTimeUserMode", default, skip_serializing_if = "Option::is_none")]
    pub cpu_time_user_mode: Option<u64>,
    #[serde(rename = "cCpuTimeKernelMode", default, skip_serializing_if = "Option::is_none")]
    pub cpu_time_kernel_mode: Option<u64>,
    #[serde(rename = "cDiskSectorIO", default, skip_serializing_if = "Option::is_none")]
    pub disk_sector_io: Option<u64>,
    #[serde(rename = "cDiskReadBytes", default, skip_serializing_if = "Option::is_none")]
    pub disk_read_bytes: Option<u64>,
    #[serde(rename = "cDiskWriteBytes", default, skip_serializing_if = "Option::is_none")]
    pub disk_write_bytes: Option<u64>,
    #[serde(rename = "cNetworkBytesRecvd", default, skip_serializing_if = "Option::is_none")]
    pub network_bytes_recvd: Option<u64>,
    #[serde(rename = "cNetworkBytesSent", default, skip_serializing_if = "Option::is_none")]
    pub network_bytes_sent: Option<u64>,
    #[serde(rename = "cMemoryUsed", default, skip_serializing_if = "Option::is_none")]
    pub memory_used: Option<u64>,
    #[serde(rename = "cId", default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "cNumProcesses", default, skip_serializing_if = "Option::is_none")]
    pub num_processes: Option<u64>,
}

impl ContainerMetrics {
    pub fn metric(&self, name: &str) -> Option<Scalar> {
        let v = match name {
            "cCpuTimeUserMode" => self.cpu_time_user_mode,
            "cCpuTimeKernelMode" => self.cpu_time_kernel_mode,
            "cDiskSectorIO" => self.disk_sector_io,
            "cDiskReadBytes" => self.disk_read_bytes,
            "cDiskWriteBytes" => self.disk_write_bytes,
            "cNetworkBytesRecvd" => self.network_bytes_recvd,
            "cNetworkBytesSent" => self.network_bytes_sent,
            "cMemoryUsed" => self.memory_used,
            "cNumProcesses" => self.num_processes,
            _ => None,
        };
        v.map(Scalar::Int)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProcessMetrics {
    #[serde(rename = "pId")]
    pub pid: u32,
    #[serde(rename = "pName")]
    pub name: String,
    #[serde(rename = "pCpuTimeUserMode")]
    pub cpu_time_user_mode: u64,
    #[serde(rename = "pCpuTimeKernelMode")]
    pub cpu_time_kernel_mode: u64,
    #[serde(rename = "pVoluntaryContextSwitches", default, skip_serializing_if = "Option::is_none")]
    pub voluntary_context_switches: Option<u64>,
    #[serde(rename = "pNonvoluntaryContextSwitches", default, skip_serializing_if = "Option::is_none")]
    pub nonvoluntary_context_switches: Option<u64>,
    #[serde(rename = "pBlockIODelays", default, skip_serializing_if = "Option::is_none")]
    pub block_io_delays: Option<u64>,
    #[serde(rename = "pResidentSetSize")]
    pub resident_set_size: u64,
    #[serde(rename = "pNumThreads")]
    pub num_threads: u64,
}

impl ProcessMetrics {
    pub fn metric(&self, name: &str) -> Option<Scalar> {
        let v = match name {
            "pCpuTimeUserMode" => Some(self.cpu_time_user_mode),
            "pCpuTimeKernelMode" => Some(self.cpu_time_kernel_mode),
            "pVoluntaryContextSwitches" => self.voluntary_context_switches,
            "pNonvoluntaryContextSwitches" => self.nonvoluntary_context_switches,
            "pBlockIODelays" => self.block_io_delays,
            "pResidentSetSize" => Some(self.resident_set_size),
            "pNumThreads" => Some(self.num_threads),
            _ => None,
        };
        v.map(Scalar::Int)
    }
}

/// Monotonic nanoseconds taken immediately before each section's sources
/// were read, in collection order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionTimestamps {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub container: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<u64>,
}

impl SectionTimestamps {
    /// Present timestamps in collection order.
    pub fn ordered(&self) -> Vec<u64> {
        [self.host, self.container, self.process].into_iter().flatten().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunMetadata {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub interval_seconds: f64,
    pub verbosity: Verbosity,
    pub clock_ticks_per_second: u64,
    pub sector_size_bytes: u64,
    pub start_wall_clock: f64,
    pub workload_command: String,
    pub output_directory: PathBuf,
}

impl RunMetadata {
    pub fn validate(&self) -> Result<(), SnapshotError> {
        if !(self.interval_seconds > 0.0 && self.interval_seconds.is_finite()) {
            return Err(SnapshotError::Invalid("intervalSeconds must be > 0".into()));
        }
        if self.verbosity.is_empty() {
            return Err(SnapshotError::Invalid("verbosity is empty".into()));
        }
        if self.sector_size_bytes == 0 {
            return Err(SnapshotError::Invalid("sectorSizeBytes must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Snapshot {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<RunMetadata>,
    /// Seconds since the Unix epoch.
    pub wall_clock: f64,
    /// Monotonic nanoseconds at the start of collection.
    pub monotonic_clock: u64,
    pub section_timestamps: SectionTimestamps,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<HostMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub container: Option<ContainerMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub processes: Option<Vec<ProcessMetrics>>,
    /// Nanoseconds spent assembling this snapshot.
    pub collection_duration: u64,
}

impl Snapshot {
    /// Host- or container-level reading by catalog name.
    pub fn metric(&self, name: &str) -> Option<Scalar> {
        match name.chars().next() {
            Some('v') => self.host.as_ref()?.metric(name),
            Some('c') => self.container.as_ref()?.metric(name),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SnapshotError> {
        let invalid = |m: &str| Err(SnapshotError::Invalid(m.to_string()));
        if self.host.is_none() && self.container.is_none() && self.processes.is_none() {
            return invalid("no metric section present");
        }
        if !self.wall_clock.is_finite() {
            return invalid("wallClock is not finite");
        }
        let ts = self.section_timestamps.ordered();
        if ts.windows(2).any(|w| w[0] > w[1]) {
            return invalid("sectionTimestamps decrease in collection order");
        }
        if let (Some(lo), Some(hi)) = (ts.iter().min(), ts.iter().max()) {
            if self.collection_duration < hi - lo {
                return invalid("collectionDuration shorter than section timestamp span");
            }
        }
        if let Some(h) = &self.host {
            if let (Some(total), Some(free)) = (h.memory_total, h.memory_free) {
                if free > total {
                    return invalid("vMemoryFree exceeds vMemoryTotal");
                }
            }
            if let Some(l) = h.load_avg {
                if l.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return invalid("vLoadAvg must be finite and non-negative");
                }
            }
        }
        if let Some(ps) = &self.processes {
            if ps.iter().any(|p| p.pid == 0) {
                return invalid("pId must be > 0");
            }
        }
        if let Some(m) = &self.metadata {
            m.validate()?;
        }
        Ok(())
    }
}

/// Deterministic pretty-printed JSON with a trailing newline.
pub fn serialize_snapshot(s: &Snapshot) -> String {
    // Serialization of these plain data types cannot fail.
    let mut out = serde_json::to_string_pretty(s).expect("snapshot serializes");
    out.push('\n');
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Strictness {
    /// Unknown keys are ignored.
    #[default]
    Lenient,
    /// The first unknown key is an error.
    Strict,
}

pub fn parse_snapshot(doc: &str, strictness: Strictness) -> Result<Snapshot, SnapshotError> {
    match strictness {
        Strictness::Lenient => serde_json::from_str(doc).map_err(SnapshotError::from_json),
        Strictness::Strict => {
            let mut de = serde_json::Deserializer::from_str(doc);
            let mut unknown = None;
            let snap: Snapshot = serde_ignored::deserialize(&mut de, |path| {
                if unknown.is_none() {
                    // Option layers render as `?` segments; drop them.
                    unknown = Some(path.to_string().replace(".?", ""));
                }
            })
            .map_err(SnapshotError::from_json)?;
            de.end().map_err(SnapshotError::from_json)?;
            match unknown {
                Some(key) => Err(SnapshotError::UnknownKey(key)),
                None => Ok(snap),
            }
        }
    }
}

pub fn serialize_metadata(m: &RunMetadata) -> String {
    let mut out = serde_json::to_string_pretty(m).expect("metadata serializes");
    out.push('\n');
    out
}

pub fn parse_metadata(doc: &str) -> Result<RunMetadata, SnapshotError> {
    let m: RunMetadata = serde_json::from_str(doc).map_err(SnapshotError::from_json)?;
    m.validate()?;
    Ok(m)
}
