// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Assembles snapshots from a proc root and a cgroup v1 root.
//!
//! Data-source problems never abort a collection. An unreadable or
//! unparseable file leaves the affected fields absent and bumps a warning
//! counter keyed by the path and reason.

use crate::clock::Clock;
use crate::parsers::{self, ParseError};
use crate::snapshot::{
    ContainerMetrics, HostMetrics, ProcessMetrics, SectionTimestamps, Snapshot, Verbosity, SCHEMA_VERSION,
};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("verbosity selects no level")]
    EmptyVerbosity,
    #[error("cannot read {}: {source}", path.display())]
    RootUnreadable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("unsupported cgroup layout at {}: only cgroup v1 controllers are supported", .0.display())]
    UnsupportedCgroupLayout(PathBuf),
}

/// Which pids the process section covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProcessScope {
    /// The cgroup's membership list when container metrics are enabled and
    /// the list is readable, otherwise every pid under the proc root.
    #[default]
    Auto,
    Cgroup,
    All,
}

#[derive(Debug, Clone)]
pub struct CollectorConfig {
    pub proc_root: PathBuf,
    pub cgroup_root: PathBuf,
    /// Path of the workload's cgroup below each controller directory.
    /// `None` reads the controller roots, which is what a profiler running
    /// inside the container sees.
    pub cgroup_path: Option<PathBuf>,
    pub verbosity: Verbosity,
    pub device_filter: Option<BTreeSet<String>>,
    pub include_loopback: bool,
    pub process_scope: ProcessScope,
}

impl Default for CollectorConfig {
    fn default() -> Self {
        CollectorConfig {
            proc_root: PathBuf::from("/proc"),
            cgroup_root: PathBuf::from("/sys/fs/cgroup"),
            cgroup_path: None,
            verbosity: Verbosity::ALL,
            device_filter: None,
            include_loopback: false,
            process_scope: ProcessScope::Auto,
        }
    }
}

impl CollectorConfig {
    pub fn with_roots(proc_root: impl Into<PathBuf>, cgroup_root: impl Into<PathBuf>) -> Self {
        CollectorConfig { proc_root: proc_root.into(), cgroup_root: cgroup_root.into(), ..Default::default() }
    }
}

#[derive(Debug)]
pub struct Collector {
    cfg: CollectorConfig,
    warnings: BTreeMap<String, u64>,
    skipped_pids: u64,
}

fn check_readable(path: &Path) -> Result<(), ConfigError> {
    fs::read_dir(path).map(|_| ()).map_err(|source| ConfigError::RootUnreadable { path: path.to_path_buf(), source })
}

impl Collector {
    pub fn new(cfg: CollectorConfig) -> Result<Self, ConfigError> {
        if cfg.verbosity.is_empty() {
            return Err(ConfigError::EmptyVerbosity);
        }
        check_readable(&cfg.proc_root)?;
        let needs_cgroup = cfg.verbosity.container || cfg.process_scope == ProcessScope::Cgroup;
        if needs_cgroup {
            check_readable(&cfg.cgroup_root)?;
            let has_v1 = ["cpuacct", "blkio", "memory"].iter().any(|c| controller_dir(&cfg.cgroup_root, c).is_some());
            if !has_v1 && cfg.cgroup_root.join("cgroup.controllers").exists() {
                return Err(ConfigError::UnsupportedCgroupLayout(cfg.cgroup_root.clone()));
            }
        }
        Ok(Collector { cfg, warnings: BTreeMap::new(), skipped_pids: 0 })
    }

    pub fn config(&self) -> &CollectorConfig {
        &self.cfg
    }

    /// Warning counts accumulated since the last call, keyed by message.
    pub fn take_warnings(&mut self) -> BTreeMap<String, u64> {
        std::mem::take(&mut self.warnings)
    }

    /// Pids skipped because they vanished or could not be read.
    pub fn skipped_pids(&self) -> u64 {
        self.skipped_pids
    }

    fn warn(&mut self, msg: String) {
        *self.warnings.entry(msg).or_insert(0) += 1;
    }

    fn read(&mut self, path: &Path) -> Option<String> {
        match fs::read_to_string(path) {
            Ok(s) => Some(s),
            Err(e) => {
                self.warn(format!("{}: {}", path.display(), e));
                None
            }
        }
    }

    fn parsed<T>(&mut self, path: &Path, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Option<T> {
        let text = self.read(path)?;
        match f(&text) {
            Ok(v) => Some(v),
            Err(e) => {
                self.warn(format!("{}: {}", path.display(), e));
                None
            }
        }
    }

    fn proc_path(&self, rel: &str) -> PathBuf {
        self.cfg.proc_root.join(rel)
    }

    fn controller_file(&mut self, controller: &str, file: &str) -> Option<PathBuf> {
        match controller_dir(&self.cfg.cgroup_root, controller) {
            Some(dir) => {
                let dir = match &self.cfg.cgroup_path {
                    Some(p) => dir.join(p.strip_prefix("/").unwrap_or(p)),
                    None => dir,
                };
                Some(dir.join(file))
            }
            None => {
                self.warn(format!("{}: {controller} controller not mounted", self.cfg.cgroup_root.display()));
                None
            }
        }
    }

    pub fn collect_host(&mut self, clock: &dyn Clock) -> (HostMetrics, u64) {
        let ts = clock.monotonic_ns();
        let mut h = HostMetrics::default();

        if let Some(cpu) = self.parsed(&self.proc_path("stat"), parsers::parse_proc_stat) {
            h.cpu_time_user_mode = Some(cpu.user);
            h.cpu_time_kernel_mode = Some(cpu.system);
            h.cpu_idle_time = Some(cpu.idle);
            h.cpu_time_io_wait = Some(cpu.iowait);
            h.cpu_context_switches = Some(cpu.context_switches);
            h.cpu_nice = Some(cpu.nice);
            h.cpu_steal = Some(cpu.steal);
        }

        let filter = self.cfg.device_filter.clone();
        if let Some(disks) =
            self.parsed(&self.proc_path("diskstats"), |t| parsers::parse_proc_diskstats(t, filter.as_ref()))
        {
            let sum = |f: fn(&parsers::DiskStatsEntry) -> u64| disks.iter().map(f).fold(0u64, u64::saturating_add);
            h.disk_sector_reads = Some(sum(|d| d.sectors_read));
            h.disk_sector_writes = Some(sum(|d| d.sectors_written));
            h.disk_read_time = Some(sum(|d| d.read_time_ms));
            h.disk_write_time = Some(sum(|d| d.write_time_ms));
        }

        if let Some((rx, tx)) = self.network_totals() {
            h.network_bytes_recvd = Some(rx);
            h.network_bytes_sent = Some(tx);
        }

        if let Some(m) = self.parsed(&self.proc_path("meminfo"), parsers::parse_proc_meminfo) {
            h.memory_total = Some(m.total);
            h.memory_free = Some(m.free);
            h.memory_buffers = m.buffers;
            h.memory_cached = m.cached;
        }
        h.load_avg = self.parsed(&self.proc_path("loadavg"), parsers::parse_proc_loadavg);
        h.id = self.read(&self.proc_path("sys/kernel/random/boot_id")).map(|s| s.trim().to_string());
        (h, ts)
    }

    fn network_totals(&mut self) -> Option<(u64, u64)> {
        let exclude_lo = !self.cfg.include_loopback;
        let rows = self.parsed(&self.proc_path("net/dev"), |t| parsers::parse_proc_net_dev(t, exclude_lo))?;
        Some(
            rows.iter()
                .fold((0u64, 0u64), |(rx, tx), r| (rx.saturating_add(r.bytes_recvd), tx.saturating_add(r.bytes_sent))),
        )
    }

    fn cgroup_pids(&mut self) -> Option<Vec<u32>> {
        let path = self.controller_file("cpuacct", "cgroup.procs")?;
        self.parsed(&path, parsers::parse_cgroup_procs)
    }

    pub fn collect_container(&mut self, clock: &dyn Clock) -> (ContainerMetrics, u64) {
        let ts = clock.monotonic_ns();
        let mut c = ContainerMetrics::default();

        if let Some(path) = self.controller_file("cpuacct", "cpuacct.stat") {
            if let Some(cpu) = self.parsed(&path, parsers::parse_cgroup_cpuacct) {
                c.cpu_time_user_mode = Some(cpu.user);
                c.cpu_time_kernel_mode = Some(cpu.system);
            }
        }

        let sectors_path = self.controller_file("blkio", "blkio.sectors");
        let bytes_path = self.controller_file("blkio", "blkio.throttle.io_service_bytes");
        if let Some(bytes_path) = bytes_path {
            let sectors = sectors_path.and_then(|p| self.read(&p));
            if let Some(service) = self.read(&bytes_path) {
                let b = parsers::parse_cgroup_blkio(sectors.as_deref(), &service);
                c.disk_sector_io = b.sectors_total;
                c.disk_read_bytes = Some(b.read_bytes);
                c.disk_write_bytes = Some(b.write_bytes);
            }
        }

        if let Some((rx, tx)) = self.network_totals() {
            c.network_bytes_recvd = Some(rx);
            c.network_bytes_sent = Some(tx);
        }

        if let Some(path) = self.controller_file("memory", "memory.usage_in_bytes") {
            c.memory_used = self.parsed(&path, parsers::parse_cgroup_memory_usage);
        }
        c.num_processes = self.cgroup_pids().map(|p| p.len() as u64);
        c.id = match &self.cfg.cgroup_path {
            Some(p) => Some(p.display().to_string()),
            None => self.read(&self.proc_path("sys/kernel/hostname")).map(|s| s.trim().to_string()),
        };
        (c, ts)
    }

    fn enumerate_pids(&mut self) -> Vec<u32> {
        let use_cgroup = match self.cfg.process_scope {
            ProcessScope::All => false,
            ProcessScope::Cgroup => true,
            ProcessScope::Auto => {
                self.cfg.verbosity.container && controller_dir(&self.cfg.cgroup_root, "cpuacct").is_some()
            }
        };
        let mut pids = if use_cgroup {
            self.cgroup_pids().unwrap_or_default()
        } else {
            match fs::read_dir(&self.cfg.proc_root) {
                Ok(rd) => {
                    rd.filter_map(|e| e.ok()?.file_name().to_str()?.parse::<u32>().ok()).filter(|p| *p > 0).collect()
                }
                Err(e) => {
                    self.warn(format!("{}: {}", self.cfg.proc_root.display(), e));
                    Vec::new()
                }
            }
        };
        pids.sort_unstable();
        pids.dedup();
        pids
    }

    fn read_process(&self, pid: u32) -> Result<ProcessMetrics, ()> {
        let dir = self.cfg.proc_root.join(pid.to_string());
        let stat_text = fs::read_to_string(dir.join("stat")).map_err(drop)?;
        let stat = parsers::parse_pid_stat(&stat_text).map_err(drop)?;
        let status_text = fs::read_to_string(dir.join("status")).map_err(drop)?;
        let status = parsers::parse_pid_status(&status_text).map_err(drop)?;
        Ok(ProcessMetrics {
            pid,
            name: stat.comm,
            cpu_time_user_mode: stat.utime,
            cpu_time_kernel_mode: stat.stime,
            voluntary_context_switches: status.voluntary_ctxt_switches,
            nonvoluntary_context_switches: status.nonvoluntary_ctxt_switches,
            block_io_delays: stat.delayacct_blkio_ticks,
            resident_set_size: stat.rss,
            num_threads: stat.num_threads,
        })
    }

    /// Pids that vanish between enumeration and read are skipped and only
    /// counted in [`Collector::skipped_pids`].
    pub fn collect_processes(&mut self, clock: &dyn Clock) -> (Vec<ProcessMetrics>, u64) {
        let ts = clock.monotonic_ns();
        let pids = self.enumerate_pids();
        let mut out = Vec::with_capacity(pids.len());
        for pid in pids {
            match self.read_process(pid) {
                Ok(p) => out.push(p),
                Err(()) => self.skipped_pids += 1,
            }
        }
        (out, ts)
    }

    /// Collects the enabled sections in the fixed order host, container,
    /// process.
    pub fn collect_snapshot(&mut self, clock: &dyn Clock) -> Snapshot {
        let start = clock.monotonic_ns();
        let wall = clock.wall_ns();
        let mut ts = SectionTimestamps::default();
        let v = self.cfg.verbosity;

        let host = v.host.then(|| {
            let (h, t) = self.collect_host(clock);
            ts.host = Some(t);
            h
        });
        let container = v.container.then(|| {
            let (c, t) = self.collect_container(clock);
            ts.container = Some(t);
            c
        });
        let processes = v.process.then(|| {
            let (p, t) = self.collect_processes(clock);
            ts.process = Some(t);
            p
        });
        let end = clock.monotonic_ns();

        Snapshot {
            schema_version: SCHEMA_VERSION,
            metadata: None,
            wall_clock: wall as f64 / 1e9,
            monotonic_clock: start,
            section_timestamps: ts,
            host,
            container,
            processes,
            collection_duration: end.saturating_sub(start),
        }
    }
}

/// Directory of a v1 controller, accounting for co-mounted hierarchies such
/// as `cpu,cpuacct`.
fn controller_dir(root: &Path, controller: &str) -> Option<PathBuf> {
    let direct = root.join(controller);
    if direct.is_dir() {
        return Some(direct);
    }
    let entries = fs::read_dir(root).ok()?;
    entries
        .filter_map(|e| e.ok())
        .find(|e| {
            e.file_name().to_str().is_some_and(|n| n.split(',').any(|part| part == controller)) && e.path().is_dir()
        })
        .map(|e| e.path())
}
