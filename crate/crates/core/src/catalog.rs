// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Static registry of every metric the collector knows how to produce.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Sampling level. Each level owns a one-letter name prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Host,
    Container,
    Process,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Host, Level::Container, Level::Process];

    pub fn prefix(self) -> char {
        match self {
            Level::Host => 'v',
            Level::Container => 'c',
            Level::Process => 'p',
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Host => "host",
            Level::Container => "container",
            Level::Process => "process",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Cpu,
    Memory,
    Disk,
    Network,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Cpu, Category::Memory, Category::Disk, Category::Network];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Cpu => "cpu",
            Category::Memory => "memory",
            Category::Disk => "disk",
            Category::Network => "network",
        }
    }
}

/// Counters accumulate since boot (or cgroup/process creation); gauges are
/// instantaneous readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Counter,
    Gauge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    ClockTicks,
    Bytes,
    Sectors,
    Pages,
    Count,
    Milliseconds,
    Kilobytes,
    /// Identifier or name; not numeric.
    Label,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::ClockTicks => "clock-ticks",
            Unit::Bytes => "bytes",
            Unit::Sectors => "sectors",
            Unit::Pages => "pages",
            Unit::Count => "count",
            Unit::Milliseconds => "milliseconds",
            Unit::Kilobytes => "kilobytes",
            Unit::Label => "label",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetricDescriptor {
    pub name: &'static str,
    pub level: Level,
    pub category: Category,
    pub source: &'static str,
    pub kind: MetricKind,
    pub unit: Unit,
    pub description: &'static str,
}

impl MetricDescriptor {
    pub fn is_numeric(&self) -> bool {
        self.unit != Unit::Label
    }
}

macro_rules! metric {
    ($name:literal, $level:ident, $cat:ident, $src:literal, $kind:ident, $unit:ident, $desc:literal) => {
        MetricDescriptor {
            name: $name,
            level: Level::$level,
            category: Category::$cat,
            source: $src,
            kind: MetricKind::$kind,
            unit: Unit::$unit,
            description: $desc,
        }
    };
}

static CATALOG: [MetricDescriptor; 38] = [
    // host
    metric!(
        "vCpuTimeUserMode",
        Host,
        Cpu,
        "/proc/stat",
        Counter,
        ClockTicks,
        "CPU time for processes executing in user mode"
    ),
    metric!(
        "vCpuTimeKernelMode",
        Host,
        Cpu,
        "/proc/stat",
        Counter,
        ClockTicks,
        "CPU time for processes executing in kernel mode"
    ),
    metric!("vCpuIdleTime", Host, Cpu, "/proc/stat", Counter, ClockTicks, "CPU idle time"),
    metric!("vCpuTimeIOWait", Host, Cpu, "/proc/stat", Counter, ClockTicks, "CPU time waiting for I/O to complete"),
    metric!(
        "vCpuContextSwitches",
        Host,
        Cpu,
        "/proc/stat",
        Counter,
        Count,
        "Total number of context switches across all CPUs"
    ),
    metric!("vCpuNice", Host, Cpu, "/proc/stat", Counter, ClockTicks, "CPU time for niced processes in user mode"),
    metric!("vCpuSteal", Host, Cpu, "/proc/stat", Counter, ClockTicks, "CPU time stolen by the hypervisor"),
    metric!("vDiskSectorReads", Host, Disk, "/proc/diskstats", Counter, Sectors, "Number of sector reads"),
    metric!("vDiskSectorWrites", Host, Disk, "/proc/diskstats", Counter, Sectors, "Number of sectors written"),
    metric!("vDiskReadTime", Host, Disk, "/proc/diskstats", Counter, Milliseconds, "Time spent reading"),
    metric!("vDiskWriteTime", Host, Disk, "/proc/diskstats", Counter, Milliseconds, "Time spent writing"),
    metric!("vNetworkBytesRecvd", Host, Network, "/proc/net/dev", Counter, Bytes, "Network bytes received"),
    metric!("vNetworkBytesSent", Host, Network, "/proc/net/dev", Counter, Bytes, "Network bytes written"),
    metric!("vMemoryTotal", Host, Memory, "/proc/meminfo", Gauge, Kilobytes, "Total usable memory"),
    metric!("vMemoryFree", Host, Memory, "/proc/meminfo", Gauge, Kilobytes, "Unused memory"),
    metric!("vMemoryBuffers", Host, Memory, "/proc/meminfo", Gauge, Kilobytes, "Memory in raw disk block buffers"),
    metric!("vMemoryCached", Host, Memory, "/proc/meminfo", Gauge, Kilobytes, "Memory in the page cache"),
    metric!("vLoadAvg", Host, Cpu, "/proc/loadavg", Gauge, Count, "1, 5 and 15 minute load averages"),
    metric!("vId", Host, Cpu, "/proc/sys/kernel/random/boot_id", Gauge, Label, "Host identifier"),
    // container
    metric!(
        "cCpuTimeUserMode",
        Container,
        Cpu,
        "/sys/fs/cgroup/cpuacct/cpuacct.stat",
        Counter,
        ClockTicks,
        "CPU time consumed by tasks in user mode"
    ),
    metric!(
        "cCpuTimeKernelMode",
        Container,
        Cpu,
        "/sys/fs/cgroup/cpuacct/cpuacct.stat",
        Counter,
        ClockTicks,
        "CPU time consumed by tasks in kernel mode"
    ),
    metric!(
        "cDiskSectorIO",
        Container,
        Disk,
        "/sys/fs/cgroup/blkio/blkio.sectors",
        Counter,
        Sectors,
        "Number of sectors transferred to or from specific devices"
    ),
    metric!(
        "cDiskReadBytes",
        Container,
        Disk,
        "/sys/fs/cgroup/blkio/blkio.throttle.io_service_bytes",
        Counter,
        Bytes,
        "Number of bytes transferred from specific devices"
    ),
    metric!(
        "cDiskWriteBytes",
        Container,
        Disk,
        "/sys/fs/cgroup/blkio/blkio.throttle.io_service_bytes",
        Counter,
        Bytes,
        "Number of bytes transferred to specific devices"
    ),
    metric!(
        "cNetworkBytesRecvd",
        Container,
        Network,
        "/proc/net/dev",
        Counter,
        Bytes,
        "The number of bytes each interface has received"
    ),
    metric!(
        "cNetworkBytesSent",
        Container,
        Network,
        "/proc/net/dev",
        Counter,
        Bytes,
        "The number of bytes each interface has sent"
    ),
    metric!(
        "cMemoryUsed",
        Container,
        Memory,
        "/sys/fs/cgroup/memory/memory.usage_in_bytes",
        Gauge,
        Bytes,
        "Current memory usage of the cgroup"
    ),
    metric!("cId", Container, Cpu, "/proc/sys/kernel/hostname", Gauge, Label, "Container identifier"),
    metric!(
        "cNumProcesses",
        Container,
        Cpu,
        "/sys/fs/cgroup/cpuacct/cgroup.procs",
        Gauge,
        Count,
        "Number of processes in the cgroup"
    ),
    // process
    metric!("pId", Process, Cpu, "/proc/[pid]/stat", Gauge, Label, "Process id"),
    metric!("pName", Process, Cpu, "/proc/[pid]/stat", Gauge, Label, "Command name"),
    metric!(
        "pCpuTimeUserMode",
        Process,
        Cpu,
        "/proc/[pid]/stat",
        Counter,
        ClockTicks,
        "Amount of time that this process has been scheduled in user mode"
    ),
    metric!(
        "pCpuTimeKernelMode",
        Process,
        Cpu,
        "/proc/[pid]/stat",
        Counter,
        ClockTicks,
        "Amount of time that this process has been scheduled in kernel mode"
    ),
    metric!(
        "pVoluntaryContextSwitches",
        Process,
        Cpu,
        "/proc/[pid]/status",
        Counter,
        Count,
        "Number of voluntary context switches"
    ),
    metric!(
        "pNonvoluntaryContextSwitches",
        Process,
        Cpu,
        "/proc/[pid]/status",
        Counter,
        Count,
        "Number of involuntary context switches"
    ),
    metric!("pBlockIODelays", Process, Disk, "/proc/[pid]/stat", Counter, ClockTicks, "Aggregated block I/O delays"),
    metric!(
        "pResidentSetSize",
        Process,
        Memory,
        "/proc/[pid]/stat",
        Gauge,
        Pages,
        "Number of pages the process has in real memory"
    ),
    metric!("pNumThreads", Process, Cpu, "/proc/[pid]/stat", Gauge, Count, "Number of threads in the process"),
];

/// The full static catalog.
pub fn catalog() -> &'static [MetricDescriptor] {
    &CATALOG
}

pub fn lookup(name: &str) -> Option<&'static MetricDescriptor> {
    CATALOG.iter().find(|d| d.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn names_are_unique() {
        let names: HashSet<_> = catalog().iter().map(|d| d.name).collect();
        assert_eq!(names.len(), catalog().len());
    }

    #[test]
    fn prefix_matches_level() {
        for d in catalog() {
            assert_eq!(d.name.chars().next(), Some(d.level.prefix()), "{}", d.name);
        }
    }

    #[test]
    fn table_entries() {
        let d = lookup("vCpuTimeUserMode").unwrap();
        assert_eq!(d.level, Level::Host);
        assert_eq!(d.category, Category::Cpu);
        assert_eq!(d.source, "/proc/stat");
        assert_eq!(d.kind, MetricKind::Counter);

        let d = lookup("cDiskSectorIO").unwrap();
        assert_eq!(d.level, Level::Container);
        assert_eq!(d.source, "/sys/fs/cgroup/blkio/blkio.sectors");

        assert!(lookup("vSomethingElse").is_none());
    }
}
