// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Text parsers for kernel-exposed source files.
//!
//! Every function here is a pure function of its input string. None of them
//! touch the filesystem, so the whole surface is testable from fixture text.

mod cgroup;
mod pid;
mod proc;

pub use cgroup::{
    parse_cgroup_blkio, parse_cgroup_cpuacct, parse_cgroup_memory_usage, parse_cgroup_procs, CgroupBlkio,
    CgroupCpuacctStat,
};
pub use pid::{parse_pid_stat, parse_pid_status, PidStatRecord, PidStatusRecord};
pub use proc::{
    is_whole_device, parse_proc_diskstats, parse_proc_loadavg, parse_proc_meminfo, parse_proc_net_dev, parse_proc_stat,
    CpuStatLine, DiskStatsEntry, MeminfoRecord, NetDevEntry,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{file}: {message}")]
pub struct ParseError {
    pub file: &'static str,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(file: &'static str, message: impl Into<String>) -> Self {
        ParseError { file, message: message.into() }
    }
}

pub(crate) fn parse_u64(file: &'static str, what: &str, tok: &str) -> Result<u64, ParseError> {
    tok.parse::<u64>().map_err(|_| ParseError::new(file, format!("{what}: expected unsigned integer, got {tok:?}")))
}
