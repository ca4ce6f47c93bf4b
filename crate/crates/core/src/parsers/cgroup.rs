// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! cgroup v1 controller files.

use super::{parse_u64, ParseError};
use serde::Serialize;

const CPUACCT: &str = "cpuacct.stat";
const MEMORY_USAGE: &str = "memory.usage_in_bytes";
const PROCS: &str = "cgroup.procs";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CgroupCpuacctStat {
    pub user: u64,
    pub system: u64,
}

pub fn parse_cgroup_cpuacct(text: &str) -> Result<CgroupCpuacctStat, ParseError> {
    let (mut user, mut system) = (None, None);
    for line in text.lines() {
        let mut toks = line.split_whitespace();
        let slot = match toks.next() {
            Some("user") => &mut user,
            Some("system") => &mut system,
            _ => continue,
        };
        let tok = toks.next().ok_or_else(|| ParseError::new(CPUACCT, "line without value"))?;
        *slot = Some(parse_u64(CPUACCT, "cpuacct value", tok)?);
    }
    match (user, system) {
        (Some(user), Some(system)) => Ok(CgroupCpuacctStat { user, system }),
        (None, _) => Err(ParseError::new(CPUACCT, "missing user line")),
        (_, None) => Err(ParseError::new(CPUACCT, "missing system line")),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CgroupBlkio {
    /// `None` when blkio.sectors is not available (removed in newer kernels).
    pub sectors_total: Option<u64>,
    pub read_bytes: u64,
    pub write_bytes: u64,
}

fn is_device(tok: &str) -> bool {
    match tok.split_once(':') {
        Some((maj, min)) => {
            !maj.is_empty()
                && !min.is_empty()
                && maj.bytes().all(|b| b.is_ascii_digit())
                && min.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

/// Sums per-device rows. Rows that are not `MAJ:MIN ...` device rows,
/// including the trailing `Total` summary, are skipped; so are rows whose
/// value does not parse. Sums saturate rather than wrap.
pub fn parse_cgroup_blkio(sectors_text: Option<&str>, service_bytes_text: &str) -> CgroupBlkio {
    let sectors_total = sectors_text.map(|text| {
        text.lines()
            .filter_map(|line| {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match toks.as_slice() {
                    [dev, v] if is_device(dev) => v.parse::<u64>().ok(),
                    _ => None,
                }
            })
            .fold(0u64, u64::saturating_add)
    });

    let (mut read_bytes, mut write_bytes) = (0u64, 0u64);
    for line in service_bytes_text.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [dev, op, v] = toks.as_slice() else {
            continue;
        };
        if !is_device(dev) {
            continue;
        }
        let Ok(v) = v.parse::<u64>() else { continue };
        match *op {
            "Read" => read_bytes = read_bytes.saturating_add(v),
            "Write" => write_bytes = write_bytes.saturating_add(v),
            _ => {}
        }
    }
    CgroupBlkio { sectors_total, read_bytes, write_bytes }
}

pub fn parse_cgroup_memory_usage(text: &str) -> Result<u64, ParseError> {
    let mut toks = text.split_whitespace();
    let tok = toks.next().ok_or_else(|| ParseError::new(MEMORY_USAGE, "empty file"))?;
    if toks.next().is_some() {
        return Err(ParseError::new(MEMORY_USAGE, "more than one value"));
    }
    parse_u64(MEMORY_USAGE, "usage", tok)
}

/// Pid list of a cgroup, one per line.
pub fn parse_cgroup_procs(text: &str) -> Result<Vec<u32>, ParseError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>().ok().filter(|p| *p > 0).ok_or_else(|| ParseError::new(PROCS, format!("bad pid {tok:?}")))
        })
        .collect()
}
