// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

use super::{parse_u64, ParseError};
use serde::Serialize;
use std::collections::BTreeSet;

const STAT: &str = "/proc/stat";
const DISKSTATS: &str = "/proc/diskstats";
const NET_DEV: &str = "/proc/net/dev";
const MEMINFO: &str = "/proc/meminfo";
const LOADAVG: &str = "/proc/loadavg";

/// Aggregate `cpu` line of /proc/stat plus the `ctxt` counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CpuStatLine {
    pub user: u64,
    pub nice: u64,
    pub system: u64,
    pub idle: u64,
    pub iowait: u64,
    pub irq: u64,
    pub softirq: u64,
    pub steal: u64,
    pub context_switches: u64,
}

pub fn parse_proc_stat(text: &str) -> Result<CpuStatLine, ParseError> {
    let mut cpu = None;
    let mut ctxt = None;
    for line in text.lines() {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("cpu") if cpu.is_none() => {
                let cols = toks.take(8).map(|t| parse_u64(STAT, "cpu line", t)).collect::<Result<Vec<_>, _>>()?;
                if cols.len() < 8 {
                    return Err(ParseError::new(STAT, format!("cpu line has {} columns, need 8", cols.len())));
                }
                cpu = Some(cols);
            }
            Some("ctxt") if ctxt.is_none() => {
                let tok = toks.next().ok_or_else(|| ParseError::new(STAT, "empty ctxt line"))?;
                ctxt = Some(parse_u64(STAT, "ctxt", tok)?);
            }
            _ => {}
        }
    }
    let cols = cpu.ok_or_else(|| ParseError::new(STAT, "missing aggregate \"cpu \" line"))?;
    let context_switches = ctxt.ok_or_else(|| ParseError::new(STAT, "missing ctxt line"))?;
    Ok(CpuStatLine {
        user: cols[0],
        nice: cols[1],
        system: cols[2],
        idle: cols[3],
        iowait: cols[4],
        irq: cols[5],
        softirq: cols[6],
        steal: cols[7],
        context_switches,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiskStatsEntry {
    pub device: String,
    pub sectors_read: u64,
    pub sectors_written: u64,
    pub read_time_ms: u64,
    pub write_time_ms: u64,
}

fn strip_partition_suffix<'a>(name: &'a str, prefixes: &[&str]) -> Option<&'a str> {
    prefixes.iter().find_map(|p| name.strip_prefix(p))
}

/// Name heuristic for whole physical block devices.
///
/// Rejects partitions (`sda1`, `vdb2`, `nvme0n1p3`, `mmcblk0p1`) and
/// virtual or stacked devices whose I/O is already counted on the physical
/// device underneath (`loop*`, `ram*`, `zram*`, `dm-*`, `md*`, `sr*`).
pub fn is_whole_device(name: &str) -> bool {
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    for virt in ["loop", "ram", "zram", "dm-", "md", "sr"] {
        if let Some(rest) = name.strip_prefix(virt) {
            if all_digits(rest) {
                return false;
            }
        }
    }
    // sdX1, vdX1, hdX1, xvdX1
    if let Some(rest) = strip_partition_suffix(name, &["xvd", "sd", "vd", "hd"]) {
        let letters = rest.bytes().take_while(|b| b.is_ascii_lowercase()).count();
        return letters == 0 || !all_digits(&rest[letters..]);
    }
    // nvme0n1p1, mmcblk0p1
    if name.starts_with("nvme") || name.starts_with("mmcblk") {
        if let Some(idx) = name.rfind('p') {
            let (head, tail) = name.split_at(idx);
            if all_digits(&tail[1..]) && head.ends_with(|c: char| c.is_ascii_digit()) {
                return false;
            }
        }
    }
    true
}

/// Per-device rows of /proc/diskstats.
///
/// With `device_filter` the named devices are returned whatever they are;
/// without it only rows passing [`is_whole_device`] are kept.
pub fn parse_proc_diskstats(
    text: &str,
    device_filter: Option<&BTreeSet<String>>,
) -> Result<Vec<DiskStatsEntry>, ParseError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() < 14 {
            return Err(ParseError::new(
                DISKSTATS,
                format!("row {line:?} has {} columns, need at least 14", cols.len()),
            ));
        }
        let device = cols[2];
        let keep = match device_filter {
            Some(f) => f.contains(device),
            None => is_whole_device(device),
        };
        // Validate every row's numeric columns so corrupt files are caught
        // even when the corrupt row would have been filtered out.
        let num = |i: usize| parse_u64(DISKSTATS, "diskstats row", cols[i]);
        let entry = DiskStatsEntry {
            device: device.to_string(),
            sectors_read: num(5)?,
            sectors_written: num(9)?,
            read_time_ms: num(6)?,
            write_time_ms: num(10)?,
        };
        if keep {
            out.push(entry);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetDevEntry {
    pub interface: String,
    pub bytes_recvd: u64,
    pub bytes_sent: u64,
}

pub fn parse_proc_net_dev(text: &str, exclude_loopback: bool) -> Result<Vec<NetDevEntry>, ParseError> {
    let mut lines = text.lines();
    let h1 = lines.next().unwrap_or("");
    let h2 = lines.next().unwrap_or("");
    if !(h1.contains('|') && h2.contains('|') && h2.contains("bytes")) {
        return Err(ParseError::new(NET_DEV, "malformed header"));
    }
    let mut out = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (name, rest) = line
            .split_once(':')
            .ok_or_else(|| ParseError::new(NET_DEV, format!("row {line:?} has no interface colon")))?;
        let name = name.trim();
        let cols: Vec<&str> = rest.split_whitespace().collect();
        if name.is_empty() || cols.len() < 9 {
            return Err(ParseError::new(NET_DEV, format!("row {line:?} is truncated")));
        }
        let bytes_recvd = parse_u64(NET_DEV, "receive bytes", cols[0])?;
        let bytes_sent = parse_u64(NET_DEV, "transmit bytes", cols[8])?;
        if exclude_loopback && name == "lo" {
            continue;
        }
        out.push(NetDevEntry { interface: name.to_string(), bytes_recvd, bytes_sent });
    }
    Ok(out)
}

/// Selected /proc/meminfo fields, in kB.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MeminfoRecord {
    pub total: u64,
    pub free: u64,
    pub buffers: Option<u64>,
    pub cached: Option<u64>,
}

pub fn parse_proc_meminfo(text: &str) -> Result<MeminfoRecord, ParseError> {
    let (mut total, mut free, mut buffers, mut cached) = (None, None, None, None);
    for line in text.lines() {
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let slot = match key.trim() {
            "MemTotal" => &mut total,
            "MemFree" => &mut free,
            "Buffers" => &mut buffers,
            "Cached" => &mut cached,
            _ => continue,
        };
        if slot.is_some() {
            continue;
        }
        let tok = value
            .split_whitespace()
            .next()
            .ok_or_else(|| ParseError::new(MEMINFO, format!("{} has no value", key.trim())))?;
        *slot = Some(parse_u64(MEMINFO, key.trim(), tok)?);
    }
    let total = total.ok_or_else(|| ParseError::new(MEMINFO, "missing MemTotal"))?;
    let free = free.ok_or_else(|| ParseError::new(MEMINFO, "missing MemFree"))?;
    if free > total {
        return Err(ParseError::new(MEMINFO, "MemFree exceeds MemTotal"));
    }
    Ok(MeminfoRecord { total, free, buffers, cached })
}

pub fn parse_proc_loadavg(text: &str) -> Result<[f64; 3], ParseError> {
    let mut out = [0.0; 3];
    let mut toks = text.split_whitespace();
    for slot in out.iter_mut() {
        let tok = toks.next().ok_or_else(|| ParseError::new(LOADAVG, "fewer than 3 averages"))?;
        let v: f64 = tok.parse().map_err(|_| ParseError::new(LOADAVG, format!("bad load average {tok:?}")))?;
        if !v.is_finite() || v < 0.0 {
            return Err(ParseError::new(LOADAVG, format!("bad load average {tok:?}")));
        }
        *slot = v;
    }
    Ok(out)
}
