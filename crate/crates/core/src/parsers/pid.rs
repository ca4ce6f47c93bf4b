// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

use super::{parse_u64, ParseError};
use serde::Serialize;

const PID_STAT: &str = "/proc/[pid]/stat";
const PID_STATUS: &str = "/proc/[pid]/status";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PidStatRecord {
    pub pid: u32,
    pub comm: String,
    pub utime: u64,
    pub stime: u64,
    pub num_threads: u64,
    pub rss: u64,
    /// Field 42; missing on kernels without delay accounting in stat.
    pub delayacct_blkio_ticks: Option<u64>,
}

/// Parses one `/proc/[pid]/stat` line.
///
/// `comm` may contain spaces and parentheses, so it spans from the first
/// `(` to the *last* `)`. Fields after it are numbered from 3 (state).
pub fn parse_pid_stat(text: &str) -> Result<PidStatRecord, ParseError> {
    let open = text.find('(').ok_or_else(|| ParseError::new(PID_STAT, "no opening '('"))?;
    let close = text.rfind(')').ok_or_else(|| ParseError::new(PID_STAT, "no closing ')'"))?;
    if close < open {
        return Err(ParseError::new(PID_STAT, "')' precedes '('"));
    }
    let pid_tok = text[..open].trim();
    let pid = pid_tok
        .parse::<u32>()
        .ok()
        .filter(|p| *p > 0)
        .ok_or_else(|| ParseError::new(PID_STAT, format!("bad pid {pid_tok:?}")))?;
    let comm = text[open + 1..close].to_string();

    // rest[0] is field 3, so field n lives at rest[n - 3].
    let rest: Vec<&str> = text[close + 1..].split_whitespace().collect();
    let field = |n: usize| -> Result<u64, ParseError> {
        let tok = rest.get(n - 3).ok_or_else(|| ParseError::new(PID_STAT, format!("truncated before field {n}")))?;
        parse_u64(PID_STAT, "stat field", tok)
    };
    Ok(PidStatRecord {
        pid,
        comm,
        utime: field(14)?,
        stime: field(15)?,
        num_threads: field(20)?,
        rss: field(24)?,
        delayacct_blkio_ticks: if rest.len() >= 40 { Some(field(42)?) } else { None },
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PidStatusRecord {
    pub voluntary_ctxt_switches: Option<u64>,
    pub nonvoluntary_ctxt_switches: Option<u64>,
}

/// Absent keys are not an error: older kernels do not report them.
pub fn parse_pid_status(text: &str) -> Result<PidStatusRecord, ParseError> {
    let mut rec = PidStatusRecord::default();
    for line in text.lines() {
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let slot = match key.trim() {
            "voluntary_ctxt_switches" => &mut rec.voluntary_ctxt_switches,
            "nonvoluntary_ctxt_switches" => &mut rec.nonvoluntary_ctxt_switches,
            _ => continue,
        };
        let key = key.trim();
        let tok = value
            .split_whitespace()
            .next()
            .ok_or_else(|| ParseError::new(PID_STATUS, format!("{key} has no value")))?;
        *slot = Some(parse_u64(PID_STATUS, key, tok)?);
    }
    Ok(rec)
}
