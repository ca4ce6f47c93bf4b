// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Random and mutated inputs fed to every parser.

use cprof_core::parsers;
use cprof_core::{parse_snapshot, Strictness};
use rand::{rngs::StdRng, Rng, SeedableRng};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

pub fn seeds(fixtures: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for rel in [
        "scenarios/basic/proc/stat",
        "scenarios/basic/proc/diskstats",
        "scenarios/basic/proc/net/dev",
        "scenarios/basic/proc/meminfo",
        "scenarios/basic/proc/loadavg",
        "scenarios/odd-comm-whitespace/proc/4242/stat",
        "scenarios/basic/sys/fs/cgroup/cpuacct/cpuacct.stat",
        "scenarios/basic/sys/fs/cgroup/blkio/blkio.throttle.io_service_bytes",
        "scenarios/basic/golden_snapshot.json",
    ] {
        out.push(std::fs::read_to_string(fixtures.join(rel)).unwrap());
    }
    out
}

/// Random bytes, or a seed with a few bytes flipped, inserted or cut.
pub fn input(rng: &mut StdRng, seeds: &[String]) -> String {
    if rng.gen_bool(0.3) {
        let len = rng.gen_range(0..256);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        return String::from_utf8_lossy(&bytes).into_owned();
    }
    let mut b = seeds[rng.gen_range(0..seeds.len())].clone().into_bytes();
    for _ in 0..rng.gen_range(1..8) {
        if b.is_empty() {
            break;
        }
        let i = rng.gen_range(0..b.len());
        match rng.gen_range(0..4) {
            0 => b[i] = rng.gen(),
            1 => b.insert(i, b" \n()-:9x"[rng.gen_range(0..8)]),
            2 => b.truncate(i),
            _ => {
                b.remove(i);
            }
        }
    }
    String::from_utf8_lossy(&b).into_owned()
}

pub fn exercise(text: &str) {
    let _ = parsers::parse_proc_stat(text);
    let _ = parsers::parse_proc_diskstats(text, None);
    let _ = parsers::parse_proc_net_dev(text, false);
    let _ = parsers::parse_proc_meminfo(text);
    let _ = parsers::parse_proc_loadavg(text);
    let _ = parsers::parse_pid_stat(text);
    let _ = parsers::parse_pid_status(text);
    let _ = parsers::parse_cgroup_cpuacct(text);
    let _ = parsers::parse_cgroup_blkio(Some(text), text);
    let _ = parsers::parse_cgroup_memory_usage(text);
    let _ = parsers::parse_cgroup_procs(text);
    let _ = parse_snapshot(text, Strictness::Strict);
}

/// Feeds `n` inputs through every parser; returns the inputs that panicked.
pub fn panicking_inputs(fixtures: &Path, n: usize, seed: u64) -> Vec<(usize, String)> {
    let seeds = seeds(fixtures);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut panics = Vec::new();
    for i in 0..n {
        let text = input(&mut rng, &seeds);
        if catch_unwind(AssertUnwindSafe(|| exercise(&text))).is_err() {
            panics.push((i, text));
        }
    }
    panics
}
