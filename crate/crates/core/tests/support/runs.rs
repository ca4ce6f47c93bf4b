// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Fixture runs, random runs and the delta telescoping check.

use cprof_core::{compute_deltas, load_run, Method, ProfileRun, RuleSet, Snapshot};
use rand::{rngs::StdRng, Rng};
use std::path::{Path, PathBuf};

pub fn run_dir(fixtures: &Path, name: &str) -> PathBuf {
    fixtures.join("runs").join(name)
}

pub fn load(fixtures: &Path, name: &str) -> ProfileRun {
    let (run, warnings) = load_run(&run_dir(fixtures, name)).unwrap();
    assert!(warnings.is_empty(), "{warnings:?}");
    run
}

fn counter_total(run: &ProfileRun, metric: &str) -> u64 {
    let v: Vec<u64> = run.snapshots.iter().filter_map(|s| s.metric(metric)?.as_int()).collect();
    v.last().unwrap() - v[0]
}

/// Sum of the `target`-second deltas of every host and container counter
/// equals its last reading minus its first.
pub fn check_telescopes(run: &ProfileRun, target: f64) -> Result<(), String> {
    let rules = RuleSet::defaults();
    let series = compute_deltas(run, &rules, target).map_err(|e| e.to_string())?;
    for s in series {
        let Some(rule) = rules.get(&s.metric) else {
            continue;
        };
        if s.pid.is_some() || !matches!(rule.method, Method::Delta) {
            continue;
        }
        let sum: u64 = s.values().iter().map(|v| v.as_int().unwrap()).sum();
        let want = counter_total(run, &s.metric);
        if sum != want {
            return Err(format!("{} at {target}s: deltas sum to {sum}, last - first is {want}", s.metric));
        }
    }
    Ok(())
}

/// A run cloned from `template` with jittered ticks, occasional missed
/// ticks and three random-walk counters.
pub fn random_run(rng: &mut StdRng, template: &ProfileRun) -> ProfileRun {
    let first = template.snapshots[0].clone();
    let n = rng.gen_range(2..60);
    let mut mono = 1_000_000_000u64;
    let mut counters = [0u64; 3];
    let snaps: Vec<Snapshot> = (0..n)
        .map(|i| {
            if i > 0 {
                mono += 1_000_000_000 + rng.gen_range(0..40_000_000);
                if rng.gen_bool(0.1) {
                    mono += 1_000_000_000 * rng.gen_range(1..4);
                }
            }
            for c in &mut counters {
                *c += rng.gen_range(0..1_000_000);
            }
            let mut s = first.clone();
            s.monotonic_clock = mono;
            s.wall_clock = 1.7e9 + mono as f64 / 1e9;
            let h = s.host.as_mut().unwrap();
            h.cpu_time_user_mode = Some(counters[0]);
            h.disk_sector_writes = Some(counters[1]);
            h.network_bytes_sent = Some(counters[2]);
            s
        })
        .collect();
    ProfileRun::new(template.metadata.clone(), snaps)
}

/// Targets the random-run check draws from.
pub const RANDOM_TARGETS: [f64; 5] = [1.0, 1.5, 2.0, 5.0, 7.3];
