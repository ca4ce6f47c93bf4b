// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Compares the parsers and collector against `fixtures/scenarios/*/expected.json`.

use cprof_core::clock::FakeClock;
use cprof_core::collector::{Collector, CollectorConfig, ConfigError};
use cprof_core::parsers;
use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};

pub fn scenario_dirs(fixtures: &Path) -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(fixtures.join("scenarios"))
        .expect("scenario directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    dirs
}

fn value<T: Serialize, E: std::fmt::Display>(r: Result<T, E>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap(),
        Err(_) => serde_json::json!({ "error": true }),
    }
}

fn read(root: &Path, rel: &str) -> Option<String> {
    fs::read(root.join(rel)).ok().map(|b| String::from_utf8_lossy(&b).into_owned())
}

/// Parser output for one expected-file key, or `None` for an unknown key.
fn parse_key(root: &Path, key: &str) -> Option<Value> {
    let text = || read(root, key).unwrap_or_else(|| panic!("{} missing {key}", root.display()));
    let file = key.rsplit('/').next().unwrap();
    Some(match (key, file) {
        ("proc/stat", _) => value(parsers::parse_proc_stat(&text())),
        ("proc/diskstats", _) => value(parsers::parse_proc_diskstats(&text(), None)),
        ("proc/net/dev", _) => value(parsers::parse_proc_net_dev(&text(), true)),
        ("proc/meminfo", _) => value(parsers::parse_proc_meminfo(&text())),
        ("proc/loadavg", _) => value(parsers::parse_proc_loadavg(&text())),
        (_, "stat") if key.starts_with("proc/") => value(parsers::parse_pid_stat(&text())),
        (_, "status") if key.starts_with("proc/") => value(parsers::parse_pid_status(&text())),
        (_, "cpuacct.stat") => value(parsers::parse_cgroup_cpuacct(&text())),
        (_, "memory.usage_in_bytes") => value(parsers::parse_cgroup_memory_usage(&text())),
        (_, "cgroup.procs") => value(parsers::parse_cgroup_procs(&text())),
        (_, "blkio") => {
            let sectors = read(root, &format!("{key}/blkio.sectors"));
            let bytes = read(root, &format!("{key}/blkio.throttle.io_service_bytes")).unwrap();
            value::<_, String>(Ok(parsers::parse_cgroup_blkio(sectors.as_deref(), &bytes)))
        }
        _ => return None,
    })
}

/// Source-file kinds a scenario's expectations cover.
pub fn covered_kinds(expected: &Value) -> Vec<String> {
    let mut kinds: Vec<String> = expected["files"]
        .as_object()
        .unwrap()
        .keys()
        .map(|k| {
            if k.starts_with("proc/") && k[5..].starts_with(|c: char| c.is_ascii_digit()) {
                format!("proc/[pid]/{}", k.rsplit('/').next().unwrap())
            } else if k.starts_with("sys/fs/cgroup/") {
                format!("cgroup/{}", k.rsplit('/').next().unwrap())
            } else {
                k.clone()
            }
        })
        .collect();
    kinds.sort();
    kinds.dedup();
    kinds
}

pub fn load_expected(root: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(root.join("expected.json")).unwrap()).unwrap()
}

/// Checks one scenario; returns the number of comparisons made.
pub fn check_scenario(root: &Path) -> Result<usize, String> {
    let name = root.file_name().unwrap().to_string_lossy().into_owned();
    let expected = load_expected(root);
    let mut checks = 0;
    for (key, want) in expected["files"].as_object().unwrap() {
        let got = parse_key(root, key).ok_or_else(|| format!("{name}: unknown key {key}"))?;
        if &got != want {
            return Err(format!("{name}: {key}: parsed {got} but oracle says {want}"));
        }
        checks += 1;
    }

    let cfg = CollectorConfig::with_roots(root.join("proc"), root.join("sys/fs/cgroup"));
    let collector = Collector::new(cfg);
    if let Some(e) = expected.get("config_error") {
        return match collector {
            Err(ConfigError::UnsupportedCgroupLayout(_)) if e == "unsupported-cgroup-layout" => Ok(checks + 1),
            other => Err(format!("{name}: expected config error {e}, got {other:?}")),
        };
    }
    let mut collector = collector.map_err(|e| format!("{name}: {e}"))?;
    let clock = FakeClock::new(1_000, 0);
    let snap = collector.collect_snapshot(&clock);
    let want = &expected["snapshot"];
    let sections = [
        ("host", serde_json::to_value(&snap.host).unwrap()),
        ("container", serde_json::to_value(&snap.container).unwrap()),
        ("processes", serde_json::to_value(&snap.processes).unwrap()),
    ];
    for (section, got) in sections {
        if got != want[section] {
            return Err(format!("{name}: snapshot {section}: collected {got} but oracle says {}", want[section]));
        }
        checks += 1;
    }
    Ok(checks)
}
