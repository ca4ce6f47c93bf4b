// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

use cprof_core::parsers;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use std::path::Path;

fn read(rel: &str) -> String {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/scenarios");
    std::fs::read_to_string(root.join(rel)).unwrap()
}

fn bench_parsers(c: &mut Criterion) {
    // The live capture has a real machine's line counts.
    let stat = read("live-capture/proc/stat");
    let diskstats = read("live-capture/proc/diskstats");
    let netdev = read("live-capture/proc/net/dev");
    let meminfo = read("live-capture/proc/meminfo");
    let pid_stat = read("odd-comm-whitespace/proc/4242/stat");
    let cpuacct = read("basic/sys/fs/cgroup/cpuacct/cpuacct.stat");
    let blkio = read("multi-device/sys/fs/cgroup/blkio/blkio.throttle.io_service_bytes");

    let mut g = c.benchmark_group("parse");
    g.bench_function("proc_stat", |b| b.iter(|| parsers::parse_proc_stat(black_box(&stat))));
    g.bench_function("proc_diskstats", |b| b.iter(|| parsers::parse_proc_diskstats(black_box(&diskstats), None)));
    g.bench_function("proc_net_dev", |b| b.iter(|| parsers::parse_proc_net_dev(black_box(&netdev), true)));
    g.bench_function("proc_meminfo", |b| b.iter(|| parsers::parse_proc_meminfo(black_box(&meminfo))));
    g.bench_function("pid_stat", |b| b.iter(|| parsers::parse_pid_stat(black_box(&pid_stat))));
    g.bench_function("cgroup_cpuacct", |b| b.iter(|| parsers::parse_cgroup_cpuacct(black_box(&cpuacct))));
    g.bench_function("cgroup_blkio", |b| b.iter(|| parsers::parse_cgroup_blkio(None, black_box(&blkio))));
    g.finish();
}

criterion_group!(benches, bench_parsers);
criterion_main!(benches);
