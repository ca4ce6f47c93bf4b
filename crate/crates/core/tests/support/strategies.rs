// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! proptest generators for valid snapshots.

use cprof_core::snapshot::SectionTimestamps;
use cprof_core::{ContainerMetrics, HostMetrics, ProcessMetrics, RunMetadata, Snapshot, Verbosity};
use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;
use std::path::PathBuf;

fn finite_non_negative() -> impl Strategy<Value = f64> {
    prop_oneof![0.0..1e6f64, Just(0.0), (0u32..100).prop_map(|v| v as f64 / 100.0)]
}

pub fn host() -> impl Strategy<Value = HostMetrics> {
    (vec(option::of(any::<u64>()), 13), any::<u64>(), option::of(any::<u64>()), option::of(any::<u64>()))
        .prop_flat_map(|(c, total, buffers, cached)| {
            (
                Just((c, total, buffers, cached)),
                option::of(0..=total),
                option::of([finite_non_negative(), finite_non_negative(), finite_non_negative()]),
                option::of("[0-9a-f-]{0,36}"),
            )
        })
        .prop_map(|((c, total, buffers, cached), free, load_avg, id)| HostMetrics {
            cpu_time_user_mode: c[0],
            cpu_time_kernel_mode: c[1],
            cpu_idle_time: c[2],
            cpu_time_io_wait: c[3],
            cpu_context_switches: c[4],
            cpu_nice: c[5],
            cpu_steal: c[6],
            disk_sector_reads: c[7],
            disk_sector_writes: c[8],
            disk_read_time: c[9],
            disk_write_time: c[10],
            network_bytes_recvd: c[11],
            network_bytes_sent: c[12],
            memory_total: free.map(|_| total),
            memory_free: free,
            memory_buffers: buffers,
            memory_cached: cached,
            load_avg,
            id,
        })
}

pub fn container() -> impl Strategy<Value = ContainerMetrics> {
    (vec(option::of(any::<u64>()), 9), option::of("\\PC{0,20}")).prop_map(|(c, id)| ContainerMetrics {
        cpu_time_user_mode: c[0],
        cpu_time_kernel_mode: c[1],
        disk_sector_io: c[2],
        disk_read_bytes: c[3],
        disk_write_bytes: c[4],
        network_bytes_recvd: c[5],
        network_bytes_sent: c[6],
        memory_used: c[7],
        id,
        num_processes: c[8],
    })
}

pub fn process() -> impl Strategy<Value = ProcessMetrics> {
    (1..=u32::MAX, "\\PC{0,15}", any::<[u64; 4]>(), vec(option::of(any::<u64>()), 3)).prop_map(|(pid, name, n, o)| {
        ProcessMetrics {
            pid,
            name,
            cpu_time_user_mode: n[0],
            cpu_time_kernel_mode: n[1],
            voluntary_context_switches: o[0],
            nonvoluntary_context_switches: o[1],
            block_io_delays: o[2],
            resident_set_size: n[2],
            num_threads: n[3],
        }
    })
}

pub fn metadata() -> impl Strategy<Value = RunMetadata> {
    (
        1e-3..1e4f64,
        (any::<bool>(), any::<bool>(), any::<bool>()),
        1..10_000u64,
        1..65_536u64,
        0.0..4e9f64,
        "\\PC{0,30}",
        "[a-z/]{1,20}",
    )
        .prop_map(|(interval_seconds, (h, c, p), ticks, sector, start, cmd, dir)| RunMetadata {
            schema_version: 1,
            interval_seconds,
            verbosity: if h || c || p { Verbosity::new(h, c, p) } else { Verbosity::HOST },
            clock_ticks_per_second: ticks,
            sector_size_bytes: sector,
            start_wall_clock: start,
            workload_command: cmd,
            output_directory: PathBuf::from(dir),
        })
}

/// Any snapshot that passes `Snapshot::validate`.
pub fn snapshot() -> impl Strategy<Value = Snapshot> {
    (
        option::of(metadata()),
        0.0..4e9f64,
        0..u64::MAX / 4,
        (option::of(host()), option::of(container()), option::of(vec(process(), 0..6))),
        (0..1_000_000u64, 0..1_000_000u64, 0..1_000_000u64),
        0..1_000_000u64,
    )
        .prop_filter("some section present", |(_, _, _, (h, c, p), _, _)| h.is_some() || c.is_some() || p.is_some())
        .prop_map(|(metadata, wall_clock, mono, (host, container, processes), (a, b, c), extra)| {
            let mut t = mono;
            let mut stamp = |present: bool, step: u64| {
                present.then(|| {
                    t += step;
                    t
                })
            };
            let section_timestamps = SectionTimestamps {
                host: stamp(host.is_some(), a),
                container: stamp(container.is_some(), b),
                process: stamp(processes.is_some(), c),
            };
            Snapshot {
                schema_version: 1,
                metadata,
                wall_clock,
                monotonic_clock: mono,
                section_timestamps,
                host,
                container,
                processes,
                collection_duration: (t - mono) + extra,
            }
        })
}
