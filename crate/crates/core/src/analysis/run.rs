// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

use super::AnalysisError;
use crate::sampler::RUN_METADATA_FILE;
use crate::snapshot::{parse_metadata, parse_snapshot, RunMetadata, Snapshot, Strictness};
use std::fs;
use std::path::{Path, PathBuf};

const DEFAULT_SECTOR_SIZE: u64 = 512;
const DEFAULT_CLOCK_TICKS: u64 = 100;

/// A recorded run: snapshots in monotonic order plus its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRun {
    pub directory: Option<PathBuf>,
    pub metadata: Option<RunMetadata>,
    pub snapshots: Vec<Snapshot>,
}

impl ProfileRun {
    pub fn new(metadata: Option<RunMetadata>, mut snapshots: Vec<Snapshot>) -> Self {
        snapshots.sort_by_key(|s| s.monotonic_clock);
        ProfileRun { directory: None, metadata, snapshots }
    }

    /// Sampling interval from the metadata, else the median spacing of the
    /// snapshots, else one second.
    pub fn interval_seconds(&self) -> f64 {
        if let Some(m) = &self.metadata {
            return m.interval_seconds;
        }
        let mut gaps: Vec<u64> =
            self.snapshots.windows(2).map(|w| w[1].monotonic_clock - w[0].monotonic_clock).collect();
        if gaps.is_empty() {
            return 1.0;
        }
        gaps.sort_unstable();
        gaps[gaps.len() / 2] as f64 / 1e9
    }

    pub fn sector_size_bytes(&self) -> u64 {
        self.metadata.as_ref().map_or(DEFAULT_SECTOR_SIZE, |m| m.sector_size_bytes)
    }

    pub fn clock_ticks_per_second(&self) -> u64 {
        self.metadata.as_ref().map_or(DEFAULT_CLOCK_TICKS, |m| m.clock_ticks_per_second)
    }

    /// Per-snapshot collection durations.
    pub fn latencies_ns(&self) -> Vec<u64> {
        self.snapshots.iter().map(|s| s.collection_duration).collect()
    }
}

fn is_snapshot_file(name: &str) -> bool {
    name.strip_suffix(".json").is_some_and(|stem| !stem.is_empty() && stem.bytes().all(|b| b.is_ascii_digit()))
}

/// Loads every `<digits>.json` snapshot in `dir`. Unreadable or invalid
/// snapshots are skipped and reported in the returned warning list.
pub fn load_run(dir: &Path) -> Result<(ProfileRun, Vec<String>), AnalysisError> {
    let read_err = |source| AnalysisError::Read { path: dir.to_path_buf(), source };
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(read_err)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| is_snapshot_file(n))
        .collect();
    names.sort();

    let mut warnings = Vec::new();
    let mut snapshots = Vec::with_capacity(names.len());
    for name in &names {
        let parsed = fs::read_to_string(dir.join(name))
            .map_err(|e| e.to_string())
            .and_then(|t| parse_snapshot(&t, Strictness::Lenient).map_err(|e| e.to_string()))
            .and_then(|s| s.validate().map(|_| s).map_err(|e| e.to_string()));
        match parsed {
            Ok(s) => snapshots.push(s),
            Err(e) => warnings.push(format!("skipped {name}: {e}")),
        }
    }
    if snapshots.is_empty() {
        return Err(AnalysisError::EmptyRun(dir.to_path_buf()));
    }

    let meta_path = dir.join(RUN_METADATA_FILE);
    let metadata = match fs::read_to_string(&meta_path) {
        Ok(text) => match parse_metadata(&text) {
            Ok(m) => Some(m),
            Err(e) => {
                warnings.push(format!("ignored {RUN_METADATA_FILE}: {e}"));
                None
            }
        },
        Err(_) => None,
    };
    let metadata = metadata.or_else(|| snapshots.iter().find_map(|s| s.metadata.clone()));
    if metadata.is_none() {
        warnings.push(format!("no {RUN_METADATA_FILE}; interval inferred from snapshot spacing"));
    }

    let mut run = ProfileRun::new(metadata, snapshots);
    run.directory = Some(dir.to_path_buf());
    Ok((run, warnings))
}
