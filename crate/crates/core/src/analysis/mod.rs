// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Post-processing over recorded runs: loading, counter deltas and derived
//! metrics, latency and overhead statistics, CSV and SVG output.

pub mod deltas;
pub mod export;
pub mod plot;
pub mod rules;
pub mod run;
pub mod stats;

use std::io;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no readable snapshots in {}", .0.display())]
    EmptyRun(PathBuf),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("target interval {target}s is shorter than the run interval {run}s")]
    TargetInterval { target: f64, run: f64 },
    #[error("{metric} unavailable: run lacks {}", missing.join(", "))]
    Unavailable { metric: String, missing: Vec<String> },
    #[error("no series selected")]
    NoSeries,
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl AnalysisError {
    /// True for errors caused by configuration rather than data or I/O.
    pub fn is_config(&self) -> bool {
        matches!(self, AnalysisError::Config(_) | AnalysisError::UnknownMetric(_))
    }
}
