// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Low-overhead host, container and process resource profiling.
//!
//! [`collector`] reads procfs and cgroup v1 accounting into [`Snapshot`]s,
//! [`sampler`] writes them on a drift-free fixed interval, [`runner`] wraps
//! a workload with the sampler, and [`analysis`] turns a recorded run into
//! deltas, derived metrics, statistics, CSV and SVG.

pub mod analysis;
pub mod catalog;
pub mod clock;
pub mod collector;
pub mod parsers;
pub mod runner;
pub mod sampler;
pub mod snapshot;

pub use analysis::deltas::{compute_deltas, derive_metric, select_series, DeltaPoint, DeltaSeries};
pub use analysis::export::export_csv;
pub use analysis::plot::{render_plot, PlotStyle};
pub use analysis::rules::{DeltaRule, Method, RuleSet};
pub use analysis::run::{load_run, ProfileRun};
pub use analysis::stats::{latency_stats, overhead_percent, CollectionLatencyStats, OverheadResult};
pub use analysis::AnalysisError;
pub use catalog::{catalog, lookup, Category, Level, MetricDescriptor, MetricKind, Unit};
pub use clock::{Clock, FakeClock, StopSignal, SystemClock};
pub use collector::{Collector, CollectorConfig, ConfigError, ProcessScope};
pub use runner::{
    build_runtime_invocation, profile_workload, DeploymentMode, Mount, ProfileConfig, RunResult, WorkloadSpec,
};
pub use sampler::{Sampler, SamplerConfig, SamplerReport, StopReason};
pub use snapshot::{
    parse_snapshot, serialize_snapshot, ContainerMetrics, HostMetrics, ProcessMetrics, RunMetadata, Scalar, Snapshot,
    Strictness, Verbosity,
};
