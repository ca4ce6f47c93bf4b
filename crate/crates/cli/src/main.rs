// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! `cprof`: sample host, container and process resource usage around a
//! workload, then turn the recorded run into deltas, plots and statistics.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status for a malformed command line.
pub const EXIT_USAGE: u8 = 2;
/// Exit status for an invalid configuration file or unsupported host layout.
pub const EXIT_CONFIG: u8 = 3;
/// Exit status for any other failure of the profiler itself.
pub const EXIT_RUNTIME: u8 = 1;
/// `profile` exits with this plus the workload's nonzero exit code.
pub const WORKLOAD_EXIT_OFFSET: u8 = 100;

#[derive(Debug, Parser)]
#[command(name = "cprof", version, about = "Low-overhead host, container and process resource profiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a workload under the sampler and record a run directory.
    Profile(ProfileArgs),
    /// Print one snapshot to stdout.
    Snapshot(CollectArgs),
    /// Measure back-to-back collection latency without writing anything.
    SelftestLatency(LatencyArgs),
    /// Compute per-interval deltas over a run and write them as CSV.
    Deltas(DeltasArgs),
    /// Render selected delta series of a run as SVG.
    Plot(PlotArgs),
    /// Collection-latency statistics of a run; also written to RUN/stats.json.
    Stats(StatsArgs),
    /// Percent runtime overhead of profiled runs over baseline runs.
    Overhead(OverheadArgs),
}

/// What to collect and where to read it from.
#[derive(Debug, Clone, Args)]
struct CollectArgs {
    /// Collect host (VM) metrics.
    #[arg(short = 'v', long = "host")]
    host: bool,
    /// Collect container (cgroup) metrics.
    #[arg(short = 'c', long = "container")]
    container: bool,
    /// Collect per-process metrics. Without -v/-c/-p all three are collected.
    #[arg(short = 'p', long = "process")]
    process: bool,
    /// Workload cgroup below each controller, e.g. docker/<id>. Defaults to the controller roots.
    #[arg(long, value_name = "PATH")]
    cgroup_path: Option<PathBuf>,
    /// Count the loopback interface in network totals.
    #[arg(long)]
    include_loopback: bool,
    /// Only sum these block devices (repeatable). Default: whole physical disks.
    #[arg(long = "device", value_name = "NAME")]
    devices: Vec<String>,
    /// Sample every pid on the host instead of the cgroup's members.
    #[arg(long)]
    all_processes: bool,
    /// procfs root [env: CPROF_PROC_ROOT] [default: /proc]
    #[arg(long, value_name = "DIR")]
    proc_root: Option<PathBuf>,
    /// cgroup v1 hierarchy root [env: CPROF_CGROUP_ROOT] [default: /sys/fs/cgroup]
    #[arg(long, value_name = "DIR")]
    cgroup_root: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Sample from the host, outside any container.
    Outside,
    /// Run the profiler inside the container, wrapping the command.
    Inside,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[command(flatten)]
    collect: CollectArgs,
    /// Seconds between snapshots.
    #[arg(long, default_value_t = 1.0, value_name = "SECONDS")]
    interval: f64,
    /// Run directory. Default: ./cprof-run-<unix seconds>.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Stop sampling (and the workload) after this many seconds.
    #[arg(long, value_name = "SECONDS")]
    max_duration: Option<f64>,
    /// Run the command in this container image.
    #[arg(long)]
    image: Option<String>,
    /// Host directory mounted at /data in the container.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// Extra bind mount HOST:CONTAINER[:ro] (repeatable).
    #[arg(long = "mount", value_name = "SPEC")]
    mounts: Vec<String>,
    /// Environment variable KEY=VALUE for the workload (repeatable).
    #[arg(long = "env", value_name = "KEY=VALUE")]
    env: Vec<String>,
    /// Container runtime binary.
    #[arg(long, default_value = "docker")]
    runtime: String,
    /// Container name.
    #[arg(long)]
    name: Option<String>,
    /// Where the sampler runs for --image workloads.
    #[arg(long, value_enum, default_value_t = Mode::Outside)]
    mode: Mode,
    /// Print the container runtime invocation and exit without running it.
    #[arg(long)]
    dry_run: bool,
    /// The workload command.
    #[arg(last = true, value_name = "COMMAND")]
    command: Vec<String>,
}

#[derive(Debug, Args)]
struct LatencyArgs {
    #[command(flatten)]
    collect: CollectArgs,
    /// Number of collections.
    #[arg(short = 'n', long, default_value_t = 100)]
    count: usize,
    /// Report the fraction of collections faster than this many seconds.
    #[arg(long, default_value_t = 1.0, value_name = "SECONDS")]
    threshold: f64,
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    /// Run directory written by `profile`.
    run: PathBuf,
    /// Bucket width in seconds; at least the run's interval. Default: the run's interval.
    #[arg(long, value_name = "SECONDS")]
    target_interval: Option<f64>,
    /// Delta rules (INI) overriding the defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Only these series (metric names or metric/pid labels), comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    metrics: Vec<String>,
}

#[derive(Debug, Args)]
struct DeltasArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    /// CSV destination. Default: stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    /// SVG destination. Default: RUN/plot.svg.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Plot style (INI).
    #[arg(long, value_name = "FILE")]
    style: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Run directory written by `profile`.
    run: PathBuf,
    /// Report the fraction of collections faster than this many seconds.
    #[arg(long, default_value_t = 1.0, value_name = "SECONDS")]
    threshold: f64,
}

#[derive(Debug, Args)]
struct OverheadArgs {
    /// Runtimes in seconds without profiling, comma-separated or repeated.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1.., value_name = "SECONDS")]
    baseline: Vec<f64>,
    /// Runtimes in seconds with profiling, comma-separated or repeated.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1.., value_name = "SECONDS")]
    profiled: Vec<f64>,
}

/// A command line that parsed but cannot be acted on.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Profile(a) => commands::profile(a),
        Command::Snapshot(a) => commands::snapshot(a).map(|_| 0),
        Command::SelftestLatency(a) => commands::selftest_latency(a).map(|_| 0),
        Command::Deltas(a) => commands::deltas(a).map(|_| 0),
        Command::Plot(a) => commands::plot(a).map(|_| 0),
        Command::Stats(a) => commands::stats(a).map(|_| 0),
        Command::Overhead(a) => commands::overhead(a).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cprof: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
