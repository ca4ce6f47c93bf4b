// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

use crate::{
    AnalysisArgs, CollectArgs, DeltasArgs, LatencyArgs, Mode, OverheadArgs, PlotArgs, ProfileArgs, StatsArgs,
    UsageError, EXIT_CONFIG, EXIT_RUNTIME, EXIT_USAGE, WORKLOAD_EXIT_OFFSET,
};
use anyhow::{bail, Context, Result};
use cprof_core::analysis::export::write_csv;
use cprof_core::runner::{RunnerError, RUN_RESULT_FILE};
use cprof_core::sampler::{measure_self_latency, SAMPLER_REPORT_FILE};
use cprof_core::{
    build_runtime_invocation, compute_deltas, latency_stats, load_run, overhead_percent, profile_workload, render_plot,
    select_series, AnalysisError, Collector, CollectorConfig, ConfigError, DeltaSeries, DeploymentMode, Mount,
    PlotStyle, ProcessScope, ProfileConfig, ProfileRun, RuleSet, SamplerConfig, SamplerReport, StopSignal, SystemClock,
    Verbosity, WorkloadSpec,
};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

/// Series `plot` draws when `--metrics` is not given.
const DEFAULT_PLOT_METRICS: &[&str] = &[
    "vCpuTimeUserMode",
    "vCpuTimeKernelMode",
    "vMemoryUsed",
    "vBytesWritten",
    "vNetworkBytesRecvd",
    "vNetworkBytesSent",
];

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    let config = e.chain().any(|c| {
        c.downcast_ref::<ConfigError>().is_some()
            || matches!(c.downcast_ref::<RunnerError>(), Some(RunnerError::Config(_)))
            || c.downcast_ref::<AnalysisError>().is_some_and(AnalysisError::is_config)
    });
    if config {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

fn positive_seconds(flag: &str, v: f64) -> Result<Duration> {
    if !(v.is_finite() && v > 0.0) {
        return usage(format!("{flag} must be a positive number of seconds, got {v}"));
    }
    Ok(Duration::from_secs_f64(v))
}

fn env_path(var: &str) -> Option<PathBuf> {
    std::env::var_os(var).filter(|v| !v.is_empty()).map(PathBuf::from)
}

impl CollectArgs {
    fn verbosity(&self) -> Verbosity {
        if self.host || self.container || self.process {
            Verbosity::new(self.host, self.container, self.process)
        } else {
            Verbosity::ALL
        }
    }

    fn config(&self) -> CollectorConfig {
        let defaults = CollectorConfig::default();
        CollectorConfig {
            proc_root: self.proc_root.clone().or_else(|| env_path("CPROF_PROC_ROOT")).unwrap_or(defaults.proc_root),
            cgroup_root: self
                .cgroup_root
                .clone()
                .or_else(|| env_path("CPROF_CGROUP_ROOT"))
                .unwrap_or(defaults.cgroup_root),
            cgroup_path: self.cgroup_path.clone(),
            verbosity: self.verbosity(),
            device_filter: (!self.devices.is_empty()).then(|| self.devices.iter().cloned().collect()),
            include_loopback: self.include_loopback,
            process_scope: if self.all_processes { ProcessScope::All } else { ProcessScope::Auto },
        }
    }

    /// The same selection as flags for the in-container profiler. Roots and
    /// the cgroup path are left out: inside, the defaults are correct.
    fn forwarded(&self) -> Vec<String> {
        let v = self.verbosity();
        let mut out = Vec::new();
        for (on, flag) in [(v.host, "-v"), (v.container, "-c"), (v.process, "-p")] {
            if on {
                out.push(flag.to_string());
            }
        }
        if self.include_loopback {
            out.push("--include-loopback".into());
        }
        for d in &self.devices {
            out.extend(["--device".to_string(), d.clone()]);
        }
        if self.all_processes {
            out.push("--all-processes".into());
        }
        out
    }
}

fn parse_mount(spec: &str) -> Result<Mount> {
    let parts: Vec<&str> = spec.split(':').collect();
    let (host, container, read_only) = match parts.as_slice() {
        [h, c] => (h, c, false),
        [h, c, "ro"] => (h, c, true),
        [h, c, "rw"] => (h, c, false),
        _ => return usage(format!("--mount expects HOST:CONTAINER[:ro], got {spec:?}")),
    };
    if host.is_empty() || container.is_empty() {
        return usage(format!("--mount expects HOST:CONTAINER[:ro], got {spec:?}"));
    }
    Ok(Mount { host: PathBuf::from(host), container: PathBuf::from(container), read_only })
}

/// `p` made absolute against the current directory, without `.` components.
fn absolute(p: &Path) -> Result<PathBuf> {
    let full =
        if p.is_absolute() { p.to_path_buf() } else { std::env::current_dir().context("current directory")?.join(p) };
    Ok(full.components().filter(|c| !matches!(c, std::path::Component::CurDir)).collect())
}

fn workload_spec(a: &ProfileArgs) -> Result<WorkloadSpec> {
    if a.command.is_empty() {
        return usage("profile needs a workload command after `--`");
    }
    let mut spec = match &a.image {
        Some(image) => WorkloadSpec::in_image(image, a.command.clone()),
        None => {
            if a.data.is_some() || !a.mounts.is_empty() || a.name.is_some() || a.mode == Mode::Inside {
                return usage("--data, --mount, --name and --mode inside need --image");
            }
            WorkloadSpec::command(a.command.clone())
        }
    };
    spec.runtime = a.runtime.clone();
    spec.container_name = a.name.clone();
    if let Some(d) = &a.data {
        spec.data_mount = Some(Mount::data(absolute(d)?));
    }
    for m in &a.mounts {
        spec.extra_mounts.push(parse_mount(m)?);
    }
    for kv in &a.env {
        match kv.split_once('=') {
            Some((k, v)) if !k.is_empty() => spec.environment.push((k.to_string(), v.to_string())),
            _ => return usage(format!("--env expects KEY=VALUE, got {kv:?}")),
        }
    }
    Ok(spec)
}

fn default_run_dir() -> PathBuf {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    PathBuf::from(format!("cprof-run-{secs}"))
}

/// Maps a workload's exit to the profiler's: 0 stays 0, a nonzero code `n`
/// becomes `100 + n` (capped at 255), death by signal becomes 255.
pub fn workload_exit_status(exit_code: Option<i32>, signal: Option<i32>) -> u8 {
    match (exit_code, signal) {
        (Some(0), _) => 0,
        (Some(n), _) => (WORKLOAD_EXIT_OFFSET as i32 + n.clamp(0, 155)) as u8,
        _ => 255,
    }
}

pub fn profile(a: ProfileArgs) -> Result<u8> {
    let interval = positive_seconds("--interval", a.interval)?;
    let max_duration = a.max_duration.map(|d| positive_seconds("--max-duration", d)).transpose()?;
    let spec = workload_spec(&a)?;
    let mode = match a.mode {
        Mode::Inside => DeploymentMode::Inside,
        Mode::Outside => DeploymentMode::Outside,
    };
    let run_dir = absolute(&a.out.clone().unwrap_or_else(default_run_dir))?;
    let mut profiler_args = a.collect.forwarded();
    profiler_args.extend(["--interval".to_string(), a.interval.to_string()]);
    if let Some(d) = a.max_duration {
        profiler_args.extend(["--max-duration".to_string(), d.to_string()]);
    }
    let profiler_exe = std::env::current_exe().ok();

    if a.dry_run {
        if spec.container_image.is_none() {
            return usage("--dry-run needs --image");
        }
        let spec = match (mode, &profiler_exe) {
            (DeploymentMode::Inside, Some(exe)) => {
                let mut s = spec.clone();
                s.data_mount.get_or_insert_with(|| Mount::data(&run_dir));
                s.wrapped_in_profiler(exe, &profiler_args)
            }
            _ => spec,
        };
        println!("{}", build_runtime_invocation(&spec)?.join(" "));
        return Ok(0);
    }

    let cfg = ProfileConfig {
        collector: a.collect.config(),
        sampler: SamplerConfig { interval, max_duration, max_samples: None },
        run_dir,
        mode,
        profiler_exe,
        profiler_args,
    };
    let stop = StopSignal::new();
    let on_signal = stop.clone();
    ctrlc::set_handler(move || on_signal.trigger()).context("installing the interrupt handler")?;
    if let Some(d) = max_duration {
        let timer = stop.clone();
        std::thread::spawn(move || {
            if !timer.wait_timeout(d) {
                timer.trigger();
            }
        });
    }

    let (result, report) = profile_workload(&spec, &cfg, &stop)?;
    let outcome = match (result.exit_code, result.signal) {
        (Some(c), _) => format!("exit code {c}"),
        (_, Some(s)) => format!("signal {s}"),
        _ => "unknown status".to_string(),
    };
    eprintln!(
        "cprof: workload finished with {outcome} after {:.3} s; {} snapshots in {}",
        result.wall_time_seconds,
        report.as_ref().map_or(result.samples_written, |r| r.samples_written),
        result.run_directory.display()
    );
    if let Some(r) = report.filter(|r| r.overruns > 0) {
        eprintln!("cprof: {} of {} ticks overran the interval", r.overruns, r.samples_written);
    }
    Ok(workload_exit_status(result.exit_code, result.signal))
}

pub fn snapshot(a: CollectArgs) -> Result<()> {
    let mut collector = Collector::new(a.config())?;
    let snap = collector.collect_snapshot(&SystemClock);
    for (what, n) in collector.take_warnings() {
        eprintln!("warning: {what} ({n}x)");
    }
    let mut out = io::stdout().lock();
    out.write_all(cprof_core::serialize_snapshot(&snap).as_bytes())?;
    Ok(())
}

pub fn selftest_latency(a: LatencyArgs) -> Result<()> {
    if a.count == 0 {
        return usage("-n must be at least 1");
    }
    let threshold = positive_seconds("--threshold", a.threshold)?;
    let mut collector = Collector::new(a.collect.config())?;
    let stats = measure_self_latency(&mut collector, &SystemClock, a.count, threshold.as_nanos() as u64)?;
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}

fn load(run: &Path) -> Result<ProfileRun> {
    let (run, warnings) = load_run(run)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(run)
}

fn series(a: &AnalysisArgs, run: &ProfileRun, default_metrics: &[&str]) -> Result<Vec<DeltaSeries>> {
    let rules = match &a.config {
        Some(path) => RuleSet::load(path)?,
        None => RuleSet::defaults(),
    };
    let target = match a.target_interval {
        Some(t) => positive_seconds("--target-interval", t)?.as_secs_f64(),
        None => run.interval_seconds(),
    };
    let all = compute_deltas(run, &rules, target)?;
    if !a.metrics.is_empty() {
        let picked = select_series(&all, &a.metrics);
        if let Some(missing) = a.metrics.iter().find(|m| !picked.iter().any(|s| &s.metric == *m || &s.label() == *m)) {
            bail!("no series named {missing} in {}", a.run.display());
        }
        return Ok(picked);
    }
    if default_metrics.is_empty() {
        return Ok(all);
    }
    let names: Vec<String> = default_metrics.iter().map(|m| m.to_string()).collect();
    Ok(select_series(&all, &names))
}

pub fn deltas(a: DeltasArgs) -> Result<()> {
    let run = load(&a.analysis.run)?;
    let series = series(&a.analysis, &run, &[])?;
    match &a.out {
        Some(path) => cprof_core::export_csv(&series, path)?,
        None => write_csv(&series, io::stdout().lock())?,
    }
    Ok(())
}

pub fn plot(a: PlotArgs) -> Result<()> {
    let run = load(&a.analysis.run)?;
    let series = series(&a.analysis, &run, DEFAULT_PLOT_METRICS)?;
    let style = match &a.style {
        Some(path) => PlotStyle::load(path)?,
        None => PlotStyle::default(),
    };
    let out = a.out.clone().unwrap_or_else(|| a.analysis.run.join("plot.svg"));
    render_plot(&series, &out, &style)?;
    eprintln!("cprof: wrote {} ({} series)", out.display(), series.len());
    Ok(())
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let threshold = positive_seconds("--threshold", a.threshold)?.as_nanos() as u64;
    let report_path = a.run.join(SAMPLER_REPORT_FILE);
    let report: Option<SamplerReport> = match fs::read_to_string(&report_path) {
        Ok(text) => Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", report_path.display()))?),
        Err(_) => None,
    };
    let (source, latencies, samples, overruns) = match &report {
        Some(r) => ("sampler-report", r.latencies_ns.clone(), r.samples_written, Some(r.overruns)),
        None => {
            let run = load(&a.run)?;
            ("snapshots", run.latencies_ns(), run.snapshots.len() as u64, None)
        }
    };
    let wall = fs::read_to_string(a.run.join(RUN_RESULT_FILE))
        .ok()
        .and_then(|t| serde_json::from_str::<cprof_core::RunResult>(&t).ok())
        .map(|r| r.wall_time_seconds);
    // latencySource: `sampler-report`, or `snapshots` (per-snapshot collection durations)
    let stats = serde_json::json!({
        "latencySource": source,
        "samples": samples,
        "overruns": overruns,
        "workloadWallTimeSeconds": wall,
        "collectionLatency": latency_stats(&latencies, threshold)?,
    });
    let mut text = serde_json::to_string_pretty(&stats)?;
    text.push('\n');
    let path = a.run.join("stats.json");
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    print!("{text}");
    Ok(())
}

pub fn overhead(a: OverheadArgs) -> Result<()> {
    let r = overhead_percent(&a.baseline, &a.profiled)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}
