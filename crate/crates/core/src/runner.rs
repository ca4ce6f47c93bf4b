// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Runs a workload while the sampler records it.
//!
//! The sampler is started first and the workload is only spawned once the
//! first snapshot is on disk; the sampler is stopped as soon as the
//! workload exits. Containerized workloads go through the container
//! runtime's command line (`docker run ...` by default), built by
//! [`build_runtime_invocation`] without executing anything.

use crate::clock::{clock_ticks_per_second, monotonic_now_ns, StopSignal, SystemClock};
use crate::collector::{Collector, CollectorConfig, ConfigError};
use crate::sampler::{sample_to_directory, Sampler, SamplerConfig, SamplerError, SamplerReport};
use crate::snapshot::{RunMetadata, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus};
use std::sync::{mpsc, Arc, Mutex};
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};
use thiserror::Error;

pub const RUN_RESULT_FILE: &str = "run_result.json";
/// Where the profiler binary is mounted inside the container.
pub const IN_CONTAINER_PROFILER: &str = "/opt/cprof/cprof";
pub const DEFAULT_DATA_DIR: &str = "/data";
/// Linux block-layer sector size used by /proc/diskstats.
pub const SECTOR_SIZE_BYTES: u64 = 512;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("workload command is empty")]
    EmptyCommand,
    #[error("dry-run invocation requires a container image")]
    NotContainerized,
    #[error("inside-container mode needs the profiler executable path")]
    MissingProfiler,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("failed to launch `{invocation}`: {source}")]
    Spawn {
        invocation: String,
        #[source]
        source: io::Error,
    },
    #[error("waiting for workload: {0}")]
    Wait(#[source] io::Error),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("sampler thread panicked")]
    SamplerPanicked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mount {
    pub host: PathBuf,
    pub container: PathBuf,
    #[serde(default)]
    pub read_only: bool,
}

impl Mount {
    pub fn data(host: impl Into<PathBuf>) -> Self {
        Mount { host: host.into(), container: PathBuf::from(DEFAULT_DATA_DIR), read_only: false }
    }

    fn volume_arg(&self) -> String {
        let mut s = format!("{}:{}", self.host.display(), self.container.display());
        if self.read_only {
            s.push_str(":ro");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub command: Vec<String>,
    pub container_image: Option<String>,
    pub data_mount: Option<Mount>,
    pub environment: Vec<(String, String)>,
    /// Container runtime binary.
    pub runtime: String,
    pub container_name: Option<String>,
    pub extra_mounts: Vec<Mount>,
}

impl WorkloadSpec {
    pub fn command(command: Vec<String>) -> Self {
        WorkloadSpec {
            command,
            container_image: None,
            data_mount: None,
            environment: Vec::new(),
            runtime: "docker".to_string(),
            container_name: None,
            extra_mounts: Vec::new(),
        }
    }

    pub fn in_image(image: impl Into<String>, command: Vec<String>) -> Self {
        WorkloadSpec { container_image: Some(image.into()), ..Self::command(command) }
    }

    /// The same workload with the profiler mounted into the container and
    /// wrapping the original command, writing its run under the data mount.
    pub fn wrapped_in_profiler(&self, profiler: &Path, profiler_args: &[String]) -> WorkloadSpec {
        let mut spec = self.clone();
        spec.extra_mounts.push(Mount {
            host: profiler.to_path_buf(),
            container: PathBuf::from(IN_CONTAINER_PROFILER),
            read_only: true,
        });
        let data =
            spec.data_mount.as_ref().map(|m| m.container.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR));
        let mut cmd = vec![
            IN_CONTAINER_PROFILER.to_string(),
            "profile".to_string(),
            "--out".to_string(),
            data.display().to_string(),
        ];
        cmd.extend(profiler_args.iter().cloned());
        cmd.push("--".to_string());
        cmd.extend(self.command.iter().cloned());
        spec.command = cmd;
        spec
    }
}

/// Container runtime argument vector for a containerized spec.
///
/// Pure: the same spec always yields the same vector and nothing runs.
pub fn build_runtime_invocation(spec: &WorkloadSpec) -> Result<Vec<String>, RunnerError> {
    let image = spec.container_image.as_ref().ok_or(RunnerError::NotContainerized)?;
    if spec.command.is_empty() {
        return Err(RunnerError::EmptyCommand);
    }
    let mut argv = vec![spec.runtime.clone(), "run".to_string(), "--rm".to_string()];
    if let Some(name) = &spec.container_name {
        argv.push("--name".to_string());
        argv.push(name.clone());
    }
    for m in spec.data_mount.iter().chain(&spec.extra_mounts) {
        argv.push("-v".to_string());
        argv.push(m.volume_arg());
    }
    for (k, v) in &spec.environment {
        argv.push("-e".to_string());
        argv.push(format!("{k}={v}"));
    }
    argv.push(image.clone());
    argv.extend(spec.command.iter().cloned());
    Ok(argv)
}

/// Where the sampler runs relative to a containerized workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeploymentMode {
    /// The profiler binary runs inside the workload container and writes to
    /// the data mount.
    Inside,
    /// The profiler samples from the host; container metrics need an
    /// explicit cgroup path.
    #[default]
    Outside,
}

#[derive(Debug, Clone)]
pub struct ProfileConfig {
    pub collector: CollectorConfig,
    pub sampler: SamplerConfig,
    pub run_dir: PathBuf,
    pub mode: DeploymentMode,
    /// Needed for [`DeploymentMode::Inside`] with a container image.
    pub profiler_exe: Option<PathBuf>,
    /// Flags forwarded to the in-container profiler.
    pub profiler_args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunResult {
    pub invocation: Vec<String>,
    pub exit_code: Option<i32>,
    pub signal: Option<i32>,
    pub success: bool,
    pub wall_time_seconds: f64,
    pub run_directory: PathBuf,
    pub workload_start_ns: u64,
    pub workload_exit_ns: u64,
    pub samples_written: u64,
}

fn describe(argv: &[String]) -> String {
    argv.join(" ")
}

fn spawn(argv: &[String], env: &[(String, String)]) -> Result<Child, RunnerError> {
    Command::new(&argv[0])
        .args(&argv[1..])
        .envs(env.iter().map(|(k, v)| (k, v)))
        .spawn()
        .map_err(|source| RunnerError::Spawn { invocation: describe(argv), source })
}

/// Blocks until the child exits, killing it if `external_stop` fires first.
///
/// The exit is observed with `WNOWAIT`, so the child stays an unreaped
/// zombie until the killer thread has been told it is gone; its pid cannot
/// be recycled under a late kill.
fn wait(child: &mut Child, external_stop: &StopSignal) -> Result<ExitStatus, RunnerError> {
    let pid = child.id() as libc::pid_t;
    let exited = Arc::new(Mutex::new(false));
    let (stop, flag) = (external_stop.clone(), exited.clone());
    // Detached so a normal exit is never held up by it; it notices the exit
    // on its next wake-up.
    thread::spawn(move || loop {
        let stopped = stop.wait_timeout(Duration::from_millis(250));
        let exited = flag.lock().unwrap();
        if *exited {
            return;
        }
        if stopped {
            // SAFETY: plain syscall; the pid is our still-unreaped child.
            unsafe { libc::kill(pid, libc::SIGKILL) };
            return;
        }
    });
    let observed = wait_exit_no_reap(pid);
    *exited.lock().unwrap() = true;
    observed.map_err(RunnerError::Wait)?;
    child.wait().map_err(RunnerError::Wait)
}

fn wait_exit_no_reap(pid: libc::pid_t) -> io::Result<()> {
    loop {
        // SAFETY: siginfo_t is plain data and is only written by the kernel.
        let mut info: libc::siginfo_t = unsafe { std::mem::zeroed() };
        let rc = unsafe { libc::waitid(libc::P_PID, pid as libc::id_t, &mut info, libc::WEXITED | libc::WNOWAIT) };
        if rc == 0 {
            return Ok(());
        }
        let err = io::Error::last_os_error();
        if err.kind() != io::ErrorKind::Interrupted {
            return Err(err);
        }
    }
}

fn status_parts(status: ExitStatus) -> (Option<i32>, Option<i32>) {
    #[cfg(unix)]
    {
        use std::os::unix::process::ExitStatusExt;
        (status.code(), status.signal())
    }
    #[cfg(not(unix))]
    {
        (status.code(), None)
    }
}

fn write_result(dir: &Path, result: &RunResult) -> Result<(), RunnerError> {
    let path = dir.join(RUN_RESULT_FILE);
    let mut text = serde_json::to_string_pretty(result).expect("run result serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|source| RunnerError::Write { path, source })
}

fn epoch_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Runs the workload to completion under the sampler and writes
/// `run_result.json` into the run directory.
///
/// A nonzero workload exit is reported in the result, not as an error.
/// Triggering `external_stop` kills the workload and ends the run.
pub fn profile_workload(
    spec: &WorkloadSpec,
    cfg: &ProfileConfig,
    external_stop: &StopSignal,
) -> Result<(RunResult, Option<SamplerReport>), RunnerError> {
    if spec.command.is_empty() {
        return Err(RunnerError::EmptyCommand);
    }
    fs::create_dir_all(&cfg.run_dir).map_err(|source| RunnerError::Write { path: cfg.run_dir.clone(), source })?;

    if spec.container_image.is_some() && cfg.mode == DeploymentMode::Inside {
        return profile_inside(spec, cfg, external_stop).map(|r| (r, None));
    }

    let (argv, env) = match spec.container_image {
        Some(_) => (build_runtime_invocation(spec)?, Vec::new()),
        None => (spec.command.clone(), spec.environment.clone()),
    };
    let mut collector = Collector::new(cfg.collector.clone())?;
    let metadata = RunMetadata {
        schema_version: SCHEMA_VERSION,
        interval_seconds: cfg.sampler.interval.as_secs_f64(),
        verbosity: cfg.collector.verbosity,
        clock_ticks_per_second: clock_ticks_per_second(),
        sector_size_bytes: SECTOR_SIZE_BYTES,
        start_wall_clock: epoch_seconds(),
        workload_command: describe(&argv),
        output_directory: cfg.run_dir.clone(),
    };
    let sampler_stop = StopSignal::new();

    let outcome = thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<u64>();
        let stop = sampler_stop.clone();
        let sampler_cfg = cfg.sampler.clone();
        let run_dir = cfg.run_dir.clone();
        let metadata = &metadata;
        let handle = scope.spawn(move || {
            let clock = SystemClock;
            let sampler = Sampler::new(sampler_cfg, &clock, stop)?;
            sample_to_directory(&run_dir, metadata, &sampler, &mut collector, &mut |n| {
                let _ = tx.send(n);
            })
        });

        // Either the first snapshot is written or the sampler already
        // finished (error or zero-length run); both release the workload.
        let _ = rx.recv();

        let start_ns = monotonic_now_ns();
        let workload = spawn(&argv, &env).and_then(|mut child| wait(&mut child, external_stop));
        let exit_ns = monotonic_now_ns();
        sampler_stop.trigger();
        let report = handle.join().map_err(|_| RunnerError::SamplerPanicked)?;
        let status = workload?;
        let report = report?;
        Ok::<_, RunnerError>((status, report, start_ns, exit_ns))
    });
    let (status, report, start_ns, exit_ns) = outcome?;

    let (exit_code, signal) = status_parts(status);
    let result = RunResult {
        invocation: argv,
        exit_code,
        signal,
        success: status.success(),
        wall_time_seconds: (exit_ns - start_ns) as f64 / 1e9,
        run_directory: cfg.run_dir.clone(),
        workload_start_ns: start_ns,
        workload_exit_ns: exit_ns,
        samples_written: report.samples_written,
    };
    write_result(&cfg.run_dir, &result)?;
    Ok((result, Some(report)))
}

fn profile_inside(
    spec: &WorkloadSpec,
    cfg: &ProfileConfig,
    external_stop: &StopSignal,
) -> Result<RunResult, RunnerError> {
    let exe = cfg.profiler_exe.as_ref().ok_or(RunnerError::MissingProfiler)?;
    let mut spec = spec.clone();
    if spec.data_mount.is_none() {
        spec.data_mount = Some(Mount::data(&cfg.run_dir));
    }
    let argv = build_runtime_invocation(&spec.wrapped_in_profiler(exe, &cfg.profiler_args))?;
    let start_ns = monotonic_now_ns();
    let mut child = spawn(&argv, &[])?;
    let status = wait(&mut child, external_stop)?;
    let exit_ns = monotonic_now_ns();
    let (exit_code, signal) = status_parts(status);
    let result = RunResult {
        invocation: argv,
        exit_code,
        signal,
        success: status.success(),
        wall_time_seconds: (exit_ns - start_ns) as f64 / 1e9,
        run_directory: cfg.run_dir.clone(),
        workload_start_ns: start_ns,
        workload_exit_ns: exit_ns,
        samples_written: 0,
    };
    write_result(&cfg.run_dir, &result)?;
    Ok(result)
}
