// Copyright (c) 2026 The cprof Authors
//
// SPDX-License-Identifier: Apache-2.0
//

//! Time sources and the cross-thread stop signal.

use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

/// A source of monotonic and wall-clock time that can also sleep.
///
/// The sampler and collector only ever observe time through this trait, so
/// tests can drive them with [`FakeClock`].
pub trait Clock: Send + Sync {
    /// Nanoseconds on a monotonic clock with an unspecified origin.
    fn monotonic_ns(&self) -> u64;

    /// Nanoseconds since the Unix epoch.
    fn wall_ns(&self) -> u128;

    /// Block until `monotonic_ns() >= deadline_ns` or until `stop` fires.
    fn sleep_until(&self, deadline_ns: u64, stop: &StopSignal);
}

/// `CLOCK_MONOTONIC` plus the system wall clock.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn monotonic_ns(&self) -> u64 {
        monotonic_now_ns()
    }

    fn wall_ns(&self) -> u128 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0)
    }

    fn sleep_until(&self, deadline_ns: u64, stop: &StopSignal) {
        loop {
            let now = self.monotonic_ns();
            if now >= deadline_ns || stop.wait_timeout(Duration::from_nanos(deadline_ns - now)) {
                return;
            }
        }
    }
}

/// Nanoseconds since boot on `CLOCK_MONOTONIC`; comparable across processes.
pub fn monotonic_now_ns() -> u64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec and CLOCK_MONOTONIC is
    // always supported on Linux.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_MONOTONIC, &mut ts) };
    debug_assert_eq!(rc, 0);
    ts.tv_sec as u64 * 1_000_000_000 + ts.tv_nsec as u64
}

/// Kernel clock-tick rate (`USER_HZ`) that scales clock-tick counters.
pub fn clock_ticks_per_second() -> u64 {
    // SAFETY: sysconf has no memory-safety preconditions.
    let v = unsafe { libc::sysconf(libc::_SC_CLK_TCK) };
    if v > 0 {
        v as u64
    } else {
        100
    }
}

/// Deterministic clock for tests.
///
/// Time only moves when something asks it to: `sleep_until` jumps to the
/// deadline, `advance` moves it by an explicit amount, and an optional
/// per-read step advances it every time `monotonic_ns` is called. All
/// sleeps are recorded.
#[derive(Debug)]
pub struct FakeClock {
    state: Mutex<FakeState>,
    wall_origin_ns: u128,
    read_step_ns: u64,
}

#[derive(Debug, Default)]
struct FakeState {
    now_ns: u64,
    sleeps: Vec<u64>,
}

impl FakeClock {
    pub fn new(start_ns: u64, wall_origin_ns: u128) -> Self {
        Self::with_read_step(start_ns, wall_origin_ns, 0)
    }

    /// Every `monotonic_ns` read returns the current time and then advances
    /// it by `step_ns`.
    pub fn with_read_step(start_ns: u64, wall_origin_ns: u128, step_ns: u64) -> Self {
        FakeClock {
            state: Mutex::new(FakeState { now_ns: start_ns, sleeps: Vec::new() }),
            wall_origin_ns,
            read_step_ns: step_ns,
        }
    }

    pub fn advance(&self, ns: u64) {
        self.state.lock().unwrap().now_ns += ns;
    }

    pub fn now(&self) -> u64 {
        self.state.lock().unwrap().now_ns
    }

    /// Durations requested by every `sleep_until` call, zero included.
    pub fn sleeps(&self) -> Vec<u64> {
        self.state.lock().unwrap().sleeps.clone()
    }
}

impl Clock for FakeClock {
    fn monotonic_ns(&self) -> u64 {
        let mut st = self.state.lock().unwrap();
        let now = st.now_ns;
        st.now_ns += self.read_step_ns;
        now
    }

    fn wall_ns(&self) -> u128 {
        self.wall_origin_ns + self.state.lock().unwrap().now_ns as u128
    }

    fn sleep_until(&self, deadline_ns: u64, _stop: &StopSignal) {
        let mut st = self.state.lock().unwrap();
        let slept = deadline_ns.saturating_sub(st.now_ns);
        st.sleeps.push(slept);
        st.now_ns = st.now_ns.max(deadline_ns);
    }
}

/// One-shot stop flag that can be triggered from any thread and waited on.
#[derive(Debug, Clone, Default)]
pub struct StopSignal {
    inner: Arc<(Mutex<bool>, Condvar)>,
}

impl StopSignal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn trigger(&self) {
        let (lock, cv) = &*self.inner;
        *lock.lock().unwrap() = true;
        cv.notify_all();
    }

    pub fn is_triggered(&self) -> bool {
        *self.inner.0.lock().unwrap()
    }

    /// Waits up to `timeout`; returns whether the signal has fired.
    pub fn wait_timeout(&self, timeout: Duration) -> bool {
        let (lock, cv) = &*self.inner;
        let guard = lock.lock().unwrap();
        let (guard, _) = cv.wait_timeout_while(guard, timeout, |stopped| !*stopped).unwrap();
        *guard
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::thread;
    use std::time::Instant;

    #[test]
    fn fake_clock_sleeps_jump() {
        let c = FakeClock::new(100, 0);
        let stop = StopSignal::new();
        c.sleep_until(250, &stop);
        assert_eq!(c.now(), 250);
        c.sleep_until(200, &stop);
        assert_eq!(c.now(), 250);
        assert_eq!(c.sleeps(), vec![150, 0]);
    }

    #[test]
    fn read_step_advances() {
        let c = FakeClock::with_read_step(0, 10, 5);
        assert_eq!(c.monotonic_ns(), 0);
        assert_eq!(c.monotonic_ns(), 5);
        assert_eq!(c.wall_ns(), 20);
    }

    #[test]
    fn stop_interrupts_system_sleep() {
        let stop = StopSignal::new();
        let s2 = stop.clone();
        let start = Instant::now();
        let h = thread::spawn(move || {
            thread::sleep(Duration::from_millis(50));
            s2.trigger();
        });
        let clock = SystemClock;
        clock.sleep_until(clock.monotonic_ns() + 10_000_000_000, &stop);
        h.join().unwrap();
        assert!(start.elapsed() < Duration::from_secs(5));
        assert!(stop.is_triggered());
    }

    #[test]
    fn system_clock_is_monotonic() {
        let a = monotonic_now_ns();
        let b = monotonic_now_ns();
        assert!(b >= a);
        assert!(clock_ticks_per_second() > 0);
    }
}
