//! Time sources for event timestamps.

use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, Duration, Utc};

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

/// Wall-clock UTC time.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Deterministic clock: every call advances a fixed step from a start instant.
#[derive(Debug)]
pub struct StepClock {
    start: DateTime<Utc>,
    step_ms: i64,
    ticks: AtomicI64,
}

impl StepClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        StepClock {
            start,
            step_ms: step.num_milliseconds(),
            ticks: AtomicI64::new(0),
        }
    }

    /// Starts at the Unix epoch and ticks one second per call.
    pub fn epoch() -> Self {
        StepClock::new(DateTime::<Utc>::UNIX_EPOCH, Duration::seconds(1))
    }
}

impl Clock for StepClock {
    fn now(&self) -> DateTime<Utc> {
        let n = self.ticks.fetch_add(1, Ordering::Relaxed);
        self.start + Duration::milliseconds(self.step_ms * n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_clock_is_monotone() {
        let c = StepClock::epoch();
        let a = c.now();
        let b = c.now();
        assert_eq!((b - a).num_seconds(), 1);
        assert_eq!(a, DateTime::<Utc>::UNIX_EPOCH);
    }
}
