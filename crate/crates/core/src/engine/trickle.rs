//! DIO transmission timer.
//!
//! Trickle-style: the interval starts at `i_min` and doubles after every
//! firing up to `i_min * 2^doublings`. Each firing is scheduled uniformly in
//! `[I/2, I)` after the previous one and transmits unless `k` consistent
//! DIOs were heard since. An inconsistency resets the interval to `i_min`.

use rand::Rng;

use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Redundancy {
    Limited(u32),
    Unlimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrickleConfig {
    pub i_min: SimDuration,
    pub doublings: u32,
    pub k: Redundancy,
}

impl Default for TrickleConfig {
    fn default() -> Self {
        TrickleConfig {
            i_min: SimDuration::from_secs(1),
            doublings: 8,
            k: Redundancy::Unlimited,
        }
    }
}

impl TrickleConfig {
    pub fn i_max(&self) -> SimDuration {
        let factor = 1u64.checked_shl(self.doublings).unwrap_or(u64::MAX);
        self.i_min.saturating_mul(factor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrickleState {
    config: TrickleConfig,
    interval: SimDuration,
    next_fire: Option<SimTime>,
    suppressed_count: u32,
}

impl TrickleState {
    pub fn new(config: TrickleConfig) -> Self {
        TrickleState {
            config,
            interval: config.i_min,
            next_fire: None,
            suppressed_count: 0,
        }
    }

    pub fn config(&self) -> &TrickleConfig {
        &self.config
    }

    pub fn interval(&self) -> SimDuration {
        self.interval
    }

    pub fn next_fire(&self) -> Option<SimTime> {
        self.next_fire
    }

    pub fn suppressed_count(&self) -> u32 {
        self.suppressed_count
    }

    pub fn is_armed(&self) -> bool {
        self.next_fire.is_some()
    }

    fn draw<R: Rng + ?Sized>(&self, now: SimTime, rng: &mut R) -> SimTime {
        let i = self.interval.as_nanos();
        let half = i / 2;
        let offset = if half < i {
            rng.random_range(half..i)
        } else {
            half
        };
        now + SimDuration::from_nanos(offset)
    }

    /// Arm at `i_min` unless already running at `i_min`. Returns the new
    /// fire time when the timer was (re)armed.
    pub fn reset<R: Rng + ?Sized>(&mut self, now: SimTime, rng: &mut R) -> Option<SimTime> {
        if self.is_armed() && self.interval == self.config.i_min {
            return None;
        }
        self.interval = self.config.i_min;
        self.suppressed_count = 0;
        let at = self.draw(now, rng);
        self.next_fire = Some(at);
        Some(at)
    }

    /// Handle a firing. Returns whether to transmit and the next fire time.
    pub fn fire<R: Rng + ?Sized>(&mut self, now: SimTime, rng: &mut R) -> (bool, SimTime) {
        let transmit = match self.config.k {
            Redundancy::Unlimited => true,
            Redundancy::Limited(k) => self.suppressed_count < k,
        };
        self.interval = std::cmp::min(self.interval.saturating_mul(2), self.config.i_max());
        self.suppressed_count = 0;
        let at = self.draw(now, rng);
        self.next_fire = Some(at);
        (transmit, at)
    }

    pub fn hear_consistent(&mut self) {
        self.suppressed_count = self.suppressed_count.saturating_add(1);
    }

    pub fn stop(&mut self) {
        self.next_fire = None;
    }
}
