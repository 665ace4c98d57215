//! Deterministic discrete-event simulator for RPL in modes of operation
//! 0 (no downward routes), 1 (non-storing) and 2 (storing).
//!
//! The per-node protocol engine in [`engine`] is free of I/O; the
//! [`simulator`] owns time, links and randomness and feeds it events.

pub mod addressing;
pub mod cli;
pub mod dump;
pub mod engine;
pub mod forwarding;
pub mod messages;
pub mod scenario;
pub mod simulator;
pub mod time;
pub mod trace;

#[cfg(test)]
mod testutil;
