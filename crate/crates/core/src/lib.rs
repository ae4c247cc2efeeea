//! Analytical model, optimizer and slot-level simulator for wireless-powered
//! CSMA/CA IoT networks running a harvest-then-transmit duty cycle.
//!
//! Each node samples `n` readings per cycle, sleeps (and harvests RF energy)
//! for `m = n*h + g` MAC slots, then contends for the channel with an
//! RTS/CTS-protected A-MSDU carrying all `n` samples. The crate provides:
//!
//! * [`timing`]: frame and event durations of the DCF exchange,
//! * [`mac`]: the per-node duty-cycle chain, slot probabilities, throughput
//!   and air-time,
//! * [`energy`]: per-cycle energy accounting and the coefficient form of the
//!   energy-neutrality constraint,
//! * [`optimizer`]: proportionally fair allocation of `(n, alpha)` by
//!   convex-concave iterations inside block coordinate ascent,
//! * [`sim`]: a Monte Carlo slot simulator used as an independent check,
//! * [`scenario`], [`report`] and [`commands`]: file formats and the
//!   command implementations behind the `wpcsma` binary.
//!
//! All quantities are SI internally (seconds, watts, joules, bits, bit/s).

pub mod commands;
pub mod energy;
pub mod error;
pub mod mac;
pub mod optimizer;
pub mod params;
pub mod point;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod stats;
pub mod timing;
pub mod units;

pub use error::{Error, NodeDiagnosis, Result};
pub use params::{DutyCycle, LinkParams, NodeParams, PowerProfile, ProtocolParams, Scenario};
