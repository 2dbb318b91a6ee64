//! Fixed-step simulation of a direct-torque-controlled induction motor drive.
//!
//! The crate models a squirrel-cage induction machine fed by a two-level
//! voltage-source inverter and closes the torque loop with either of two
//! controllers:
//!
//! * [`cdtc`] - two hysteresis comparators plus the classical six-sector
//!   switching table,
//! * [`flsvm`] - a fuzzy inference stage that maps flux/torque errors to a
//!   voltage-vector angle, synthesized by a discrete space-vector modulator.
//!
//! [`sim`] schedules the closed loop (speed PI, controller dispatch, plant
//! sub-stepping) and produces a uniformly sampled [`sim::TimeSeriesLog`];
//! [`metrics`] turns logs into ripple, rise-time, and comparison figures.
//!
//! Everything is plain `f64` arithmetic over value-semantics state: running
//! the same scenario twice yields bit-identical logs. Independent scenarios
//! may safely run on separate threads.

pub mod cdtc;
pub mod estimator;
pub mod flsvm;
pub mod metrics;
pub mod plant;
pub mod sim;

mod error;

pub use error::SimError;
