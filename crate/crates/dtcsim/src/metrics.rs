//! Post-processing of run logs: ripple statistics, rise time, and the
//! controller-versus-controller comparison report.

use crate::sim::TimeSeriesLog;
use crate::SimError;

/// Settling dwell required before a band entry counts as settled.
pub const SETTLE_HOLD_S: f64 = 0.020;

/// Default settling band as a fraction of the speed target.
pub const DEFAULT_RISE_BAND: f64 = 0.02;

/// Which logged signal a statistic is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    /// Plant electromagnetic torque.
    Torque,
    /// Mechanical speed.
    Speed,
}

/// Deviation statistics of a signal over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RippleStats {
    pub mean: f64,
    /// RMS of the deviation about the window mean.
    pub rms_dev: f64,
    /// Peak-to-peak excursion.
    pub p2p: f64,
    /// The window the statistics were computed over, s.
    pub window: (f64, f64),
}

/// Mean, RMS deviation, and peak-to-peak of a signal over `[window.0, window.1]`.
pub fn ripple_stats(
    log: &TimeSeriesLog,
    signal: Signal,
    window: (f64, f64),
) -> Result<RippleStats, SimError> {
    let select = |s: &crate::sim::Sample| match signal {
        Signal::Torque => s.te_plant,
        Signal::Speed => s.omega_m,
    };
    let values: Vec<f64> = log
        .samples
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
        .map(select)
        .collect();
    if values.is_empty() {
        return Err(SimError::EmptyWindow { t_start: window.0, t_end: window.1 });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let rms_dev = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(RippleStats { mean, rms_dev, p2p: max - min, window })
}

/// First time the speed enters `target*(1 +/- band)` and stays there for at
/// least [`SETTLE_HOLD_S`]. `None` when the run never settles.
pub fn rise_time(log: &TimeSeriesLog, target: f64, band: f64) -> Option<f64> {
    let tol = band * target.abs();
    let mut run_start: Option<f64> = None;
    for s in &log.samples {
        if (s.omega_m - target).abs() <= tol {
            let start = *run_start.get_or_insert(s.t);
            if s.t - start >= SETTLE_HOLD_S {
                return Some(start);
            }
        } else {
            run_start = None;
        }
    }
    None
}

/// Ripple reduction of `b` relative to `a`: 1 - rms_b/rms_a. Positive values
/// mean `b` ripples less.
fn reduction(rms_a: f64, rms_b: f64) -> f64 {
    if rms_a == 0.0 {
        if rms_b == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - rms_b / rms_a
    }
}

/// Side-by-side figures for two runs of the same scenario under different
/// controllers; `a` is the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub torque_a: RippleStats,
    pub torque_b: RippleStats,
    pub speed_a: RippleStats,
    pub speed_b: RippleStats,
    /// 1 - torque rms_dev(b)/rms_dev(a).
    pub torque_ripple_reduction: f64,
    /// 1 - speed rms_dev(b)/rms_dev(a).
    pub speed_fluctuation_reduction: f64,
    /// Settling times into the 2% band, when reached.
    pub rise_a: Option<f64>,
    pub rise_b: Option<f64>,
    /// rise_b - rise_a when both settled.
    pub rise_delta: Option<f64>,
}

/// Compares two runs that share everything but the controller.
pub fn compare(
    log_a: &TimeSeriesLog,
    log_b: &TimeSeriesLog,
    window: (f64, f64),
) -> Result<ComparisonReport, SimError> {
    let mut a_as_b = log_a.config.clone();
    a_as_b.controller = log_b.config.controller;
    if a_as_b != log_b.config {
        return Err(SimError::ScenarioMismatch(
            "logs must come from the same scenario, differing only in the controller".into(),
        ));
    }
    let torque_a = ripple_stats(log_a, Signal::Torque, window)?;
    let torque_b = ripple_stats(log_b, Signal::Torque, window)?;
    let speed_a = ripple_stats(log_a, Signal::Speed, window)?;
    let speed_b = ripple_stats(log_b, Signal::Speed, window)?;
    let target = log_a.config.speed_ref.value(log_a.config.t_end);
    let rise_a = rise_time(log_a, target, DEFAULT_RISE_BAND);
    let rise_b = rise_time(log_b, target, DEFAULT_RISE_BAND);
    Ok(ComparisonReport {
        torque_ripple_reduction: reduction(torque_a.rms_dev, torque_b.rms_dev),
        speed_fluctuation_reduction: reduction(speed_a.rms_dev, speed_b.rms_dev),
        rise_delta: match (rise_a, rise_b) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        },
        torque_a,
        torque_b,
        speed_a,
        speed_b,
        rise_a,
        rise_b,
    })
}
