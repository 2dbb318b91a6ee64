use std::fmt;

/// Errors surfaced by the simulation crate.
#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    /// A parameter or scenario invariant does not hold.
    InvalidConfig(String),
    /// An input or state value stopped being finite.
    NonFinite(&'static str),
    /// SVM reference magnitude beyond the linear modulation limit.
    OverModulation { ref_mag: f64 },
    /// Dwell times passed to the pattern builder are negative or inconsistent.
    InvalidDwell { t1: f64, t2: f64, t0: f64 },
    /// The integrated machine state diverged.
    NumericalBlowUp { t: f64, norm: f64 },
    /// A metrics window selected no samples.
    EmptyWindow { t_start: f64, t_end: f64 },
    /// Two logs passed to `compare` come from different scenarios.
    ScenarioMismatch(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            SimError::NonFinite(what) => write!(f, "non-finite value in {what}"),
            SimError::OverModulation { ref_mag } => {
                write!(f, "reference magnitude {ref_mag} exceeds the linear modulation limit")
            }
            SimError::InvalidDwell { t1, t2, t0 } => {
                write!(f, "invalid dwell times t1={t1} t2={t2} t0={t0}")
            }
            SimError::NumericalBlowUp { t, norm } => {
                write!(f, "simulation diverged at t={t} s (state norm {norm:.3e})")
            }
            SimError::EmptyWindow { t_start, t_end } => {
                write!(f, "window [{t_start}, {t_end}] selects no samples")
            }
            SimError::ScenarioMismatch(msg) => write!(f, "scenario mismatch: {msg}"),
        }
    }
}

impl std::error::Error for SimError {}
