//! The `run`, `compare`, and `sweep` commands behind the CLI front end.

use crate::config::{parse_config, with_override, ConfigError, ResolvedConfig};
use crate::csv::write_csv;
use crate::report::{
    comparison_csv_row, render_comparison, render_resolved, render_run_summary, steady_window,
    COMPARISON_CSV_HEADER,
};
use dtcsim::metrics::{compare, rise_time, ripple_stats, Signal, DEFAULT_RISE_BAND};
use dtcsim::sim::{run_scenario, ControllerKind, ScenarioConfig, TimeSeriesLog};
use dtcsim::SimError;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CmdError {
    Config(ConfigError),
    Sim(SimError),
    Io(io::Error),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(e) => write!(f, "{e}"),
            CmdError::Sim(e) => write!(f, "{e}"),
            CmdError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e)
    }
}

impl From<SimError> for CmdError {
    fn from(e: SimError) -> Self {
        CmdError::Sim(e)
    }
}

impl From<io::Error> for CmdError {
    fn from(e: io::Error) -> Self {
        CmdError::Io(e)
    }
}

fn stem(config_path: &Path) -> String {
    config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string())
}

fn write_log_csv(out_dir: &Path, name: &str, log: &TimeSeriesLog) -> Result<PathBuf, CmdError> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    let mut file = io::BufWriter::new(fs::File::create(&path)?);
    write_csv(log, &mut file)?;
    io::Write::flush(&mut file)?;
    Ok(path)
}

fn print_metrics(log: &TimeSeriesLog) -> Result<(), CmdError> {
    let window = steady_window(log.config.t_end);
    let torque = ripple_stats(log, Signal::Torque, window)?;
    let speed = ripple_stats(log, Signal::Speed, window)?;
    let target = log.config.speed_ref.value(log.config.t_end);
    let rise = rise_time(log, target, DEFAULT_RISE_BAND);
    print!(
        "{}",
        render_run_summary(log.config.controller.name(), &torque, &speed, rise, target)
    );
    Ok(())
}

/// `run <config>`: one scenario, one CSV, metrics on stdout.
pub fn cmd_run(config_path: &Path, out_dir: &Path) -> Result<(), CmdError> {
    let resolved = parse_config(config_path)?;
    print!("{}", render_resolved(&resolved));
    let log = run_scenario(&resolved.scenario)?;
    let name = format!("{}_{}.csv", stem(config_path), resolved.scenario.controller.name());
    let path = write_log_csv(out_dir, &name, &log)?;
    println!("wrote {}", path.display());
    print_metrics(&log)
}

fn run_both(resolved: &ResolvedConfig) -> Result<(TimeSeriesLog, TimeSeriesLog), SimError> {
    let cdtc = run_scenario(&ScenarioConfig {
        controller: ControllerKind::Cdtc,
        ..resolved.scenario.clone()
    })?;
    let flsvm = run_scenario(&ScenarioConfig {
        controller: ControllerKind::Flsvm,
        ..resolved.scenario.clone()
    })?;
    Ok((cdtc, flsvm))
}

/// `compare <config>`: both controllers on the same scenario. Returns whether
/// the torque ripple reduction met `threshold`.
pub fn cmd_compare(config_path: &Path, out_dir: &Path, threshold: f64) -> Result<bool, CmdError> {
    let resolved = parse_config(config_path)?;
    print!("{}", render_resolved(&resolved));
    let (cdtc, flsvm) = run_both(&resolved)?;
    let base = stem(config_path);
    for (name, log) in [("cdtc", &cdtc), ("flsvm", &flsvm)] {
        let path = write_log_csv(out_dir, &format!("{base}_{name}.csv"), log)?;
        println!("wrote {}", path.display());
    }
    let window = steady_window(resolved.scenario.t_end);
    let rep = compare(&cdtc, &flsvm, window)?;
    print!("{}", render_comparison(&rep, "cdtc", "flsvm"));
    let report_path = out_dir.join(format!("{base}_compare.csv"));
    fs::write(
        &report_path,
        format!("{COMPARISON_CSV_HEADER}\n{}\n", comparison_csv_row(&rep)),
    )?;
    println!("wrote {}", report_path.display());
    let met = rep.torque_ripple_reduction >= threshold;
    println!(
        "threshold {:.3}: {}",
        threshold,
        if met { "met" } else { "not met" }
    );
    Ok(met)
}

/// `sweep <config> --key k --values v1,v2,...`: a compare per value, one
/// summary row each.
pub fn cmd_sweep(
    config_path: &Path,
    out_dir: &Path,
    key: &str,
    values: &[String],
) -> Result<(), CmdError> {
    let resolved = parse_config(config_path)?;
    print!("{}", render_resolved(&resolved));
    fs::create_dir_all(out_dir)?;
    let mut summary = format!("{key},{COMPARISON_CSV_HEADER}\n");
    println!(
        "{:>16} {:>14} {:>14} {:>12}",
        key, "cdtc rms [N m]", "flsvm rms [N m]", "reduction"
    );
    for value in values {
        let overridden = with_override(&resolved.scenario, key, value)?;
        let (cdtc, flsvm) = run_both(&overridden)?;
        let window = steady_window(overridden.scenario.t_end);
        let rep = compare(&cdtc, &flsvm, window)?;
        println!(
            "{:>16} {:>14.4} {:>14.4} {:>11.1}%",
            value,
            rep.torque_a.rms_dev,
            rep.torque_b.rms_dev,
            100.0 * rep.torque_ripple_reduction
        );
        summary.push_str(&format!("{value},{}\n", comparison_csv_row(&rep)));
    }
    let path = out_dir.join(format!("{}_sweep.csv", stem(config_path)));
    fs::write(&path, summary)?;
    println!("wrote {}", path.display());
    Ok(())
}
