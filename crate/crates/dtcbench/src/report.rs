//! Plain-text and CSV-row rendering of run metrics and comparison reports.

use crate::config::{ResolvedConfig, Source};
use dtcsim::metrics::{ComparisonReport, RippleStats};
use dtcsim::plant::rad_s_to_rpm;

fn fmt_rise(rise: Option<f64>) -> String {
    match rise {
        Some(t) => format!("{:.4} s", t),
        None => "not settled".to_string(),
    }
}

/// The steady-state analysis window for a run: `[0.7, 0.9]` s when the run
/// is long enough, otherwise the last fifth of the run.
pub fn steady_window(t_end: f64) -> (f64, f64) {
    if t_end >= 0.9 {
        (0.7, 0.9)
    } else {
        (0.8 * t_end, t_end)
    }
}

/// Resolved configuration echo with the provenance of every value.
pub fn render_resolved(resolved: &ResolvedConfig) -> String {
    let mut out = String::from("resolved configuration:\n");
    let width = resolved.entries.iter().map(|e| e.key.len()).max().unwrap_or(0);
    for e in &resolved.entries {
        let source = match e.source {
            Source::File => "file",
            Source::Default => "default",
        };
        out.push_str(&format!("  {:width$} = {:<24} ({source})\n", e.key, e.value));
    }
    out
}

/// Metrics summary for a single run.
pub fn render_run_summary(
    controller: &str,
    torque: &RippleStats,
    speed: &RippleStats,
    rise: Option<f64>,
    target: f64,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("[{controller}] window [{}, {}] s\n", torque.window.0, torque.window.1));
    out.push_str(&format!(
        "  torque   mean {:8.3} N m   rms ripple {:7.4} N m   p2p {:7.3} N m\n",
        torque.mean, torque.rms_dev, torque.p2p
    ));
    out.push_str(&format!(
        "  speed    mean {:8.3} rad/s ({:.1} rpm)   rms fluctuation {:7.4} rad/s\n",
        speed.mean,
        rad_s_to_rpm(speed.mean),
        speed.rms_dev
    ));
    out.push_str(&format!(
        "  speed error {:+.3}% of reference   rise time (2% band) {}\n",
        100.0 * (speed.mean - target) / target,
        fmt_rise(rise)
    ));
    out
}

/// Aligned side-by-side comparison, baseline first.
pub fn render_comparison(rep: &ComparisonReport, base: &str, other: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "comparison over window [{}, {}] s ({base} -> {other}):\n",
        rep.torque_a.window.0, rep.torque_a.window.1
    ));
    out.push_str(&format!(
        "  {:24} {:>12} {:>12}\n",
        "", base, other
    ));
    let rows: [(&str, f64, f64); 4] = [
        ("torque mean [N m]", rep.torque_a.mean, rep.torque_b.mean),
        ("torque rms ripple [N m]", rep.torque_a.rms_dev, rep.torque_b.rms_dev),
        ("torque p2p [N m]", rep.torque_a.p2p, rep.torque_b.p2p),
        ("speed rms fluct [rad/s]", rep.speed_a.rms_dev, rep.speed_b.rms_dev),
    ];
    for (label, a, b) in rows {
        out.push_str(&format!("  {label:24} {a:>12.4} {b:>12.4}\n"));
    }
    out.push_str(&format!(
        "  {:24} {:>12} {:>12}\n",
        "rise time",
        fmt_rise(rep.rise_a),
        fmt_rise(rep.rise_b)
    ));
    out.push_str(&format!(
        "  torque ripple reduction {:+.1}%   speed fluctuation reduction {:+.1}%",
        100.0 * rep.torque_ripple_reduction,
        100.0 * rep.speed_fluctuation_reduction
    ));
    match rep.rise_delta {
        Some(d) => out.push_str(&format!("   rise delta {:+.4} s\n", d)),
        None => out.push('\n'),
    }
    out
}

pub const COMPARISON_CSV_HEADER: &str = "torque_rms_a,torque_rms_b,torque_p2p_a,torque_p2p_b,\
                                         speed_rms_a,speed_rms_b,torque_ripple_reduction,\
                                         speed_fluctuation_reduction,rise_a,rise_b";

/// The comparison as one CSV row matching [`COMPARISON_CSV_HEADER`].
pub fn comparison_csv_row(rep: &ComparisonReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        rep.torque_a.rms_dev,
        rep.torque_b.rms_dev,
        rep.torque_a.p2p,
        rep.torque_b.p2p,
        rep.speed_a.rms_dev,
        rep.speed_b.rms_dev,
        rep.torque_ripple_reduction,
        rep.speed_fluctuation_reduction,
        opt(rep.rise_a),
        opt(rep.rise_b),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_clamps_to_short_runs() {
        assert_eq!(steady_window(1.0), (0.7, 0.9));
        assert_eq!(steady_window(0.5), (0.4, 0.5));
    }

    #[test]
    fn comparison_row_matches_header_arity() {
        let stats = RippleStats { mean: 1.0, rms_dev: 0.5, p2p: 2.0, window: (0.7, 0.9) };
        let rep = ComparisonReport {
            torque_a: stats,
            torque_b: stats,
            speed_a: stats,
            speed_b: stats,
            torque_ripple_reduction: 0.0,
            speed_fluctuation_reduction: 0.0,
            rise_a: Some(0.08),
            rise_b: None,
            rise_delta: None,
        };
        let row = comparison_csv_row(&rep);
        assert_eq!(row.split(',').count(), COMPARISON_CSV_HEADER.split(',').count());
        assert!(row.ends_with(','), "empty rise_b field");
    }
}
