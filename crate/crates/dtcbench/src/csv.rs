//! CSV emission of run logs.
//!
//! Fixed column order, `.` decimal point, `\n` line endings, and floats in
//! Rust's shortest round-trip formatting, so identical runs produce byte
//! identical files on any locale.

use dtcsim::sim::TimeSeriesLog;
use std::io::{self, Write};

pub const CSV_HEADER: &str = "t,omega_m,omega_ref,torque_ref,te_plant,te_est,lambda_mag,theta,\
                              sector,ia,ib,ic,sa,sb,sc,delta_theta_deg,flux_cmp,torque_cmp";

pub fn write_csv<W: Write>(log: &TimeSeriesLog, out: &mut W) -> io::Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for s in &log.samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.omega_m,
            s.omega_ref,
            s.torque_ref,
            s.te_plant,
            s.te_est,
            s.lambda_mag,
            s.theta,
            s.sector,
            s.ia,
            s.ib,
            s.ic,
            s.sa as u8,
            s.sb as u8,
            s.sc as u8,
            s.delta_theta_deg,
            s.flux_cmp as u8,
            s.torque_cmp,
        )?;
    }
    Ok(())
}

pub fn to_csv_string(log: &TimeSeriesLog) -> String {
    let mut buf = Vec::new();
    write_csv(log, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}
