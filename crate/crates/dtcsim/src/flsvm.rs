//! Fuzzy-logic space-vector controller.
//!
//! Flux and torque errors are normalized, fuzzified over triangular labels,
//! and pushed through a singleton rule table whose output is the angle
//! advance the stator flux vector should make next. The voltage reference
//! that realizes the advance (and re-centers the flux magnitude on its
//! reference) is then synthesized by a discrete space-vector modulator as a
//! symmetric seven-segment switching pattern over one control period.

use crate::plant::{wrap_two_pi, Sector, SwitchState};
use crate::SimError;
use std::f64::consts::PI;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Largest reference magnitude |Vref|/Vdc realizable without over-modulation.
pub const LINEAR_MODULATION_LIMIT: f64 = 0.577_350_269_189_625_8;

/// Rule weight share of the zero torque row above which the period is spent
/// entirely on null vectors.
pub const ZERO_ROW_NULL_SHARE: f64 = 0.999;

/// Membership layout and error normalization for the two fuzzy inputs.
///
/// Errors are divided by their scale and clamped to [-1, 1]. Triangles span
/// between adjacent centers and the outermost labels saturate past their
/// centers, so memberships over each axis always sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyConfig {
    /// Flux-error label centers (BD, SD, SI, BI) on the normalized axis.
    pub flux_centers: [f64; 4],
    /// Torque-error label centers (BD, SD, Z, SI, BI) on the normalized axis.
    pub torque_centers: [f64; 5],
    /// Flux error normalization, Wb.
    pub flux_scale: f64,
    /// Torque error normalization, N m.
    pub torque_scale: f64,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        FuzzyConfig {
            flux_centers: [-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0],
            torque_centers: [-1.0, -0.5, 0.0, 0.5, 1.0],
            flux_scale: 0.05,
            torque_scale: 5.0,
        }
    }
}

impl FuzzyConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.flux_scale > 0.0 && self.flux_scale.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "fuzzy.flux_scale must be positive, got {}",
                self.flux_scale
            )));
        }
        if !(self.torque_scale > 0.0 && self.torque_scale.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "fuzzy.torque_scale must be positive, got {}",
                self.torque_scale
            )));
        }
        let increasing = |c: &[f64]| c.windows(2).all(|w| w[0] < w[1] && w[1].is_finite());
        if !increasing(&self.flux_centers) {
            return Err(SimError::InvalidConfig("fuzzy.flux_centers must be strictly increasing".into()));
        }
        if !increasing(&self.torque_centers) {
            return Err(SimError::InvalidConfig("fuzzy.torque_centers must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Singleton consequents: degrees of flux-vector angle advance for the five
/// torque rows (BD, SD, Z, SI, BI) by four flux columns (BD, SD, SI, BI).
///
/// The table is odd-symmetric in the torque rows and its zero row is all
/// zeros, so a vanishing torque error always yields a vanishing angle.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    pub angle_deg: [[f64; 4]; 5],
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable {
            angle_deg: [
                [-135.0, -105.0, -75.0, -45.0], // torque BD
                [-165.0, -135.0, -45.0, -15.0], // torque SD
                [0.0, 0.0, 0.0, 0.0],           // torque Z
                [165.0, 135.0, 45.0, 15.0],     // torque SI
                [135.0, 105.0, 75.0, 45.0],     // torque BI
            ],
        }
    }
}

impl RuleTable {
    /// Checks the zero row and the odd symmetry cell(-row, col) = -cell(row, col).
    pub fn validate(&self) -> Result<(), SimError> {
        for c in 0..4 {
            if self.angle_deg[2][c] != 0.0 {
                return Err(SimError::InvalidConfig("rule table zero row must be all zeros".into()));
            }
            for r in 0..2 {
                if self.angle_deg[r][c] != -self.angle_deg[4 - r][c] {
                    return Err(SimError::InvalidConfig("rule table must be odd-symmetric in torque".into()));
                }
            }
        }
        Ok(())
    }
}

/// Degrees of membership of a raw error in each triangular label.
pub fn fuzzify<const N: usize>(err: f64, scale: f64, centers: &[f64; N]) -> [f64; N] {
    let u = (err / scale).clamp(-1.0, 1.0);
    let mut mu = [0.0; N];
    if u <= centers[0] {
        mu[0] = 1.0;
        return mu;
    }
    if u >= centers[N - 1] {
        mu[N - 1] = 1.0;
        return mu;
    }
    for i in 0..N - 1 {
        if u < centers[i + 1] {
            let rising = (u - centers[i]) / (centers[i + 1] - centers[i]);
            mu[i + 1] = rising;
            mu[i] = 1.0 - rising;
            break;
        }
    }
    mu
}

/// Result of one fuzzy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inference {
    /// Weighted-average angle advance, degrees.
    pub delta_angle_deg: f64,
    /// Fraction of the total rule weight carried by the zero torque row.
    pub zero_row_share: f64,
}

/// Zero-order Sugeno inference with the min t-norm: each rule fires with
/// weight min(torque row membership, flux column membership) and the output
/// is the weight-averaged singleton angle.
pub fn infer_delta_angle(
    flux_err: f64,
    torque_err: f64,
    cfg: &FuzzyConfig,
    tbl: &RuleTable,
) -> Inference {
    let mu_flux = fuzzify(flux_err, cfg.flux_scale, &cfg.flux_centers);
    let mu_torque = fuzzify(torque_err, cfg.torque_scale, &cfg.torque_centers);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut zero_row = 0.0;
    for (r, &mt) in mu_torque.iter().enumerate() {
        if mt == 0.0 {
            continue;
        }
        for (c, &mf) in mu_flux.iter().enumerate() {
            let w = mt.min(mf);
            if w == 0.0 {
                continue;
            }
            num += w * tbl.angle_deg[r][c];
            den += w;
            if r == 2 {
                zero_row += w;
            }
        }
    }
    if den == 0.0 {
        // unreachable for valid configs: memberships partition unity
        return Inference { delta_angle_deg: 0.0, zero_row_share: 0.0 };
    }
    Inference { delta_angle_deg: num / den, zero_row_share: zero_row / den }
}

/// One modulation period's voltage reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmCommand {
    /// Absolute reference angle, rad in `[0, 2*pi)`.
    pub ref_angle: f64,
    /// Normalized magnitude |Vref|/Vdc within the linear region.
    pub ref_mag: f64,
    /// Modulation period, s.
    pub period: f64,
}

/// Builds the period's voltage reference from the inferred angle advance.
///
/// In the flux frame the command has a tangential component of
/// `V_lin * sin(delta)`, so the table's angle sets the torque-producing push
/// exactly as a full-magnitude vector at `theta_flux + delta` would, and a
/// radial component that corrects the flux magnitude onto its reference in
/// one period (plus the resistive drop along the flux), clamped to the
/// voltage budget left inside the linear region. Near equilibrium both
/// components shrink and the period is spent mostly on null vectors. A
/// period whose torque inference collapsed onto the zero row emits a pure
/// null command, as does a zero flux vector (no frame to work in).
pub fn build_reference(
    flux: (f64, f64),
    flux_ref: f64,
    delta_deg: f64,
    current: (f64, f64),
    rs: f64,
    vdc: f64,
    torque_active: bool,
    period: f64,
) -> SvmCommand {
    let mag = (flux.0 * flux.0 + flux.1 * flux.1).sqrt();
    if !torque_active || vdc <= 0.0 || mag == 0.0 {
        return SvmCommand { ref_angle: 0.0, ref_mag: 0.0, period };
    }
    let (ur_a, ur_b) = (flux.0 / mag, flux.1 / mag);
    let (ut_a, ut_b) = (-ur_b, ur_a);
    let v_lin = LINEAR_MODULATION_LIMIT * vdc;
    let v_tan = v_lin * delta_deg.to_radians().sin();
    let budget = (v_lin * v_lin - v_tan * v_tan).max(0.0).sqrt();
    let i_radial = current.0 * ur_a + current.1 * ur_b;
    let v_rad = ((flux_ref - mag) / period + rs * i_radial).clamp(-budget, budget);
    let v_alpha = v_rad * ur_a + v_tan * ut_a;
    let v_beta = v_rad * ur_b + v_tan * ut_b;
    SvmCommand {
        ref_angle: wrap_two_pi(v_beta.atan2(v_alpha)),
        ref_mag: ((v_rad * v_rad + v_tan * v_tan).sqrt() / vdc).min(LINEAR_MODULATION_LIMIT),
        period,
    }
}

/// SVM sector of an absolute angle plus the in-sector angle.
///
/// Sector k spans [(k-1)*60, k*60) degrees, bounded by the active vectors Vk
/// and Vk+1. Note this differs from the flux-sector convention, which is
/// centered on the vectors.
pub fn svm_sector(ref_angle: f64) -> (Sector, f64) {
    let a = wrap_two_pi(ref_angle);
    let k = ((a / (PI / 3.0)) as u8).min(5);
    (Sector::new(k + 1).unwrap(), a - k as f64 * (PI / 3.0))
}

/// Dwell times (t1 on Vk, t2 on Vk+1, t0 on null vectors) whose volt-seconds
/// reproduce the command over one period. All three are non-negative inside
/// the linear region; magnitudes beyond it are rejected.
pub fn dwell_times(cmd: &SvmCommand) -> Result<(f64, f64, f64), SimError> {
    if !(cmd.ref_mag >= 0.0) || cmd.ref_mag > LINEAR_MODULATION_LIMIT + 1e-9 {
        return Err(SimError::OverModulation { ref_mag: cmd.ref_mag });
    }
    let (_, alpha) = svm_sector(cmd.ref_angle);
    let k = SQRT3 * cmd.ref_mag * cmd.period;
    let t1 = k * (PI / 3.0 - alpha).sin();
    let t2 = k * alpha.sin();
    let t0 = (cmd.period - t1 - t2).max(0.0);
    Ok((t1, t2, t0))
}

/// Symmetric seven-segment switching sequence for one period:
/// V0, Vk, Vk+1, V7, Vk+1, Vk, V0 with dwell split t0/4, t1/2, t2/2, t0/2,
/// t2/2, t1/2, t0/4. Even sectors swap the active order so every segment
/// boundary toggles exactly one inverter leg. Zero-duration segments are
/// dropped and identical neighbors merged.
pub fn switching_pattern(
    sector: Sector,
    t1: f64,
    t2: f64,
    t0: f64,
    period: f64,
) -> Result<Vec<(SwitchState, f64)>, SimError> {
    if t1 < 0.0 || t2 < 0.0 || t0 < 0.0 || (t1 + t2 + t0 - period).abs() > 1e-12 {
        return Err(SimError::InvalidDwell { t1, t2, t0 });
    }
    let va = SwitchState::active(sector);
    let vb = SwitchState::active(sector.offset(1));
    let (first, second, d_first, d_second) = if sector.get() % 2 == 1 {
        (va, vb, t1, t2)
    } else {
        (vb, va, t2, t1)
    };
    let raw = [
        (SwitchState::NULL_LOW, t0 / 4.0),
        (first, d_first / 2.0),
        (second, d_second / 2.0),
        (SwitchState::NULL_HIGH, t0 / 2.0),
        (second, d_second / 2.0),
        (first, d_first / 2.0),
        (SwitchState::NULL_LOW, t0 / 4.0),
    ];
    let mut out: Vec<(SwitchState, f64)> = Vec::with_capacity(7);
    for (sw, dur) in raw {
        if dur <= 0.0 {
            continue;
        }
        match out.last_mut() {
            Some((last, d)) if *last == sw => *d += dur,
            _ => out.push((sw, dur)),
        }
    }
    Ok(out)
}
