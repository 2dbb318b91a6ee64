//! Induction machine model, inverter space vectors, and frame transforms.
//!
//! The machine is a squirrel-cage induction motor written in the stationary
//! alpha-beta frame with the four flux linkages as electrical states, plus
//! mechanical speed and angle. The inverter is ideal: a switch state maps
//! directly to terminal voltage. All transforms use the amplitude-invariant
//! (2/3) Clarke convention, so torque carries the usual 3/2 factor.

use crate::SimError;
use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;
pub(crate) const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Wraps an angle to `[0, 2*pi)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let a = angle % TWO_PI;
    if a < 0.0 {
        a + TWO_PI
    } else {
        a
    }
}

/// Converts a speed in rpm to mechanical rad/s.
pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    rpm * TWO_PI / 60.0
}

/// Converts a mechanical speed in rad/s to rpm.
pub fn rad_s_to_rpm(rad_s: f64) -> f64 {
    rad_s * 60.0 / TWO_PI
}

/// Amplitude-invariant Clarke transform of a per-phase triple.
pub fn abc_to_alphabeta(xa: f64, xb: f64, xc: f64) -> (f64, f64) {
    let alpha = (2.0 / 3.0) * (xa - 0.5 * xb - 0.5 * xc);
    let beta = (xb - xc) / SQRT3;
    (alpha, beta)
}

/// Inverse Clarke transform with zero-sequence component set to zero.
pub fn alphabeta_to_abc(alpha: f64, beta: f64) -> (f64, f64, f64) {
    let a = alpha;
    let b = -0.5 * alpha + 0.5 * SQRT3 * beta;
    let c = -0.5 * alpha - 0.5 * SQRT3 * beta;
    (a, b, c)
}

/// One of the six 60-degree regions of the alpha-beta plane, numbered 1..=6.
///
/// The same index names the six active inverter vectors V1..V6, placed
/// counterclockwise starting from the alpha axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sector(u8);

impl Sector {
    /// Accepts only 1..=6.
    pub fn new(k: u8) -> Option<Self> {
        (1..=6).contains(&k).then_some(Sector(k))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Sector reached by stepping `steps` sectors counterclockwise (mod 6).
    pub fn offset(self, steps: i32) -> Sector {
        let k = (self.0 as i32 - 1 + steps).rem_euclid(6);
        Sector(k as u8 + 1)
    }

    /// Angle of the active vector Vk, radians.
    pub fn vector_angle(self) -> f64 {
        (self.0 as f64 - 1.0) * PI / 3.0
    }
}

/// Inverter leg states (Sa, Sb, Sc). The eight combinations are the basic
/// space vectors: six active vectors V1..V6 plus the null vectors V0 and V7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwitchState {
    pub sa: bool,
    pub sb: bool,
    pub sc: bool,
}

impl SwitchState {
    /// V0, all legs low.
    pub const NULL_LOW: SwitchState = SwitchState { sa: false, sb: false, sc: false };
    /// V7, all legs high.
    pub const NULL_HIGH: SwitchState = SwitchState { sa: true, sb: true, sc: true };

    /// Active vector Vk for sector k.
    pub fn active(k: Sector) -> SwitchState {
        const LEGS: [(bool, bool, bool); 6] = [
            (true, false, false),
            (true, true, false),
            (false, true, false),
            (false, true, true),
            (false, false, true),
            (true, false, true),
        ];
        let (sa, sb, sc) = LEGS[(k.get() - 1) as usize];
        SwitchState { sa, sb, sc }
    }

    pub fn is_null(self) -> bool {
        self == Self::NULL_LOW || self == Self::NULL_HIGH
    }

    /// Number of legs that differ between two switch states.
    pub fn leg_diff(self, other: SwitchState) -> u32 {
        (self.sa != other.sa) as u32 + (self.sb != other.sb) as u32 + (self.sc != other.sc) as u32
    }

    /// The null vector reachable from `self` with the fewest leg toggles.
    /// The toggle counts to V0 and V7 always sum to three, so there is no tie.
    pub fn nearest_null(self) -> SwitchState {
        if self.leg_diff(Self::NULL_LOW) <= self.leg_diff(Self::NULL_HIGH) {
            Self::NULL_LOW
        } else {
            Self::NULL_HIGH
        }
    }
}

/// Terminal alpha-beta voltage produced by a switch state on a `vdc` bus.
///
/// The six active vectors have magnitude (2/3)*vdc at angles k*60 degrees;
/// V0 and V7 map to the origin.
pub fn switch_to_voltage(s: SwitchState, vdc: f64) -> (f64, f64) {
    let (sa, sb, sc) = (s.sa as u8 as f64, s.sb as u8 as f64, s.sc as u8 as f64);
    let van = vdc * (2.0 * sa - sb - sc) / 3.0;
    let vbn = vdc * (2.0 * sb - sa - sc) / 3.0;
    let vcn = vdc * (2.0 * sc - sa - sb) / 3.0;
    abc_to_alphabeta(van, vbn, vcn)
}

/// Electrical and mechanical parameters of the machine and its DC bus.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineParams {
    /// Stator resistance, ohm.
    pub rs: f64,
    /// Rotor resistance referred to the stator, ohm.
    pub rr: f64,
    /// Stator leakage inductance, H.
    pub lls: f64,
    /// Rotor leakage inductance referred to the stator, H.
    pub llr: f64,
    /// Magnetizing inductance, H.
    pub lm: f64,
    /// Rotor inertia, kg m^2.
    pub j: f64,
    /// Viscous friction coefficient, N m s.
    pub f: f64,
    /// Pole pairs.
    pub pole_pairs: u32,
    /// Inverter DC bus voltage, V.
    pub vdc: f64,
}

impl Default for MachineParams {
    /// A 4 kW, 400 V, 50 Hz squirrel-cage machine on a rectified 565 V bus.
    ///
    /// The bus must exceed sqrt(3) times the peak phase EMF (about 455 V at
    /// rated speed and 0.8 Wb) for the modulator to stay in its linear
    /// region, hence the rectified-mains value rather than the nameplate 400.
    fn default() -> Self {
        MachineParams {
            rs: 1.405,
            rr: 1.395,
            lls: 0.0058,
            llr: 0.005839,
            lm: 0.1722,
            j: 0.0131,
            f: 0.002985,
            pole_pairs: 2,
            vdc: 565.0,
        }
    }
}

impl MachineParams {
    /// Total stator inductance Ls = Lls + Lm.
    pub fn ls(&self) -> f64 {
        self.lls + self.lm
    }

    /// Total rotor inductance Lr = Llr + Lm.
    pub fn lr(&self) -> f64 {
        self.llr + self.lm
    }

    /// Inductance matrix determinant Ls*Lr - Lm^2; positive for any machine
    /// with nonzero leakage.
    pub fn inductance_det(&self) -> f64 {
        self.ls() * self.lr() - self.lm * self.lm
    }

    /// Stator transient inductance sigma*Ls = Ls - Lm^2/Lr.
    pub fn transient_inductance(&self) -> f64 {
        self.inductance_det() / self.lr()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("rs", self.rs),
            ("rr", self.rr),
            ("lls", self.lls),
            ("llr", self.llr),
            ("lm", self.lm),
            ("j", self.j),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SimError::InvalidConfig(format!("machine.{name} must be positive, got {value}")));
            }
        }
        if !(self.f >= 0.0 && self.f.is_finite()) {
            return Err(SimError::InvalidConfig(format!("machine.f must be non-negative, got {}", self.f)));
        }
        if self.pole_pairs < 1 {
            return Err(SimError::InvalidConfig("machine.pole_pairs must be at least 1".into()));
        }
        if !(self.vdc >= 0.0 && self.vdc.is_finite()) {
            return Err(SimError::InvalidConfig(format!("machine.vdc must be non-negative, got {}", self.vdc)));
        }
        if self.inductance_det() <= 0.0 {
            return Err(SimError::InvalidConfig(
                "machine inductances must satisfy ls*lr - lm^2 > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Plant state: stator and rotor flux linkages in the stationary frame plus
/// the mechanical speed and angle. Also used as the derivative container for
/// the integrator, in which case `theta_m` holds d(theta)/dt unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MachineState {
    pub psi_s_alpha: f64,
    pub psi_s_beta: f64,
    pub psi_r_alpha: f64,
    pub psi_r_beta: f64,
    /// Mechanical speed, rad/s.
    pub omega_m: f64,
    /// Mechanical angle, wrapped to `[0, 2*pi)` after each step.
    pub theta_m: f64,
}

impl MachineState {
    pub fn is_finite(&self) -> bool {
        self.psi_s_alpha.is_finite()
            && self.psi_s_beta.is_finite()
            && self.psi_r_alpha.is_finite()
            && self.psi_r_beta.is_finite()
            && self.omega_m.is_finite()
            && self.theta_m.is_finite()
    }

    /// Euclidean norm over all state fields, used in divergence diagnostics.
    pub fn norm(&self) -> f64 {
        (self.psi_s_alpha.powi(2)
            + self.psi_s_beta.powi(2)
            + self.psi_r_alpha.powi(2)
            + self.psi_r_beta.powi(2)
            + self.omega_m.powi(2)
            + self.theta_m.powi(2))
        .sqrt()
    }

    /// Stator currents (i_alpha, i_beta) recovered from the flux linkages.
    pub fn stator_currents(&self, prm: &MachineParams) -> (f64, f64) {
        let d = prm.inductance_det();
        (
            (prm.lr() * self.psi_s_alpha - prm.lm * self.psi_r_alpha) / d,
            (prm.lr() * self.psi_s_beta - prm.lm * self.psi_r_beta) / d,
        )
    }

    /// Rotor currents (i_alpha, i_beta) recovered from the flux linkages.
    pub fn rotor_currents(&self, prm: &MachineParams) -> (f64, f64) {
        let d = prm.inductance_det();
        (
            (prm.ls() * self.psi_r_alpha - prm.lm * self.psi_s_alpha) / d,
            (prm.ls() * self.psi_r_beta - prm.lm * self.psi_s_beta) / d,
        )
    }

    /// Electromagnetic torque produced at this state, N m.
    pub fn torque(&self, prm: &MachineParams) -> f64 {
        let (is_a, is_b) = self.stator_currents(prm);
        1.5 * prm.pole_pairs as f64 * (self.psi_s_alpha * is_b - self.psi_s_beta * is_a)
    }

    fn axpy(&self, h: f64, d: &MachineState) -> MachineState {
        MachineState {
            psi_s_alpha: self.psi_s_alpha + h * d.psi_s_alpha,
            psi_s_beta: self.psi_s_beta + h * d.psi_s_beta,
            psi_r_alpha: self.psi_r_alpha + h * d.psi_r_alpha,
            psi_r_beta: self.psi_r_beta + h * d.psi_r_beta,
            omega_m: self.omega_m + h * d.omega_m,
            theta_m: self.theta_m + h * d.theta_m,
        }
    }
}

/// Time derivative of every state field under the given terminal voltage and
/// load torque.
///
/// Stator: d(psi_s)/dt = v - Rs*is. Rotor (short-circuited, stationary
/// frame): d(psi_r)/dt = -Rr*ir + j*p*omega_m*psi_r, the speed-EMF term
/// rotating the rotor flux. Mechanical: J*d(omega)/dt = Te - T_load - F*omega.
pub fn machine_derivatives(
    st: &MachineState,
    v_alpha: f64,
    v_beta: f64,
    t_load: f64,
    prm: &MachineParams,
) -> Result<MachineState, SimError> {
    if !(st.is_finite() && v_alpha.is_finite() && v_beta.is_finite() && t_load.is_finite()) {
        return Err(SimError::NonFinite("machine_derivatives input"));
    }
    let (is_a, is_b) = st.stator_currents(prm);
    let (ir_a, ir_b) = st.rotor_currents(prm);
    let p = prm.pole_pairs as f64;
    let w_e = p * st.omega_m;
    let te = 1.5 * p * (st.psi_s_alpha * is_b - st.psi_s_beta * is_a);
    Ok(MachineState {
        psi_s_alpha: v_alpha - prm.rs * is_a,
        psi_s_beta: v_beta - prm.rs * is_b,
        psi_r_alpha: -prm.rr * ir_a - w_e * st.psi_r_beta,
        psi_r_beta: -prm.rr * ir_b + w_e * st.psi_r_alpha,
        omega_m: (te - t_load - prm.f * st.omega_m) / prm.j,
        theta_m: st.omega_m,
    })
}

/// Advances the state by one classical 4th-order Runge-Kutta step with the
/// terminal voltage and load held constant over the step.
pub fn step_machine(
    st: &MachineState,
    v_alpha: f64,
    v_beta: f64,
    t_load: f64,
    dt: f64,
    prm: &MachineParams,
) -> Result<MachineState, SimError> {
    assert!(dt > 0.0, "step_machine requires dt > 0");
    let k1 = machine_derivatives(st, v_alpha, v_beta, t_load, prm)?;
    let k2 = machine_derivatives(&st.axpy(0.5 * dt, &k1), v_alpha, v_beta, t_load, prm)?;
    let k3 = machine_derivatives(&st.axpy(0.5 * dt, &k2), v_alpha, v_beta, t_load, prm)?;
    let k4 = machine_derivatives(&st.axpy(dt, &k3), v_alpha, v_beta, t_load, prm)?;
    let sixth = dt / 6.0;
    let mut next = MachineState {
        psi_s_alpha: st.psi_s_alpha
            + sixth * (k1.psi_s_alpha + 2.0 * (k2.psi_s_alpha + k3.psi_s_alpha) + k4.psi_s_alpha),
        psi_s_beta: st.psi_s_beta
            + sixth * (k1.psi_s_beta + 2.0 * (k2.psi_s_beta + k3.psi_s_beta) + k4.psi_s_beta),
        psi_r_alpha: st.psi_r_alpha
            + sixth * (k1.psi_r_alpha + 2.0 * (k2.psi_r_alpha + k3.psi_r_alpha) + k4.psi_r_alpha),
        psi_r_beta: st.psi_r_beta
            + sixth * (k1.psi_r_beta + 2.0 * (k2.psi_r_beta + k3.psi_r_beta) + k4.psi_r_beta),
        omega_m: st.omega_m + sixth * (k1.omega_m + 2.0 * (k2.omega_m + k3.omega_m) + k4.omega_m),
        theta_m: st.theta_m + sixth * (k1.theta_m + 2.0 * (k2.theta_m + k3.theta_m) + k4.theta_m),
    };
    next.theta_m = wrap_two_pi(next.theta_m);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Small deterministic generator for property-style loops.
    struct Lcg(u64);

    impl Lcg {
        fn next_f64(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }

        fn range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.next_f64()
        }
    }

    #[test]
    fn clarke_a_axis_aligned() {
        let (a, b) = abc_to_alphabeta(10.0, -5.0, -5.0);
        assert!(approx(a, 10.0, 1e-12));
        assert!(approx(b, 0.0, 1e-12));
    }

    #[test]
    fn clarke_zero() {
        assert_eq!(abc_to_alphabeta(0.0, 0.0, 0.0), (0.0, 0.0));
    }

    #[test]
    fn clarke_beta_only() {
        // (xb - xc)/sqrt(3) = 10/sqrt(3)
        let (a, b) = abc_to_alphabeta(0.0, 5.0, -5.0);
        assert!(approx(a, 0.0, 1e-12));
        assert!(approx(b, 5.773502691896258, 1e-12));
    }

    #[test]
    fn inverse_clarke_examples() {
        let (a, b, c) = alphabeta_to_abc(10.0, 0.0);
        assert!(approx(a, 10.0, 1e-12) && approx(b, -5.0, 1e-12) && approx(c, -5.0, 1e-12));
        assert_eq!(alphabeta_to_abc(0.0, 0.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn clarke_round_trip_on_zero_sum_triples() {
        let mut rng = Lcg(0x1234_5678);
        for _ in 0..500 {
            let a = rng.range(-100.0, 100.0);
            let b = rng.range(-100.0, 100.0);
            let c = -a - b;
            let (al, be) = abc_to_alphabeta(a, b, c);
            let (ra, rb, rc) = alphabeta_to_abc(al, be);
            let scale = a.abs().max(b.abs()).max(c.abs()).max(1.0);
            assert!(approx(ra, a, 1e-12 * scale), "{ra} vs {a}");
            assert!(approx(rb, b, 1e-12 * scale), "{rb} vs {b}");
            assert!(approx(rc, c, 1e-12 * scale), "{rc} vs {c}");
        }
    }

    #[test]
    fn switch_voltage_examples() {
        let v1 = SwitchState { sa: true, sb: false, sc: false };
        let (a, b) = switch_to_voltage(v1, 400.0);
        assert!(approx(a, 800.0 / 3.0, 1e-9));
        assert!(approx(b, 0.0, 1e-9));

        let (a, b) = switch_to_voltage(SwitchState::NULL_HIGH, 400.0);
        assert_eq!((a, b), (0.0, 0.0));
        let (a, b) = switch_to_voltage(SwitchState::NULL_LOW, 400.0);
        assert_eq!((a, b), (0.0, 0.0));

        // V2 = (2/3)*400 at 60 degrees
        let v2 = SwitchState { sa: true, sb: true, sc: false };
        let (a, b) = switch_to_voltage(v2, 400.0);
        assert!(approx(a, 400.0 / 3.0, 1e-9), "{a}");
        assert!(approx(b, 400.0 / SQRT3, 1e-9), "{b}");
    }

    #[test]
    fn active_vectors_equal_magnitude_sixty_degrees_apart() {
        let vdc = 565.0;
        for k in 1..=6u8 {
            let sector = Sector::new(k).unwrap();
            let (a, b) = switch_to_voltage(SwitchState::active(sector), vdc);
            let mag = (a * a + b * b).sqrt();
            let ang = wrap_two_pi(b.atan2(a));
            assert!(approx(mag, 2.0 * vdc / 3.0, 1e-9), "magnitude of V{k}");
            assert!(approx(ang, sector.vector_angle(), 1e-12), "angle of V{k}: {ang}");
        }
    }

    #[test]
    fn nearest_null_minimizes_toggles() {
        for k in 1..=6u8 {
            let sw = SwitchState::active(Sector::new(k).unwrap());
            let null = sw.nearest_null();
            assert!(null.is_null());
            assert_eq!(sw.leg_diff(null), 1, "one toggle from any active vector");
        }
        assert_eq!(SwitchState::NULL_LOW.nearest_null(), SwitchState::NULL_LOW);
        assert_eq!(SwitchState::NULL_HIGH.nearest_null(), SwitchState::NULL_HIGH);
    }

    #[test]
    fn sector_offset_wraps() {
        let s1 = Sector::new(1).unwrap();
        assert_eq!(s1.offset(1).get(), 2);
        assert_eq!(s1.offset(-1).get(), 6);
        assert_eq!(s1.offset(-2).get(), 5);
        assert_eq!(Sector::new(6).unwrap().offset(2).get(), 2);
        assert!(Sector::new(0).is_none());
        assert!(Sector::new(7).is_none());
    }

    #[test]
    fn derivatives_zero_state_is_equilibrium() {
        let prm = MachineParams::default();
        let d = machine_derivatives(&MachineState::default(), 0.0, 0.0, 0.0, &prm).unwrap();
        assert_eq!(d, MachineState::default());
    }

    #[test]
    fn derivatives_pure_flux_integral_at_zero_current() {
        let prm = MachineParams::default();
        let d = machine_derivatives(&MachineState::default(), 100.0, 0.0, 0.0, &prm).unwrap();
        assert_eq!(d.psi_s_alpha, 100.0);
        assert_eq!(d.psi_s_beta, 0.0);
        assert_eq!(d.omega_m, 0.0);
        let (ia, ib) = MachineState::default().stator_currents(&prm);
        assert_eq!((ia, ib), (0.0, 0.0));
    }

    #[test]
    fn derivatives_reject_non_finite() {
        let prm = MachineParams::default();
        let mut st = MachineState::default();
        st.psi_s_alpha = f64::NAN;
        assert!(machine_derivatives(&st, 0.0, 0.0, 0.0, &prm).is_err());
        assert!(machine_derivatives(&MachineState::default(), f64::INFINITY, 0.0, 0.0, &prm).is_err());
    }

    #[test]
    fn locked_rotor_current_slope_matches_transient_inductance() {
        // With the rotor held still, the initial stator current slope under a
        // voltage step is v / (sigma*Ls). Pin the shaft with a huge inertia.
        let mut prm = MachineParams::default();
        prm.j = 1e12;
        let v = 100.0;
        let h = 1e-7;
        let st = step_machine(&MachineState::default(), v, 0.0, 0.0, h, &prm).unwrap();
        let (ia, _) = st.stator_currents(&prm);
        let slope = ia / h;
        let expected = v / prm.transient_inductance();
        assert!(
            (slope - expected).abs() / expected < 1e-3,
            "slope {slope}, expected {expected}"
        );
    }

    #[test]
    fn free_spin_down_follows_friction_time_constant() {
        let prm = MachineParams::default();
        let mut st = MachineState { omega_m: 100.0, ..Default::default() };
        let dt = 1e-4;
        let t_end = 0.5;
        let n = (t_end / dt) as usize;
        for _ in 0..n {
            st = step_machine(&st, 0.0, 0.0, 0.0, dt, &prm).unwrap();
        }
        let expected = 100.0 * (-prm.f * t_end / prm.j).exp();
        assert!(
            (st.omega_m - expected).abs() < 1e-7,
            "omega {} vs closed form {expected}",
            st.omega_m
        );
    }

    #[test]
    fn sinusoidal_supply_reaches_near_synchronous_speed() {
        // Direct line start at 50 Hz: no-load speed settles within 2% of
        // 2*pi*50/p mechanical rad/s (slip only covers friction).
        let prm = MachineParams::default();
        let mut st = MachineState::default();
        let w_e = TWO_PI * 50.0;
        let v_peak = 326.6;
        let h = 1e-5;
        let n = (1.0 / h) as usize;
        let mut tail = Vec::new();
        for k in 0..n {
            let t = k as f64 * h;
            let (va, vb) = (v_peak * (w_e * t).cos(), v_peak * (w_e * t).sin());
            st = step_machine(&st, va, vb, 0.0, h, &prm).unwrap();
            if k >= n - (0.1 / h) as usize {
                tail.push(st.omega_m);
            }
        }
        let mean: f64 = tail.iter().sum::<f64>() / tail.len() as f64;
        let sync = w_e / prm.pole_pairs as f64;
        assert!(
            (mean - sync).abs() / sync < 0.02,
            "mean speed {mean} vs synchronous {sync}"
        );
    }

    #[test]
    fn stator_flux_magnitude_tracks_volts_per_radian_with_zero_rs() {
        // With Rs = 0 the stator flux is exactly the voltage integral; seed
        // the flux on the steady orbit and check |psi_s| = V/w throughout.
        let mut prm = MachineParams::default();
        prm.rs = 0.0;
        let w_e = TWO_PI * 50.0;
        let v_peak = 250.0;
        let target = v_peak / w_e;
        let mut st = MachineState { psi_s_beta: -target, ..Default::default() };
        let h = 1e-5;
        let n = (0.5 / h) as usize;
        for k in 0..n {
            let t = k as f64 * h;
            let (va, vb) = (v_peak * (w_e * t).cos(), v_peak * (w_e * t).sin());
            st = step_machine(&st, va, vb, 0.0, h, &prm).unwrap();
            if k > (0.1 / h) as usize {
                let mag = (st.psi_s_alpha.powi(2) + st.psi_s_beta.powi(2)).sqrt();
                assert!(
                    (mag - target).abs() / target < 0.005,
                    "flux magnitude {mag} vs {target} at step {k}"
                );
            }
        }
    }

    #[test]
    fn energy_balance_per_step() {
        // With no load and no friction, input power minus Joule losses must
        // equal the growth of stored magnetic plus kinetic energy.
        let mut prm = MachineParams::default();
        prm.f = 0.0;
        let w_e = TWO_PI * 50.0;
        let v_peak = 230.0;
        let h = 1e-5;

        let energy = |st: &MachineState| {
            let (isa, isb) = st.stator_currents(&prm);
            let (ira, irb) = st.rotor_currents(&prm);
            let w_mag = 0.75
                * (st.psi_s_alpha * isa + st.psi_s_beta * isb + st.psi_r_alpha * ira
                    + st.psi_r_beta * irb);
            let w_kin = 0.5 * prm.j * st.omega_m * st.omega_m;
            w_mag + w_kin
        };
        let net_power = |st: &MachineState, va: f64, vb: f64| {
            let (isa, isb) = st.stator_currents(&prm);
            let (ira, irb) = st.rotor_currents(&prm);
            let p_in = 1.5 * (va * isa + vb * isb);
            let p_loss = 1.5 * (prm.rs * (isa * isa + isb * isb) + prm.rr * (ira * ira + irb * irb));
            p_in - p_loss
        };

        let mut st = MachineState::default();
        let n = (0.3 / h) as usize;
        for k in 0..n {
            let t = k as f64 * h;
            let (va, vb) = (v_peak * (w_e * t).cos(), v_peak * (w_e * t).sin());
            let before = energy(&st);
            let p0 = net_power(&st, va, vb);
            let next = step_machine(&st, va, vb, 0.0, h, &prm).unwrap();
            let p1 = net_power(&next, va, vb);
            let delta = energy(&next) - before;
            let audit = h * 0.5 * (p0 + p1);
            let scale = delta.abs().max(h * p0.abs()).max(1e-9);
            assert!(
                (delta - audit).abs() <= 0.01 * scale,
                "step {k}: dW {delta} vs trapezoid {audit}"
            );
            st = next;
        }
    }

    #[test]
    fn params_validation_rejects_bad_values() {
        let mut prm = MachineParams::default();
        prm.lm = -0.1;
        assert!(prm.validate().is_err());
        let mut prm = MachineParams::default();
        prm.pole_pairs = 0;
        assert!(prm.validate().is_err());
        assert!(MachineParams::default().validate().is_ok());
    }

    #[test]
    fn wrap_two_pi_range() {
        assert!(approx(wrap_two_pi(-0.1), TWO_PI - 0.1, 1e-12));
        assert_eq!(wrap_two_pi(0.0), 0.0);
        assert!(wrap_two_pi(TWO_PI) < 1e-15);
        assert!(approx(wrap_two_pi(7.0), 7.0 - TWO_PI, 1e-12));
    }
}
