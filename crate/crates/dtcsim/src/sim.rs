//! Closed-loop scheduler: speed PI, controller dispatch, plant sub-stepping,
//! and time-series logging.
//!
//! Each control period samples the plant terminals, advances the flux
//! observer with the voltage commanded over the previous period, runs the
//! speed PI, lets the selected controller pick either a single switch state
//! (held for the whole period) or a seven-segment SVM pattern, and integrates
//! the plant through the resulting piecewise-constant voltage with RK4
//! sub-steps no longer than a fifth of the control period.

use crate::cdtc::{flux_hysteresis, torque_hysteresis, HysteresisState, SwitchTable};
use crate::estimator::{update_flux, FluxEstimate};
use crate::flsvm::{
    build_reference, dwell_times, infer_delta_angle, svm_sector, switching_pattern, FuzzyConfig,
    RuleTable, ZERO_ROW_NULL_SHARE,
};
use crate::plant::{
    alphabeta_to_abc, step_machine, switch_to_voltage, MachineParams, MachineState, Sector,
    SwitchState,
};
use crate::SimError;

/// Open-loop flux-build phase cap; the closed loop starts earlier if the
/// estimated flux reaches 95% of its reference.
pub const FLUX_BUILD_MAX_S: f64 = 0.010;

const FLUX_BUILD_FRACTION: f64 = 0.95;

/// Which torque controller closes the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    /// Hysteresis comparators plus the switching table.
    Cdtc,
    /// Fuzzy inference plus discrete space-vector modulation.
    Flsvm,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Cdtc => "cdtc",
            ControllerKind::Flsvm => "flsvm",
        }
    }
}

/// Piecewise-constant reference profile; the value at `t` is the last
/// breakpoint at or before `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    points: Vec<(f64, f64)>,
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile { points: vec![(0.0, value)] }
    }

    /// Breakpoints must start at t = 0 and be strictly increasing in time.
    pub fn steps(points: Vec<(f64, f64)>) -> Result<Self, SimError> {
        if points.is_empty() || points[0].0 != 0.0 {
            return Err(SimError::InvalidConfig("profile must start with a breakpoint at t = 0".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(SimError::InvalidConfig("profile breakpoints must be strictly increasing".into()));
            }
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(SimError::InvalidConfig("profile breakpoints must be finite".into()));
        }
        Ok(Profile { points })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.points
            .iter()
            .rev()
            .find(|(tp, _)| *tp <= t)
            .map(|(_, v)| *v)
            .unwrap_or(self.points[0].1)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Complete description of one closed-loop experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub controller: ControllerKind,
    /// Mechanical speed reference, rad/s.
    pub speed_ref: Profile,
    /// Load torque, N m.
    pub load: Profile,
    /// Stator flux reference, Wb.
    pub flux_ref: f64,
    /// Run length, s.
    pub t_end: f64,
    /// Control period, s.
    pub dt_ctrl: f64,
    pub machine: MachineParams,
    /// Flux comparator half-band, Wb.
    pub flux_band: f64,
    /// Torque comparator half-band, N m.
    pub torque_band: f64,
    pub fuzzy: FuzzyConfig,
    pub rules: RuleTable,
    /// Speed PI proportional gain, N m per rad/s.
    pub kp: f64,
    /// Speed PI integral gain, N m per rad.
    pub ki: f64,
    /// Torque reference clamp, N m.
    pub torque_max: f64,
}

impl Default for ScenarioConfig {
    /// The reference experiment: 1500 rpm speed reference with a 0 to 5 N m
    /// load step at 0.5 s, 0.8 Wb flux, 50 us control period, 1 s run.
    fn default() -> Self {
        ScenarioConfig {
            controller: ControllerKind::Flsvm,
            speed_ref: Profile::constant(crate::plant::rpm_to_rad_s(1500.0)),
            load: Profile::steps(vec![(0.0, 0.0), (0.5, 5.0)]).unwrap(),
            flux_ref: 0.8,
            t_end: 1.0,
            dt_ctrl: 50e-6,
            machine: MachineParams::default(),
            flux_band: 0.01,
            torque_band: 0.25,
            fuzzy: FuzzyConfig::default(),
            rules: RuleTable::default(),
            kp: 10.0,
            ki: 50.0,
            torque_max: 27.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.machine.validate()?;
        self.fuzzy.validate()?;
        self.rules.validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SimError::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_ctrl > 0.0 && self.dt_ctrl.is_finite()) {
            return Err(SimError::InvalidConfig(format!("dt_ctrl must be positive, got {}", self.dt_ctrl)));
        }
        if !(self.flux_ref > 0.0 && self.flux_ref.is_finite()) {
            return Err(SimError::InvalidConfig(format!("flux_ref must be positive, got {}", self.flux_ref)));
        }
        if !(self.flux_band > 0.0 && self.torque_band > 0.0) {
            return Err(SimError::InvalidConfig("hysteresis bands must be positive".into()));
        }
        if !(self.kp >= 0.0 && self.ki >= 0.0) {
            return Err(SimError::InvalidConfig("PI gains must be non-negative".into()));
        }
        if !(self.torque_max > 0.0) {
            return Err(SimError::InvalidConfig(format!("torque_max must be positive, got {}", self.torque_max)));
        }
        Ok(())
    }

    /// Number of control periods in the run; the log then holds one more
    /// sample than this (the row at t = 0).
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt_ctrl + 1e-9).floor() as usize
    }
}

/// One record of the uniformly sampled run log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Mechanical speed, rad/s.
    pub omega_m: f64,
    /// Speed reference, rad/s.
    pub omega_ref: f64,
    /// Speed-loop torque demand, N m.
    pub torque_ref: f64,
    /// Plant (ground truth) electromagnetic torque, N m.
    pub te_plant: f64,
    /// Observer torque estimate, N m.
    pub te_est: f64,
    /// Estimated flux magnitude, Wb.
    pub lambda_mag: f64,
    /// Estimated flux angle, rad; 0 while the flux vector is undefined.
    pub theta: f64,
    /// Flux sector 1..6; 0 while undefined.
    pub sector: u8,
    pub ia: f64,
    pub ib: f64,
    pub ic: f64,
    /// Switching decision applied over the following period; under `flsvm`
    /// this is the first active vector of the pattern (V0 for null periods).
    pub sa: bool,
    pub sb: bool,
    pub sc: bool,
    /// Fuzzy angle advance, degrees; 0 under `cdtc`.
    pub delta_theta_deg: f64,
    /// Flux comparator output; `false` under `flsvm`.
    pub flux_cmp: bool,
    /// Torque comparator output; 0 under `flsvm`.
    pub torque_cmp: i8,
}

/// Uniformly sampled record of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesLog {
    pub config: ScenarioConfig,
    pub samples: Vec<Sample>,
}

/// One speed-PI update with output clamping and conditional anti-windup: the
/// integrator freezes while the output is saturated and the error keeps
/// pushing into the same limit.
///
/// Returns the clamped torque reference and the next integrator state.
pub fn pi_step(speed_err: f64, integral: f64, kp: f64, ki: f64, t_max: f64, dt: f64) -> (f64, f64) {
    assert!(dt > 0.0 && t_max > 0.0, "pi_step requires dt > 0 and t_max > 0");
    let raw = kp * speed_err + integral;
    let out = raw.clamp(-t_max, t_max);
    let pushing_deeper = (raw > t_max && speed_err > 0.0) || (raw < -t_max && speed_err < 0.0);
    let next_integral = if pushing_deeper { integral } else { integral + ki * speed_err * dt };
    (out, next_integral)
}

/// Closed-loop simulation state for one scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ScenarioConfig,
    table: SwitchTable,
    state: MachineState,
    est: FluxEstimate,
    hys: HysteresisState,
    pi_integral: f64,
    prev_switch: SwitchState,
    prev_vbar: (f64, f64),
    building_flux: bool,
    step_index: u64,
    dt_plant_max: f64,
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let hys = HysteresisState::new(cfg.flux_band, cfg.torque_band);
        let dt_plant_max = cfg.dt_ctrl / 5.0;
        Ok(Simulation {
            table: SwitchTable::classical(),
            state: MachineState::default(),
            est: FluxEstimate::at_rest(),
            hys,
            pi_integral: 0.0,
            prev_switch: SwitchState::NULL_LOW,
            prev_vbar: (0.0, 0.0),
            building_flux: true,
            step_index: 0,
            dt_plant_max,
            cfg,
        })
    }

    pub fn state(&self) -> &MachineState {
        &self.state
    }

    pub fn estimate(&self) -> &FluxEstimate {
        &self.est
    }

    /// Advances the plant through `duration` of constant voltage using RK4
    /// sub-steps no longer than `dt_plant_max`.
    fn advance(&mut self, v: (f64, f64), t_load: f64, duration: f64) -> Result<(), SimError> {
        let n = ((duration / self.dt_plant_max) - 1e-9).ceil().max(1.0) as usize;
        let h = duration / n as f64;
        for _ in 0..n {
            self.state = step_machine(&self.state, v.0, v.1, t_load, h, &self.cfg.machine)?;
        }
        Ok(())
    }

    /// One control cycle: estimator update, speed PI, controller dispatch,
    /// plant advance, and the log record for the instant the cycle started.
    ///
    /// During the initial flux-build phase a fixed active vector (V1) is held
    /// open loop and the PI stays reset. If the flux vector ever has no
    /// defined angle in closed loop (for example with a zero-voltage bus) the
    /// output falls back to a null vector and the machine coasts.
    pub fn control_step(&mut self) -> Result<Sample, SimError> {
        let dt = self.cfg.dt_ctrl;
        let t = self.step_index as f64 * dt;
        if !self.state.is_finite() {
            return Err(SimError::NumericalBlowUp { t, norm: self.state.norm() });
        }
        let prm = self.cfg.machine.clone();

        let (i_alpha, i_beta) = self.state.stator_currents(&prm);
        if self.step_index > 0 {
            self.est = update_flux(
                &self.est,
                self.prev_vbar.0,
                self.prev_vbar.1,
                i_alpha,
                i_beta,
                prm.rs,
                dt,
                prm.pole_pairs,
            )?;
        }

        // measurement snapshot for the log before the plant moves on
        let omega_m = self.state.omega_m;
        let te_plant = self.state.torque(&prm);
        let (ia, ib, ic) = alphabeta_to_abc(i_alpha, i_beta);
        let est = self.est;

        let omega_ref = self.cfg.speed_ref.value(t);
        let t_load = self.cfg.load.value(t);

        if self.building_flux
            && (est.lambda_mag >= FLUX_BUILD_FRACTION * self.cfg.flux_ref || t >= FLUX_BUILD_MAX_S)
        {
            self.building_flux = false;
        }

        let mut torque_ref = 0.0;
        let mut delta_theta_deg = 0.0;
        let mut flux_cmp = false;
        let mut torque_cmp = 0i8;
        let logged_switch;

        if self.building_flux {
            let sw = SwitchState::active(Sector::new(1).unwrap());
            let v = switch_to_voltage(sw, prm.vdc);
            self.advance(v, t_load, dt)?;
            self.prev_vbar = v;
            self.prev_switch = sw;
            logged_switch = sw;
        } else {
            let (t_ref, next_integral) = pi_step(
                omega_ref - omega_m,
                self.pi_integral,
                self.cfg.kp,
                self.cfg.ki,
                self.cfg.torque_max,
                dt,
            );
            torque_ref = t_ref;
            self.pi_integral = next_integral;

            match (self.cfg.controller, est.polar) {
                (_, None) => {
                    let sw = self.prev_switch.nearest_null();
                    self.advance((0.0, 0.0), t_load, dt)?;
                    self.prev_vbar = (0.0, 0.0);
                    self.prev_switch = sw;
                    logged_switch = sw;
                }
                (ControllerKind::Cdtc, Some(polar)) => {
                    flux_cmp = flux_hysteresis(self.cfg.flux_ref - est.lambda_mag, &mut self.hys);
                    torque_cmp = torque_hysteresis(torque_ref - est.torque, &mut self.hys);
                    let sw = self.table.select_vector(flux_cmp, torque_cmp, polar.sector, self.prev_switch);
                    let v = switch_to_voltage(sw, prm.vdc);
                    self.advance(v, t_load, dt)?;
                    self.prev_vbar = v;
                    self.prev_switch = sw;
                    logged_switch = sw;
                }
                (ControllerKind::Flsvm, Some(_)) => {
                    let inference = infer_delta_angle(
                        self.cfg.flux_ref - est.lambda_mag,
                        torque_ref - est.torque,
                        &self.cfg.fuzzy,
                        &self.cfg.rules,
                    );
                    delta_theta_deg = inference.delta_angle_deg;
                    let torque_active = inference.zero_row_share <= ZERO_ROW_NULL_SHARE;
                    let cmd = build_reference(
                        (est.lambda_alpha, est.lambda_beta),
                        self.cfg.flux_ref,
                        inference.delta_angle_deg,
                        (i_alpha, i_beta),
                        prm.rs,
                        prm.vdc,
                        torque_active,
                        dt,
                    );
                    let (t1, t2, t0) = dwell_times(&cmd)?;
                    let (sector, _) = svm_sector(cmd.ref_angle);
                    let pattern = switching_pattern(sector, t1, t2, t0, dt)?;
                    for (sw, dur) in &pattern {
                        self.advance(switch_to_voltage(*sw, prm.vdc), t_load, *dur)?;
                    }
                    self.prev_vbar = (
                        cmd.ref_mag * prm.vdc * cmd.ref_angle.cos(),
                        cmd.ref_mag * prm.vdc * cmd.ref_angle.sin(),
                    );
                    self.prev_switch = pattern.last().map(|(s, _)| *s).unwrap_or(SwitchState::NULL_LOW);
                    logged_switch = pattern
                        .iter()
                        .find(|(s, _)| !s.is_null())
                        .map(|(s, _)| *s)
                        .unwrap_or(SwitchState::NULL_LOW);
                }
            }
        }

        self.step_index += 1;
        Ok(Sample {
            t,
            omega_m,
            omega_ref,
            torque_ref,
            te_plant,
            te_est: est.torque,
            lambda_mag: est.lambda_mag,
            theta: est.polar.map_or(0.0, |p| p.theta),
            sector: est.polar.map_or(0, |p| p.sector.get()),
            ia,
            ib,
            ic,
            sa: logged_switch.sa,
            sb: logged_switch.sb,
            sc: logged_switch.sc,
            delta_theta_deg,
            flux_cmp,
            torque_cmp,
        })
    }
}

/// Runs a scenario from rest and returns its log.
///
/// The run starts with the open-loop flux-build phase (V1 held until the
/// estimated flux reaches 95% of its reference, at most 10 ms) and then the
/// closed loop until `t_end`. The log has `step_count() + 1` samples at
/// multiples of the control period.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<TimeSeriesLog, SimError> {
    let mut sim = Simulation::new(cfg.clone())?;
    let n = cfg.step_count();
    let mut samples = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        samples.push(sim.control_step()?);
    }
    Ok(TimeSeriesLog { config: cfg.clone(), samples })
}
