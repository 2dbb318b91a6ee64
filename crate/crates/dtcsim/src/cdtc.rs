//! Conventional direct torque control: a two-level flux comparator, a
//! three-level torque comparator, and the six-sector optimum voltage vector
//! table.

use crate::plant::{Sector, SwitchState};

/// Comparator memory and half-bands.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisState {
    /// Latched flux comparator output; `true` demands more flux.
    pub flux_out: bool,
    /// Latched torque comparator output: -1, 0, or +1.
    pub torque_out: i8,
    /// Flux half-band, Wb.
    pub flux_band: f64,
    /// Torque half-band, N m.
    pub torque_band: f64,
}

impl HysteresisState {
    pub fn new(flux_band: f64, torque_band: f64) -> Self {
        assert!(flux_band > 0.0 && torque_band > 0.0, "hysteresis bands must be positive");
        HysteresisState { flux_out: true, torque_out: 0, flux_band, torque_band }
    }
}

/// Two-level flux comparator: 1 above the band, 0 below it, previous output
/// held inside it.
pub fn flux_hysteresis(err: f64, st: &mut HysteresisState) -> bool {
    if err > st.flux_band {
        st.flux_out = true;
    } else if err < -st.flux_band {
        st.flux_out = false;
    }
    st.flux_out
}

/// Three-level torque comparator.
///
/// Saturates to +1/-1 beyond the band; a saturated output drops to 0 when
/// the error crosses zero and re-arms only past the opposite band edge.
pub fn torque_hysteresis(err: f64, st: &mut HysteresisState) -> i8 {
    if err > st.torque_band {
        st.torque_out = 1;
    } else if err < -st.torque_band {
        st.torque_out = -1;
    } else if (st.torque_out > 0 && err <= 0.0) || (st.torque_out < 0 && err >= 0.0) {
        st.torque_out = 0;
    }
    st.torque_out
}

/// The classical six-sector switching table.
///
/// With the active vectors numbered counterclockwise from the alpha axis and
/// the flux in sector k: (flux up, torque up) selects V(k+1), (up, down)
/// V(k-1), (down, up) V(k+2), (down, down) V(k-2). The selected vector's
/// radial component then matches the flux demand and its tangential component
/// the torque demand anywhere inside the sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchTable {
    /// `entries[sector-1][flux_up as usize][0 => torque down, 1 => torque up]`
    entries: [[[SwitchState; 2]; 2]; 6],
}

impl Default for SwitchTable {
    fn default() -> Self {
        Self::classical()
    }
}

impl SwitchTable {
    pub fn classical() -> Self {
        let mut entries = [[[SwitchState::NULL_LOW; 2]; 2]; 6];
        for k in 1..=6u8 {
            let sector = Sector::new(k).unwrap();
            for (f, flux_up) in [(0usize, false), (1, true)] {
                for (t, torque_up) in [(0usize, false), (1, true)] {
                    let step = match (flux_up, torque_up) {
                        (true, true) => 1,
                        (true, false) => -1,
                        (false, true) => 2,
                        (false, false) => -2,
                    };
                    entries[(k - 1) as usize][f][t] = SwitchState::active(sector.offset(step));
                }
            }
        }
        SwitchTable { entries }
    }

    /// Vector for the given comparator outputs and flux sector. A zero torque
    /// demand selects the null vector reachable from `prev` with the fewest
    /// leg toggles.
    pub fn select_vector(
        &self,
        flux_up: bool,
        torque_cmd: i8,
        sector: Sector,
        prev: SwitchState,
    ) -> SwitchState {
        if torque_cmd == 0 {
            return prev.nearest_null();
        }
        let t = usize::from(torque_cmd > 0);
        self.entries[(sector.get() - 1) as usize][usize::from(flux_up)][t]
    }
}
