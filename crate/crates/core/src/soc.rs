//! Coulomb-counting state-of-charge estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SocState {
    pub soc: f64,
    /// The last update would have pushed soc above 1.
    pub saturated_high: bool,
    /// The last update would have pushed soc below 0.
    pub saturated_low: bool,
}

impl SocState {
    pub fn new(soc: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&soc) {
            return Err(Error::domain(format!("soc {soc} outside [0, 1]")));
        }
        Ok(SocState {
            soc,
            ..Default::default()
        })
    }
}

/// Change in SOC over one step of constant current.
///
/// Charging current (positive) is scaled by `eta_charge`; discharge is
/// counted in full.
pub fn soc_delta(i_pack: f64, dt: f64, capacity_ah: f64, eta_charge: f64) -> f64 {
    let eta = if i_pack > 0.0 { eta_charge } else { 1.0 };
    eta * i_pack * dt / (3600.0 * capacity_ah)
}

/// Advance the estimator by `dt` seconds at pack current `i_pack`.
///
/// Returns the new state and the unclamped SOC, which the caller needs for
/// locating bound crossings inside the step.
pub fn coulomb_step_unclamped(
    state: SocState,
    i_pack: f64,
    dt: f64,
    capacity_ah: f64,
    eta_charge: f64,
) -> Result<(SocState, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("step must be > 0 s, got {dt}")));
    }
    if !(capacity_ah > 0.0) || !capacity_ah.is_finite() {
        return Err(Error::domain(format!(
            "capacity must be > 0 Ah, got {capacity_ah}"
        )));
    }
    if !(eta_charge > 0.0 && eta_charge <= 1.0) {
        return Err(Error::domain(format!(
            "eta_charge must lie in (0, 1], got {eta_charge}"
        )));
    }
    let raw = state.soc + soc_delta(i_pack, dt, capacity_ah, eta_charge);
    let next = SocState {
        soc: raw.clamp(0.0, 1.0),
        saturated_high: raw > 1.0,
        saturated_low: raw < 0.0,
    };
    Ok((next, raw))
}

pub fn coulomb_step(
    state: SocState,
    i_pack: f64,
    dt: f64,
    capacity_ah: f64,
    eta_charge: f64,
) -> Result<SocState> {
    coulomb_step_unclamped(state, i_pack, dt, capacity_ah, eta_charge).map(|(s, _)| s)
}
