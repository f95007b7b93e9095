//! CC-CV charging law and the charge/discharge hysteresis relay.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::PackConfig;

/// Charge acceptance that reproduces the published 92S9P charge time at
/// 15 A (210.15 Ah / (16.2 h * 15 A)).
pub const PAPER_ETA_CHARGE: f64 = 0.86481;

/// Below this resistance the CV taper is replaced by a hard cutoff.
pub const MIN_TAPER_RESISTANCE: f64 = 1e-9;

/// Default CV termination current as a fraction of the CC setpoint.
pub const DEFAULT_CUTOFF_FRACTION: f64 = 1.0 / 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeMode {
    CcOnly,
    #[default]
    CcCv,
}

impl ChargeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ChargeMode::CcOnly => "cc_only",
            ChargeMode::CcCv => "cc_cv",
        }
    }
}

impl fmt::Display for ChargeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChargeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cc_only" => Ok(ChargeMode::CcOnly),
            "cc_cv" => Ok(ChargeMode::CcCv),
            other => Err(Error::domain(format!(
                "unknown charge mode {other:?} (expected \"cc_only\" or \"cc_cv\")"
            ))),
        }
    }
}

/// Charger setpoints and cycling thresholds. Currents are pack-level
/// magnitudes in amperes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChargerProfile {
    pub i_charge: f64,
    /// Defaults to `i_charge`.
    pub i_discharge: Option<f64>,
    pub mode: ChargeMode,
    /// CV termination current. Defaults to `i_charge / 20`.
    pub i_cutoff: Option<f64>,
    pub soc_high: f64,
    pub soc_low: f64,
    pub eta_charge: f64,
}

impl Default for ChargerProfile {
    fn default() -> Self {
        ChargerProfile {
            i_charge: 15.0,
            i_discharge: None,
            mode: ChargeMode::CcCv,
            i_cutoff: None,
            soc_high: 1.0,
            soc_low: 0.0,
            eta_charge: 1.0,
        }
    }
}

impl ChargerProfile {
    /// CC-only, full-range cycling with the calibrated charge acceptance.
    pub fn paper(i_charge: f64) -> Self {
        ChargerProfile {
            i_charge,
            ..Default::default()
        }
        .with_paper_calibration()
    }

    /// Apply the reference calibration on top of existing setpoints: CC-only,
    /// full-range relay, calibrated charge acceptance.
    pub fn with_paper_calibration(mut self) -> Self {
        self.mode = ChargeMode::CcOnly;
        self.eta_charge = PAPER_ETA_CHARGE;
        self.soc_high = 1.0;
        self.soc_low = 0.0;
        self
    }

    /// Same charge and discharge current.
    pub fn with_current(mut self, amps: f64) -> Self {
        self.i_charge = amps;
        self.i_discharge = Some(amps);
        self
    }

    pub fn discharge_current(&self) -> f64 {
        self.i_discharge.unwrap_or(self.i_charge)
    }

    pub fn cutoff_current(&self) -> f64 {
        self.i_cutoff
            .unwrap_or(self.i_charge * DEFAULT_CUTOFF_FRACTION)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("charger profile", reason));
        if !self.i_charge.is_finite() || self.i_charge < 0.0 {
            return bad(format!("i_charge must be >= 0, got {}", self.i_charge));
        }
        let i_dis = self.discharge_current();
        if !i_dis.is_finite() || i_dis < 0.0 {
            return bad(format!("i_discharge must be >= 0, got {i_dis}"));
        }
        let cut = self.cutoff_current();
        if !cut.is_finite() || cut < 0.0 {
            return bad(format!("i_cutoff must be >= 0, got {cut}"));
        }
        if !(0.0 <= self.soc_low && self.soc_low < self.soc_high && self.soc_high <= 1.0) {
            return bad(format!(
                "need 0 <= soc_low < soc_high <= 1, got soc_low={} soc_high={}",
                self.soc_low, self.soc_high
            ));
        }
        if !(self.eta_charge > 0.0 && self.eta_charge <= 1.0) {
            return bad(format!(
                "eta_charge must lie in (0, 1], got {}",
                self.eta_charge
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Charging,
    Discharging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RelayState {
    pub phase: Phase,
}

impl RelayState {
    pub fn charging() -> Self {
        RelayState {
            phase: Phase::Charging,
        }
    }

    pub fn discharging() -> Self {
        RelayState {
            phase: Phase::Discharging,
        }
    }
}

/// Which part of the charging law produced the current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlRegion {
    Cc,
    Cv,
    Idle,
}

/// Pack charging current demanded by the CC-CV law at the given SOC.
pub fn cc_cv_command(
    profile: &ChargerProfile,
    config: &PackConfig,
    soc: f64,
) -> Result<(f64, ControlRegion)> {
    let i_cc = profile.i_charge;
    let cc = if i_cc > 0.0 {
        (i_cc, ControlRegion::Cc)
    } else {
        (0.0, ControlRegion::Idle)
    };
    if profile.mode == ChargeMode::CcOnly {
        return Ok(cc);
    }

    let cell = &config.cell;
    let ocv = cell.ocv(soc)?;
    let p = f64::from(config.p);
    if cell.r_internal < MIN_TAPER_RESISTANCE {
        return Ok(if ocv >= cell.v_cv {
            (0.0, ControlRegion::Cv)
        } else {
            cc
        });
    }
    if ocv + (i_cc / p) * cell.r_internal <= cell.v_cv {
        return Ok(cc);
    }
    let i_cv = p * (cell.v_cv - ocv) / cell.r_internal;
    Ok((i_cv.clamp(0.0, i_cc), ControlRegion::Cv))
}

/// Two-threshold relay: switches to discharge at `soc_high`, back to charge
/// at `soc_low`, otherwise holds.
pub fn relay_step(state: RelayState, soc: f64, profile: &ChargerProfile) -> RelayState {
    match state.phase {
        Phase::Charging if soc >= profile.soc_high => RelayState::discharging(),
        Phase::Discharging if soc <= profile.soc_low => RelayState::charging(),
        _ => state,
    }
}

/// Signed pack current (charging positive) for the current relay phase.
pub fn commanded_current(
    state: RelayState,
    profile: &ChargerProfile,
    config: &PackConfig,
    soc: f64,
) -> Result<(f64, ControlRegion)> {
    match state.phase {
        Phase::Charging => cc_cv_command(profile, config, soc),
        Phase::Discharging => Ok((-profile.discharge_current(), ControlRegion::Idle)),
    }
}
