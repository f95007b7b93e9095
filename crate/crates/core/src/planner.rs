//! Ranking of series/parallel arrangements of a fixed cell budget by
//! predicted time to full charge.
//!
//! At a fixed pack current the time to fill the pack grows with the number
//! of parallel strings, so without a supply power ceiling the tallest,
//! thinnest arrangement always wins. Voltage and power ceilings make the
//! trade-off explicit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::CellSpec;
use crate::control::ChargerProfile;
use crate::engine::time_to_full_charge;
use crate::error::{Error, Result};
use crate::topology::{enumerate_factorizations, PackConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConstraints {
    /// A
    pub i_max: f64,
    /// Charger voltage ceiling, compared against `s * v_cv`.
    pub v_max: Option<f64>,
    /// Supply power ceiling, W.
    pub power_max: Option<f64>,
    pub require_cell_conservation: bool,
}

impl PlannerConstraints {
    pub fn current_only(i_max: f64) -> Self {
        PlannerConstraints {
            i_max,
            v_max: None,
            power_max: None,
            require_cell_conservation: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("planner constraints", reason));
        if !(self.i_max > 0.0) || !self.i_max.is_finite() {
            return bad(format!("i_max must be > 0, got {}", self.i_max));
        }
        if let Some(v) = self.v_max {
            if !(v > 0.0) {
                return bad(format!("v_max must be > 0, got {v}"));
            }
        }
        if let Some(w) = self.power_max {
            if !(w > 0.0) {
                return bad(format!("power_max must be > 0, got {w}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub s: u32,
    pub p: u32,
    /// Hours; infinite when no charging current is available.
    pub predicted_charge_time: f64,
    /// Pack current the prediction assumes, A.
    pub effective_current: f64,
    pub nominal_voltage: f64,
    pub cv_voltage: f64,
    pub feasible: bool,
    pub infeasibility_reason: Option<String>,
}

/// Feasible entries first, by ascending predicted time then smaller `s`;
/// infeasible entries after them by ascending `s`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedPlan {
    pub entries: Vec<PlanEntry>,
}

impl RankedPlan {
    pub fn feasible(&self) -> impl Iterator<Item = &PlanEntry> + '_ {
        self.entries.iter().filter(|e| e.feasible)
    }

    pub fn best(&self) -> Option<&PlanEntry> {
        self.feasible().next()
    }
}

/// Charging current the supply can push into this pack.
pub fn effective_current(
    config: &PackConfig,
    profile: &ChargerProfile,
    constraints: &PlannerConstraints,
) -> Result<f64> {
    let mut i = constraints.i_max.min(profile.i_charge);
    if let Some(w) = constraints.power_max {
        i = i.min(w / config.nominal_voltage()?);
    }
    Ok(i)
}

/// Closed-form CC time to fill the pack, hours. Exact in CC-only mode and a
/// lower bound under CC-CV.
pub fn predict_charge_time(
    config: &PackConfig,
    profile: &ChargerProfile,
    constraints: &PlannerConstraints,
) -> Result<f64> {
    let i = effective_current(config, profile, constraints)?;
    if !(i > 0.0) {
        return Err(Error::domain(format!(
            "{config}: no charging current available (effective current {i} A)"
        )));
    }
    Ok(config.capacity() / (i * profile.eta_charge))
}

pub fn rank(
    n_cells: u64,
    cell: &CellSpec,
    profile: &ChargerProfile,
    constraints: &PlannerConstraints,
) -> Result<RankedPlan> {
    constraints.validate()?;
    cell.validate()?;
    profile.validate()?;

    let mut entries = Vec::new();
    for (s, p) in enumerate_factorizations(n_cells)? {
        let (Ok(s), Ok(p)) = (u32::try_from(s), u32::try_from(p)) else {
            continue;
        };
        let config = PackConfig::new(s, p, cell.clone())?;
        let cv_voltage = config.cv_voltage();
        let i_eff = effective_current(&config, profile, constraints)?;
        let mut reason = None;
        if constraints.require_cell_conservation && config.total_cells() != n_cells {
            reason = Some(format!("cell count {} ≠ {n_cells}", config.total_cells()));
        } else if let Some(v_max) = constraints.v_max.filter(|&v| cv_voltage > v) {
            reason = Some(format!(
                "voltage ceiling: {cv_voltage:.1} V exceeds {v_max:.1} V"
            ));
        }
        let predicted = match predict_charge_time(&config, profile, constraints) {
            Ok(h) => h,
            Err(_) => {
                reason.get_or_insert_with(|| "no charging current available".to_string());
                f64::INFINITY
            }
        };
        entries.push(PlanEntry {
            s,
            p,
            predicted_charge_time: predicted,
            effective_current: i_eff,
            nominal_voltage: config.nominal_voltage()?,
            cv_voltage,
            feasible: reason.is_none(),
            infeasibility_reason: reason,
        });
    }

    entries.sort_by(|a, b| {
        b.feasible
            .cmp(&a.feasible)
            .then_with(|| {
                if a.feasible {
                    a.predicted_charge_time.total_cmp(&b.predicted_charge_time)
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .then(a.s.cmp(&b.s))
    });
    Ok(RankedPlan { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub s: u32,
    pub p: u32,
    pub predicted: f64,
    /// `None` when the simulation never reached full charge.
    pub simulated: Option<f64>,
    /// `(simulated - predicted) / predicted`.
    pub relative_delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub top_k: usize,
    pub dt: f64,
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            top_k: usize::MAX,
            dt: 1.0,
            parallel: true,
        }
    }
}

/// Re-run the best `top_k` feasible entries through the time-domain
/// simulator and compare against the closed-form prediction.
pub fn verify_rank(
    plan: &RankedPlan,
    cell: &CellSpec,
    profile: &ChargerProfile,
    options: VerifyOptions,
) -> Result<Vec<Discrepancy>> {
    let picked: Vec<&PlanEntry> = plan.feasible().take(options.top_k).collect();
    let check = |e: &&PlanEntry| -> Result<Discrepancy> {
        let config = PackConfig::new(e.s, e.p, cell.clone())?;
        let run_profile = profile.clone().with_current(e.effective_current);
        // CV taper only lengthens the charge; leave room for it.
        let horizon = (e.predicted_charge_time * 3.0 + 1.0) * 3600.0;
        let simulated = time_to_full_charge(&config, &run_profile, horizon, options.dt, 0.0)?;
        Ok(Discrepancy {
            s: e.s,
            p: e.p,
            predicted: e.predicted_charge_time,
            simulated,
            relative_delta: simulated
                .map(|t| (t - e.predicted_charge_time) / e.predicted_charge_time),
        })
    };
    if options.parallel {
        picked.par_iter().map(check).collect()
    } else {
        picked.iter().map(check).collect()
    }
}
