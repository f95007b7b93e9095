//! Single-cell parameters and the first-order equivalent circuit.
//!
//! A cell is an open-circuit voltage source, tabulated against state of
//! charge, in series with a fixed internal resistance. Current is signed
//! with charging positive, so the terminal voltage rises above the OCV
//! while charging and sags below it while discharging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generic NMC-shaped open-circuit voltage curve used when a scenario does
/// not provide its own table.
pub const DEFAULT_OCV_TABLE: [(f64, f64); 8] = [
    (0.0, 3.00),
    (0.1, 3.45),
    (0.2, 3.55),
    (0.4, 3.62),
    (0.6, 3.72),
    (0.8, 3.90),
    (0.9, 4.05),
    (1.0, 4.20),
];

pub const DEFAULT_R_INTERNAL: f64 = 0.02;
pub const DEFAULT_V_CV: f64 = 4.20;
pub const DEFAULT_V_MIN: f64 = 2.50;

/// Physical and electrical parameters of one cell.
///
/// Units are SI except `capacity` (ampere-hours) and `energy` (watt-hours).
/// Geometry and mass are carried for reporting only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSpec {
    /// m
    pub radius: f64,
    /// m
    pub height: f64,
    /// kg
    pub mass: f64,
    /// Ah
    pub capacity: f64,
    /// Wh
    pub energy: f64,
    /// ohm
    pub r_internal: f64,
    /// `(soc, volts)` knots, soc strictly increasing from 0 to 1.
    pub ocv_table: Vec<(f64, f64)>,
    /// Per-cell constant-voltage limit, V.
    pub v_cv: f64,
    /// Per-cell discharge floor, V.
    pub v_min: f64,
}

impl Default for CellSpec {
    fn default() -> Self {
        Self::tesla_model_y()
    }
}

impl CellSpec {
    /// 2022 Tesla Model Y cylindrical cell with the default electrical model.
    pub fn tesla_model_y() -> Self {
        CellSpec {
            radius: 0.023,
            height: 0.08,
            mass: 0.355,
            capacity: 23.35,
            energy: 86.5,
            r_internal: DEFAULT_R_INTERNAL,
            ocv_table: DEFAULT_OCV_TABLE.to_vec(),
            v_cv: DEFAULT_V_CV,
            v_min: DEFAULT_V_MIN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("cell spec", reason));
        let all = [
            self.radius,
            self.height,
            self.mass,
            self.capacity,
            self.energy,
            self.r_internal,
            self.v_cv,
            self.v_min,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite".into());
        }
        if self.capacity <= 0.0 {
            return bad(format!("capacity must be > 0, got {}", self.capacity));
        }
        if self.energy <= 0.0 {
            return bad(format!("energy must be > 0, got {}", self.energy));
        }
        if self.mass <= 0.0 {
            return bad(format!("mass must be > 0, got {}", self.mass));
        }
        if self.radius < 0.0 || self.height < 0.0 {
            return bad("radius and height must be >= 0".into());
        }
        if self.r_internal < 0.0 {
            return bad(format!("r_internal must be >= 0, got {}", self.r_internal));
        }

        let table = &self.ocv_table;
        if table.len() < 2 {
            return bad("ocv_table needs at least two knots".into());
        }
        if table.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
            return bad("ocv_table entries must be finite".into());
        }
        if table[0].0 != 0.0 || table[table.len() - 1].0 != 1.0 {
            return bad("ocv_table soc keys must span exactly [0, 1]".into());
        }
        for w in table.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad(format!(
                    "ocv_table soc keys must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                ));
            }
            if w[1].1 < w[0].1 {
                return bad(format!(
                    "ocv_table voltages must be non-decreasing ({} then {})",
                    w[0].1, w[1].1
                ));
            }
        }
        if self.v_min > table[0].1 {
            return bad(format!(
                "v_min ({}) must not exceed the empty-cell OCV ({})",
                self.v_min, table[0].1
            ));
        }
        if self.v_cv <= self.v_min {
            return bad(format!(
                "v_cv ({}) must be greater than v_min ({})",
                self.v_cv, self.v_min
            ));
        }
        Ok(())
    }

    /// Average discharge voltage implied by the rated energy and capacity.
    pub fn nominal_voltage(&self) -> Result<f64> {
        if !(self.capacity > 0.0) {
            return Err(Error::invalid(
                "cell spec",
                format!("capacity must be > 0, got {}", self.capacity),
            ));
        }
        Ok(self.energy / self.capacity)
    }

    /// Open-circuit voltage, linearly interpolated between table knots.
    pub fn ocv(&self, soc: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&soc) {
            return Err(Error::domain(format!("soc {soc} outside [0, 1]")));
        }
        let table = &self.ocv_table;
        // index of the first knot strictly above soc
        let hi = table.partition_point(|&(s, _)| s <= soc);
        if hi == 0 {
            return Ok(table[0].1);
        }
        if hi == table.len() {
            return Ok(table[table.len() - 1].1);
        }
        let (s0, v0) = table[hi - 1];
        if s0 == soc {
            return Ok(v0);
        }
        let (s1, v1) = table[hi];
        Ok(v0 + (v1 - v0) * (soc - s0) / (s1 - s0))
    }

    /// Terminal voltage at a given cell current (charging positive).
    pub fn terminal_voltage(&self, soc: f64, i_cell: f64) -> Result<f64> {
        Ok(self.ocv(soc)? + i_cell * self.r_internal)
    }
}
