//! Scenario documents.
//!
//! A scenario is a TOML document with a required `pack` entry and
//! `charger` section, plus optional `cell` and `sim` sections. Unknown keys
//! are rejected. Omitted fields take these defaults:
//!
//! | key | default |
//! |-----|---------|
//! | `name` | the pack name, e.g. `"92S9P"` |
//! | `cell.*` | 2022 Tesla Model Y cell (23.35 Ah, 86.5 Wh, 0.355 kg, r = 0.023 m, h = 0.08 m), `r_internal = 0.02`, `v_cv = 4.2`, `v_min = 2.5`, generic NMC `ocv_table` |
//! | `charger.i_charge` | 15 A |
//! | `charger.i_discharge` | `i_charge` |
//! | `charger.mode` | `"cc_cv"` |
//! | `charger.i_cutoff` | `i_charge / 20` |
//! | `charger.soc_high`, `charger.soc_low` | 1.0, 0.0 |
//! | `charger.eta_charge` | 1.0 |
//! | `sim.duration_h` | 48 |
//! | `sim.dt` | 1 s |
//! | `sim.initial_soc` | 0 |
//! | `sim.sample_interval` | 60 s |
//!
//! `pack` is either a name such as `"92S9P"` or a table with the four
//! assembly counts:
//!
//! ```toml
//! [pack]
//! cells_in_parallel = 9
//! assemblies_in_series_per_module = 23
//! modules_in_series_per_assembly = 4
//! module_assemblies_in_series_per_pack = 1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cell::CellSpec;
use crate::control::ChargerProfile;
use crate::error::{Error, Result};
use crate::topology::{AssemblyHierarchy, PackConfig, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub duration_h: f64,
    /// s
    pub dt: f64,
    pub initial_soc: f64,
    /// CSV/SVG output spacing, s.
    pub sample_interval: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            duration_h: 48.0,
            dt: 1.0,
            initial_soc: 0.0,
            sample_interval: 60.0,
        }
    }
}

impl SimSettings {
    fn validate(&self) -> Result<()> {
        if !(self.duration_h > 0.0) || !self.duration_h.is_finite() {
            return Err(Error::config("sim.duration_h", "must be > 0"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("sim.dt", "must be > 0"));
        }
        if self.dt > self.duration_h * 3600.0 {
            return Err(Error::config("sim.dt", "must not exceed the run duration"));
        }
        if !(0.0..=1.0).contains(&self.initial_soc) {
            return Err(Error::config("sim.initial_soc", "must lie in [0, 1]"));
        }
        if !(self.sample_interval > 0.0) || !self.sample_interval.is_finite() {
            return Err(Error::config("sim.sample_interval", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackSource {
    Named(Topology),
    Hierarchy(AssemblyHierarchy),
}

impl PackSource {
    pub fn topology(&self) -> Result<Topology> {
        match self {
            PackSource::Named(t) => Ok(*t),
            PackSource::Hierarchy(h) => h.topology(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub cell: CellSpec,
    pub pack: PackSource,
    pub charger: ChargerProfile,
    pub sim: SimSettings,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    pack: Option<toml::Value>,
    #[serde(default)]
    cell: CellSpec,
    charger: Option<ChargerProfile>,
    #[serde(default)]
    sim: SimSettings,
}

fn parse_pack(value: toml::Value) -> Result<PackSource> {
    match value {
        toml::Value::String(s) => {
            s.parse::<Topology>()
                .map(PackSource::Named)
                .map_err(|e| match e {
                    Error::PackName { reason, input } => {
                        Error::config("pack", format!("{reason} (got {input:?})"))
                    }
                    other => Error::config("pack", other.to_string()),
                })
        }
        toml::Value::Table(t) => {
            let h: AssemblyHierarchy = t
                .try_into()
                .map_err(|e: toml::de::Error| Error::config("pack", e.message().to_string()))?;
            h.validate()
                .map_err(|e| Error::config("pack", e.to_string()))?;
            Ok(PackSource::Hierarchy(h))
        }
        other => Err(Error::config(
            "pack",
            format!(
                "expected a name like \"92S9P\" or an assembly table, got {}",
                other.type_str()
            ),
        )),
    }
}

impl Scenario {
    /// Built-in scenario for a named pack on the default cell and charger.
    pub fn for_pack(topology: Topology) -> Self {
        Scenario {
            name: topology.to_string(),
            cell: CellSpec::default(),
            pack: PackSource::Named(topology),
            charger: ChargerProfile::default(),
            sim: SimSettings::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Config {
            path: None,
            message: e.to_string().trim_end().to_string(),
        })?;
        let pack = parse_pack(
            raw.pack
                .ok_or_else(|| Error::config("pack", "missing required entry"))?,
        )?;
        let charger = raw
            .charger
            .ok_or_else(|| Error::config("charger", "missing required section"))?;
        let scenario = Scenario {
            name: raw
                .name
                .unwrap_or_else(|| pack.topology().map(|t| t.to_string()).unwrap_or_default()),
            cell: raw.cell,
            pack,
            charger,
            sim: raw.sim,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let within = |section: &'static str| {
            move |e: Error| match e {
                Error::InvalidSpec { reason, .. } => Error::config(section, reason),
                other => other,
            }
        };
        self.cell.validate().map_err(within("cell"))?;
        self.charger.validate().map_err(within("charger"))?;
        self.sim.validate()?;
        Ok(())
    }

    pub fn pack_config(&self) -> Result<PackConfig> {
        match self.pack {
            PackSource::Named(t) => Ok(PackConfig::from_topology(t, self.cell.clone())),
            PackSource::Hierarchy(h) => h.flatten(self.cell.clone()),
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.sim.duration_h * 3600.0
    }
}
