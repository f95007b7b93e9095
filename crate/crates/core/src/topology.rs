//! Series/parallel pack topology.
//!
//! A pack of identical cells is described by `s` cells in series per string
//! and `p` strings in parallel. Building `p`-cell parallel assemblies and
//! stacking `s` of them in series is electrically the same pack when all
//! cells are identical, so only the flattened `(s, p)` pair is stored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cell::CellSpec;
use crate::error::{Error, Result};

/// Four-level build description: cells in a parallel assembly, parallel
/// assemblies in series in a module, modules in series in a module
/// assembly, module assemblies in series in the pack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblyHierarchy {
    pub cells_in_parallel: u32,
    pub assemblies_in_series_per_module: u32,
    pub modules_in_series_per_assembly: u32,
    pub module_assemblies_in_series_per_pack: u32,
}

impl AssemblyHierarchy {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("cells_in_parallel", self.cells_in_parallel),
            (
                "assemblies_in_series_per_module",
                self.assemblies_in_series_per_module,
            ),
            (
                "modules_in_series_per_assembly",
                self.modules_in_series_per_assembly,
            ),
            (
                "module_assemblies_in_series_per_pack",
                self.module_assemblies_in_series_per_pack,
            ),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(Error::invalid(
                    "assembly hierarchy",
                    format!("{name} must be >= 1"),
                ));
            }
        }
        Ok(())
    }

    /// Electrical `s x p` equivalent of the hierarchy.
    pub fn topology(&self) -> Result<Topology> {
        self.validate()?;
        let s = [
            self.assemblies_in_series_per_module,
            self.modules_in_series_per_assembly,
            self.module_assemblies_in_series_per_pack,
        ]
        .iter()
        .try_fold(1u32, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::invalid("assembly hierarchy", "series count overflows"))?;
        Topology::new(s, self.cells_in_parallel)
    }

    pub fn flatten(&self, cell: CellSpec) -> Result<PackConfig> {
        Ok(PackConfig::from_topology(self.topology()?, cell))
    }
}

/// Series/parallel counts without a cell attached, written `"92S9P"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Topology {
    pub s: u32,
    pub p: u32,
}

impl Topology {
    pub fn new(s: u32, p: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("pack topology", "s must be ≥ 1"));
        }
        if p == 0 {
            return Err(Error::invalid("pack topology", "p must be ≥ 1"));
        }
        Ok(Topology { s, p })
    }

    pub fn total_cells(&self) -> u64 {
        u64::from(self.s) * u64::from(self.p)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}S{}P", self.s, self.p)
    }
}

impl FromStr for Topology {
    type Err = Error;

    /// Accepts exactly `<int>S<int>P`, e.g. `92S9P`.
    fn from_str(input: &str) -> Result<Self> {
        let err = |reason: &str| Error::PackName {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let body = input
            .strip_suffix('P')
            .ok_or_else(|| err("expected <int>S<int>P"))?;
        let (s, p) = body
            .split_once('S')
            .ok_or_else(|| err("expected <int>S<int>P"))?;
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !digits(s) || !digits(p) {
            return Err(err("expected <int>S<int>P"));
        }
        let s: u32 = s.parse().map_err(|_| err("series count out of range"))?;
        let p: u32 = p.parse().map_err(|_| err("parallel count out of range"))?;
        Topology::new(s, p).map_err(|e| match e {
            Error::InvalidSpec { reason, .. } => err(&reason),
            other => other,
        })
    }
}

/// An `s x p` pack of identical cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PackConfig {
    pub s: u32,
    pub p: u32,
    pub cell: CellSpec,
}

impl PackConfig {
    pub fn new(s: u32, p: u32, cell: CellSpec) -> Result<Self> {
        Topology::new(s, p)?;
        Ok(PackConfig { s, p, cell })
    }

    pub fn from_topology(t: Topology, cell: CellSpec) -> Self {
        PackConfig {
            s: t.s,
            p: t.p,
            cell,
        }
    }

    pub fn topology(&self) -> Topology {
        Topology {
            s: self.s,
            p: self.p,
        }
    }

    pub fn total_cells(&self) -> u64 {
        self.topology().total_cells()
    }

    /// Ah
    pub fn capacity(&self) -> f64 {
        f64::from(self.p) * self.cell.capacity
    }

    /// V
    pub fn nominal_voltage(&self) -> Result<f64> {
        Ok(f64::from(self.s) * self.cell.nominal_voltage()?)
    }

    /// Pack voltage at the per-cell CV limit.
    pub fn cv_voltage(&self) -> f64 {
        f64::from(self.s) * self.cell.v_cv
    }

    /// Rewire the same cell type as `new_s x new_p`.
    ///
    /// A change in total cell count is allowed but reported through the
    /// returned warning.
    pub fn reconfigure(&self, new_s: u32, new_p: u32) -> Result<(PackConfig, Option<String>)> {
        let next = PackConfig::new(new_s, new_p, self.cell.clone())?;
        let warning = cell_count_warning(self.total_cells(), next.total_cells());
        Ok((next, warning))
    }
}

impl fmt::Display for PackConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.topology().fmt(f)
    }
}

pub(crate) fn cell_count_warning(before: u64, after: u64) -> Option<String> {
    (before != after).then(|| format!("cell count {before} → {after}"))
}

/// Every `(s, p)` with `s * p == n_cells`, by ascending `s`.
pub fn enumerate_factorizations(n_cells: u64) -> Result<Vec<(u64, u64)>> {
    if n_cells == 0 {
        return Err(Error::domain("cell count must be >= 1"));
    }
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut d = 1u64;
    while d * d <= n_cells {
        if n_cells.is_multiple_of(d) {
            low.push((d, n_cells / d));
            if d * d != n_cells {
                high.push((n_cells / d, d));
            }
        }
        d += 1;
    }
    low.extend(high.into_iter().rev());
    Ok(low)
}
