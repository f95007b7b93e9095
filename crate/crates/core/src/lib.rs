//! Reconfigurable battery-pack simulation and series/parallel planning.
//!
//! The building blocks, bottom-up:
//!
//! - [`cell`]: one cell as an OCV table plus series resistance.
//! - [`topology`]: `s x p` packs, assembly hierarchies, reconfiguration and
//!   factorization of a cell budget.
//! - [`soc`]: Coulomb-counting state of charge.
//! - [`control`]: CC-CV charging law and the charge/discharge relay.
//! - [`engine`]: fixed-step simulation with event detection.
//! - [`planner`]: ranks arrangements of a cell budget by charge time.
//! - [`scenario`], [`run`], [`output`]: configuration files and results.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cell;
pub mod control;
pub mod engine;
pub mod error;
pub mod output;
pub mod planner;
pub mod run;
pub mod scenario;
pub mod soc;
pub mod topology;

pub use cell::CellSpec;
pub use control::{ChargeMode, ChargerProfile, ControlRegion, Phase, RelayState, PAPER_ETA_CHARGE};
pub use engine::{
    charge_time, cycle_events, simulate, time_to_full_charge, Event, EventKind, SimState,
    TimeSeries,
};
pub use error::{Error, Result};
pub use planner::{
    predict_charge_time, rank, verify_rank, Discrepancy, PlanEntry, PlannerConstraints, RankedPlan,
    VerifyOptions,
};
pub use run::{run_compare, run_plan, run_simulate, RunOutcome, RunReport};
pub use scenario::{PackSource, Scenario, SimSettings};
pub use soc::{coulomb_step, SocState};
pub use topology::{enumerate_factorizations, AssemblyHierarchy, PackConfig, Topology};
