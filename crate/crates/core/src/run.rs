//! Scenario runners behind the `simulate`, `compare` and `plan` commands.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::CellSpec;
use crate::control::ChargerProfile;
use crate::engine::{charge_time, cycle_events, simulate, EventKind, TimeSeries};
use crate::error::Result;
use crate::output::svg::{self, Trace};
use crate::planner::{rank, PlannerConstraints, RankedPlan};
use crate::scenario::Scenario;
use crate::topology::{cell_count_warning, PackConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    /// `"92S9P"`-style pack name.
    pub config: String,
    /// `None` means full charge was never reached.
    pub charge_time_h: Option<f64>,
    pub toggle_count: usize,
    pub final_soc: f64,
    pub peak_voltage: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: PackConfig,
    pub series: TimeSeries,
    pub report: RunReport,
    /// Output decimation stride for this run.
    pub stride: usize,
}

fn summarize(
    name: &str,
    config: &PackConfig,
    series: &TimeSeries,
    mut warnings: Vec<String>,
) -> RunReport {
    let floor_hits = series.events_of(EventKind::VoltageFloorHit).count();
    if floor_hits > 0 {
        warnings.push(format!(
            "discharge voltage floor reached {floor_hits} time(s)"
        ));
    }
    RunReport {
        name: name.to_string(),
        config: config.to_string(),
        charge_time_h: charge_time(series),
        toggle_count: cycle_events(series).len(),
        final_soc: series.final_soc(),
        peak_voltage: series.peak_voltage(),
        warnings,
    }
}

/// Run one scenario. When `baseline` is given, the run is treated as a
/// reconfiguration of it and a change in cell count is reported.
pub fn run_scenario(scenario: &Scenario, baseline: Option<&PackConfig>) -> Result<RunOutcome> {
    scenario.validate()?;
    let config = scenario.pack_config()?;
    let series = simulate(
        &config,
        &scenario.charger,
        scenario.duration_s(),
        scenario.sim.dt,
        scenario.sim.initial_soc,
    )?;
    let warnings = baseline
        .and_then(|b| cell_count_warning(b.total_cells(), config.total_cells()))
        .into_iter()
        .collect();
    let report = summarize(&scenario.name, &config, &series, warnings);
    let stride = series.stride_for(scenario.sim.sample_interval);
    Ok(RunOutcome {
        config,
        series,
        report,
        stride,
    })
}

pub fn run_simulate(scenario: &Scenario) -> Result<RunOutcome> {
    run_scenario(scenario, None)
}

/// Run every scenario, the first one serving as the baseline pack.
/// Failures are returned per scenario; results keep input order whether or
/// not the runs execute in parallel.
pub fn run_compare(scenarios: &[Scenario], parallel: bool) -> Vec<Result<RunOutcome>> {
    let baseline = scenarios.first().and_then(|s| s.pack_config().ok());
    let run = |s: &Scenario| run_scenario(s, baseline.as_ref());
    if parallel {
        scenarios.par_iter().map(run).collect()
    } else {
        scenarios.iter().map(run).collect()
    }
}

pub fn run_plan(
    n_cells: u64,
    cell: &CellSpec,
    profile: &ChargerProfile,
    constraints: &PlannerConstraints,
) -> Result<RankedPlan> {
    rank(n_cells, cell, profile, constraints)
}

/// Overlaid plot of all successful runs.
pub fn compare_svg(outcomes: &[&RunOutcome]) -> String {
    let traces: Vec<Trace<'_>> = outcomes
        .iter()
        .map(|o| Trace {
            name: &o.report.name,
            series: &o.series,
            stride: o.stride,
        })
        .collect();
    svg::render(&traces)
}

pub fn compare_csv(outcomes: &[&RunOutcome]) -> String {
    let mut buf = Vec::new();
    crate::output::csv::write_compare(
        &mut buf,
        outcomes
            .iter()
            .map(|o| (o.report.name.as_str(), &o.series, o.stride)),
    )
    .expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

pub fn series_csv(outcome: &RunOutcome) -> String {
    let mut buf = Vec::new();
    crate::output::csv::write_series(&mut buf, &outcome.series, outcome.stride)
        .expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
