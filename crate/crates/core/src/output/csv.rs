//! CSV time-series output.
//!
//! Columns are `time_s, mode, soc, pack_voltage_v, pack_current_a,
//! cumulative_ah`; comparison output prepends a `config` column. Numbers
//! carry six significant digits.

use std::io::{self, Write};

use super::sig6;
use crate::engine::{SimState, TimeSeries};

pub const COLUMNS: [&str; 6] = [
    "time_s",
    "mode",
    "soc",
    "pack_voltage_v",
    "pack_current_a",
    "cumulative_ah",
];

fn write_row(w: &mut impl Write, s: &SimState) -> io::Result<()> {
    write!(
        w,
        "{},{},{},{},{},{}",
        sig6(s.t),
        s.mode(),
        sig6(s.soc.soc),
        sig6(s.v_pack),
        sig6(s.i_pack),
        sig6(s.cumulative_ah)
    )
}

pub fn write_series(w: &mut impl Write, series: &TimeSeries, stride: usize) -> io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for s in series.decimated(stride) {
        write_row(w, s)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Long-format output for several runs, in the order given.
pub fn write_compare<'a>(
    w: &mut impl Write,
    runs: impl IntoIterator<Item = (&'a str, &'a TimeSeries, usize)>,
) -> io::Result<()> {
    writeln!(w, "config,{}", COLUMNS.join(","))?;
    for (name, series, stride) in runs {
        for s in series.decimated(stride) {
            write!(w, "{},", escape(name))?;
            write_row(w, s)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub(crate) fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Ranked plan as CSV, one row per candidate in rank order.
pub fn write_plan(w: &mut impl Write, plan: &crate::planner::RankedPlan) -> io::Result<()> {
    writeln!(
        w,
        "s,p,predicted_charge_time_h,effective_current_a,nominal_voltage_v,cv_voltage_v,feasible,reason"
    )?;
    for e in &plan.entries {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            e.s,
            e.p,
            sig6(e.predicted_charge_time),
            sig6(e.effective_current),
            sig6(e.nominal_voltage),
            sig6(e.cv_voltage),
            e.feasible,
            escape(e.infeasibility_reason.as_deref().unwrap_or(""))
        )?;
    }
    Ok(())
}
