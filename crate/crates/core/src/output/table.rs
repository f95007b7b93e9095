//! Plain-text tables for terminals.

use std::fmt::Write;

use crate::planner::{Discrepancy, RankedPlan};
use crate::run::RunReport;

fn render(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &mut headers.iter().copied());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in rows {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    out
}

pub fn reports(reports: &[RunReport]) -> String {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                r.config.clone(),
                r.charge_time_h
                    .map_or_else(|| "not reached".to_string(), |h| format!("{h:.2}")),
                r.toggle_count.to_string(),
                format!("{:.4}", r.final_soc),
                format!("{:.1}", r.peak_voltage),
                r.warnings.join("; "),
            ]
        })
        .collect();
    render(
        &[
            "scenario",
            "config",
            "charge_time_h",
            "toggles",
            "final_soc",
            "peak_v",
            "warnings",
        ],
        &rows,
    )
}

/// Failed runs in a comparison get one line each.
pub fn failures<'a>(failures: impl IntoIterator<Item = (&'a str, String)>) -> String {
    let mut out = String::new();
    for (name, err) in failures {
        let _ = writeln!(out, "{name}: error: {err}");
    }
    out
}

pub fn plan(plan: &RankedPlan) -> String {
    let rows: Vec<Vec<String>> = plan
        .entries
        .iter()
        .enumerate()
        .map(|(rank, e)| {
            vec![
                if e.feasible {
                    (rank + 1).to_string()
                } else {
                    "-".into()
                },
                format!("{}S{}P", e.s, e.p),
                if e.predicted_charge_time.is_finite() {
                    format!("{:.3}", e.predicted_charge_time)
                } else {
                    "-".into()
                },
                format!("{:.2}", e.effective_current),
                format!("{:.1}", e.nominal_voltage),
                format!("{:.1}", e.cv_voltage),
                e.infeasibility_reason
                    .clone()
                    .unwrap_or_else(|| "ok".into()),
            ]
        })
        .collect();
    render(
        &[
            "rank",
            "config",
            "charge_time_h",
            "current_a",
            "nominal_v",
            "cv_v",
            "status",
        ],
        &rows,
    )
}

pub fn discrepancies(report: &[Discrepancy]) -> String {
    let rows: Vec<Vec<String>> = report
        .iter()
        .map(|d| {
            vec![
                format!("{}S{}P", d.s, d.p),
                format!("{:.4}", d.predicted),
                d.simulated
                    .map_or_else(|| "not reached".into(), |h| format!("{h:.4}")),
                d.relative_delta
                    .map_or_else(|| "-".into(), |r| format!("{r:.3e}")),
            ]
        })
        .collect();
    render(
        &["config", "predicted_h", "simulated_h", "relative_delta"],
        &rows,
    )
}
