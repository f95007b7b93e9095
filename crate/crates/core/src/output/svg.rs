//! Stacked SOC / voltage / current line plots as standalone SVG.

use std::fmt::Write;

use crate::engine::{SimState, TimeSeries};

pub struct Trace<'a> {
    pub name: &'a str,
    pub series: &'a TimeSeries,
    pub stride: usize,
}

const WIDTH: f64 = 960.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 50.0;
const PANEL_H: f64 = 200.0;
const GAP: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Panel {
    title: &'static str,
    value: fn(&SimState) -> f64,
}

const PANELS: [Panel; 3] = [
    Panel {
        title: "State of charge (%)",
        value: |s| s.soc.soc * 100.0,
    },
    Panel {
        title: "Pack voltage (V)",
        value: |s| s.v_pack,
    },
    Panel {
        title: "Pack current (A)",
        value: |s| s.i_pack,
    },
];

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Axis bounds and tick spacing covering `[lo, hi]`.
fn axis(lo: f64, hi: f64) -> (f64, f64, f64) {
    let (lo, hi) = if !(hi - lo > 1e-9) {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    };
    let step = nice_step(hi - lo);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0".into()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render(traces: &[Trace<'_>]) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let height = TOP + 3.0 * PANEL_H + 2.0 * GAP + 50.0;
    let t_max = traces
        .iter()
        .filter_map(|t| t.series.samples.last())
        .map(|s| s.t / 3600.0)
        .fold(0.0, f64::max);
    let (x_lo, x_hi, x_step) = axis(0.0, if t_max > 0.0 { t_max } else { 1.0 });
    let x_of = |h: f64| LEFT + (h - x_lo) / (x_hi - x_lo) * plot_w;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="white"/>"#
    );

    for (k, panel) in PANELS.iter().enumerate() {
        let top = TOP + k as f64 * (PANEL_H + GAP);
        let bottom = top + PANEL_H;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for t in traces {
            for s in t.series.decimated(t.stride) {
                let v = (panel.value)(s);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        let (y_lo, y_hi, y_step) = axis(lo, hi);
        let y_of = |v: f64| bottom - (v - y_lo) / (y_hi - y_lo) * PANEL_H;

        let _ = writeln!(
            out,
            r#"<text x="{LEFT}" y="{:.1}" font-size="14" font-weight="bold">{}</text>"#,
            top - 10.0,
            panel.title
        );
        let n_y = ((y_hi - y_lo) / y_step).round() as i64;
        for j in 0..=n_y {
            let v = y_lo + j as f64 * y_step;
            let y = y_of(v);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
                LEFT + plot_w
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                label(v, y_step)
            );
        }
        let n_x = ((x_hi - x_lo) / x_step).round() as i64;
        for j in 0..=n_x {
            let h = x_lo + j as f64 * x_step;
            let x = x_of(h);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{bottom:.2}" stroke="#f0f0f0"/>"##
            );
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bottom + 16.0,
                label(h, x_step)
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT}" y="{top:.2}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );

        for (n, t) in traces.iter().enumerate() {
            let mut points = String::new();
            for s in t.series.decimated(t.stride) {
                if !points.is_empty() {
                    points.push(' ');
                }
                let _ = write!(
                    points,
                    "{:.2},{:.2}",
                    x_of(s.t / 3600.0),
                    y_of((panel.value)(s))
                );
            }
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{points}"/>"#,
                PALETTE[n % PALETTE.len()]
            );
        }
    }

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Time (h)</text>"#,
        LEFT + plot_w / 2.0,
        height - 12.0
    );
    for (n, t) in traces.iter().enumerate() {
        let y = TOP + 10.0 + n as f64 * 20.0;
        let x = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="3"/>"#,
            x + 24.0,
            PALETTE[n % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            x + 30.0,
            y + 4.0,
            escape(t.name)
        );
    }
    out.push_str("</svg>\n");
    out
}
