//! Hand-emitted SVG line charts of trace columns: one polyline per
//! sensor per column, axes with ticks and labels, a legend, and an
//! optional shaded confidence band when both `ci_lo` and `ci_hi` are
//! selected.

use crate::trace::{TraceData, NUMERIC_COLUMNS};
use crate::{CliError, Result};
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 42.0;

const PALETTE: [&str; 6] = [
    "#ff7f0e", "#2ca02c", "#1f77b4", "#d62728", "#9467bd", "#8c564b",
];
const DASHES: [&str; 4] = ["", "6,3", "2,2", "8,2,2,2"];

/// Renders the selected columns to a standalone SVG file.
pub fn render_svg(trace: &TraceData, columns: &[String], path: &Path) -> Result<()> {
    let text = svg_text(trace, columns)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Builds the SVG document text.
pub fn svg_text(trace: &TraceData, columns: &[String]) -> Result<String> {
    for column in columns {
        if !NUMERIC_COLUMNS.contains(&column.as_str()) {
            return Err(CliError::Config(format!(
                "unknown column `{column}` (expected one of {})",
                NUMERIC_COLUMNS.join(", ")
            )));
        }
    }
    if columns.is_empty() {
        return Err(CliError::Config("no columns selected".into()));
    }

    // ci_lo + ci_hi together render as a shaded band
    let band = columns.iter().any(|c| c == "ci_lo") && columns.iter().any(|c| c == "ci_hi");
    let line_columns: Vec<&String> = columns
        .iter()
        .filter(|c| !(band && (c.as_str() == "ci_lo" || c.as_str() == "ci_hi")))
        .collect();

    // data ranges
    let mut x_max = 1.0f64;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for series in &trace.sensors {
        if let Some(last) = series.k.last() {
            x_max = x_max.max(*last);
        }
        for column in columns {
            for v in &series.columns[column.as_str()] {
                y_min = y_min.min(*v);
                y_max = y_max.max(*v);
            }
        }
    }
    if !y_min.is_finite() {
        // no data at all: render empty axes
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min).abs() < 1e-12 {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_lo, y_hi) = (y_min - pad, y_max + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |k: f64| MARGIN_LEFT + k / x_max * plot_w;
    let sy = move |v: f64| MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * plot_h;

    let mut svg = String::with_capacity(16 * 1024);
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();

    // confidence band behind everything else
    if band {
        if let Some(series) = trace.sensors.first() {
            let lo = &series.columns["ci_lo"];
            let hi = &series.columns["ci_hi"];
            if !lo.is_empty() {
                let mut d = String::new();
                for (i, k) in series.k.iter().enumerate() {
                    let cmd = if i == 0 { 'M' } else { 'L' };
                    write!(d, "{cmd}{:.2},{:.2} ", sx(*k), sy(hi[i])).unwrap();
                }
                for (i, k) in series.k.iter().enumerate().rev() {
                    write!(d, "L{:.2},{:.2} ", sx(*k), sy(lo[i])).unwrap();
                }
                writeln!(
                    svg,
                    r##"<path d="{}Z" fill="#bbbbbb" fill-opacity="0.35" stroke="none"/>"##,
                    d.trim_end()
                )
                .unwrap();
            }
        }
    }

    // axes
    writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black" stroke-width="1"/>"#
    )
    .unwrap();

    // ticks
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let k = frac * x_max;
        let x = sx(k);
        writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 4.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + plot_h + 16.0,
            k.round() as i64
        )
        .unwrap();

        let v = y_lo + frac * (y_hi - y_lo);
        let y = sy(v);
        writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="black"/>"#,
            MARGIN_LEFT - 4.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 7.0,
            y + 3.5,
            tick_label(v)
        )
        .unwrap();
    }

    // axis labels
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time step k</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        line_columns
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    )
    .unwrap();

    // polylines
    let mut legend = Vec::new();
    for (si, series) in trace.sensors.iter().enumerate() {
        for (ci, column) in line_columns.iter().enumerate() {
            let values = &series.columns[column.as_str()];
            if values.is_empty() {
                continue;
            }
            let mut points = String::new();
            for (i, k) in series.k.iter().enumerate() {
                write!(points, "{:.2},{:.2} ", sx(*k), sy(values[i])).unwrap();
            }
            let color = PALETTE[si % PALETTE.len()];
            let dash = DASHES[ci % DASHES.len()];
            let dash_attr = if dash.is_empty() {
                String::new()
            } else {
                format!(r#" stroke-dasharray="{dash}""#)
            };
            writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.3"{dash_attr}/>"#,
                points.trim_end()
            )
            .unwrap();
            legend.push((
                format!("sensor {} {}", series.sensor, column),
                color,
                dash.to_string(),
            ));
        }
    }

    // legend, top-right corner of the plot area
    for (i, (label, color, dash)) in legend.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 14.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT - 150.0;
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.3"{dash_attr}/>"#,
            x + 22.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
            x + 27.0,
            y + 3.5
        )
        .unwrap();
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(0.01..1000.0).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}
