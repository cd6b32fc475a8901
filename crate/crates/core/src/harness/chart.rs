//! Static SVG chart of a sweep: one series per (measure, alpha), mean line
//! with markers and a shaded +/- one standard deviation band.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{AxisKind, MeasureSpec, SweepResult, SweepRow};
use crate::error::{Error, Result};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Series<'a> {
    measure: MeasureSpec,
    alpha: Option<f64>,
    rows: Vec<&'a SweepRow>,
}

impl Series<'_> {
    fn label(&self) -> String {
        match self.alpha {
            Some(a) => format!("{} (α={})", self.measure, a),
            None => self.measure.to_string(),
        }
    }
}

fn group(result: &SweepResult) -> Vec<Series<'_>> {
    let mut out: Vec<Series> = Vec::new();
    for row in &result.rows {
        match out
            .iter_mut()
            .find(|s| s.measure == row.measure && s.alpha == row.alpha)
        {
            Some(s) => s.rows.push(row),
            None => out.push(Series {
                measure: row.measure,
                alpha: row.alpha,
                rows: vec![row],
            }),
        }
    }
    for s in &mut out {
        s.rows
            .sort_by(|a, b| result.axis_value(a).total_cmp(&result.axis_value(b)));
    }
    out
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Renders the chart as an SVG document.
pub fn render_svg(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(Error::InvalidInput("cannot chart an empty sweep".into()));
    }
    let series = group(result);
    let xs = result.rows.iter().map(|r| result.axis_value(r));
    let (x_lo, x_hi) = padded_range(
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = padded_range(
        result.rows.iter().map(|r| r.mean - r.std).fold(f64::INFINITY, f64::min),
        result.rows.iter().map(|r| r.mean + r.std).fold(f64::NEG_INFINITY, f64::max),
    );
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let x_name = match result.axis {
        AxisKind::Gamma => "γ (dB)",
        AxisKind::Length => "L",
    };
    let mut svg = String::new();
    // Writing into a String cannot fail.
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}: dependence vs {}</text>"#,
        LEFT + plot_w / 2.0,
        result.model,
        x_name
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>"##
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xv = x_lo + t * (x_hi - x_lo);
        let yv = y_lo + t * (y_hi - y_lo);
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{gx:.2}" y1="{TOP}" x2="{gx:.2}" y2="{:.2}" stroke="#ddd"/><text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            gy + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_name}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="series" data-label="{}">"#, s.label());
        if s.rows.len() > 1 {
            let upper = s.rows.iter().map(|r| (px(result.axis_value(r)), py(r.mean + r.std)));
            let lower = s.rows.iter().rev().map(|r| (px(result.axis_value(r)), py(r.mean - r.std)));
            let band: Vec<String> = upper.chain(lower).map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                band.join(" ")
            );
            let line: Vec<String> = s
                .rows
                .iter()
                .map(|r| format!("{:.2},{:.2}", px(result.axis_value(r)), py(r.mean)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                line.join(" ")
            );
        } else {
            let r = s.rows[0];
            let x = px(result.axis_value(r));
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-opacity="0.5" stroke-width="6"/>"#,
                py(r.mean + r.std),
                py(r.mean - r.std)
            );
        }
        for r in &s.rows {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(result.axis_value(r)),
                py(r.mean)
            );
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.2}" y="{:.2}" width="14" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            ly - 9.0,
            lx + 20.0,
            ly,
            s.label()
        );
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_chart(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(result)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
