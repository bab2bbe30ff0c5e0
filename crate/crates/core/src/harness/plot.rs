//! Minimal SVG line chart of the aggregate block: one polyline per scheme
//! with standard-error bars.

use std::fmt::Write as _;
use std::path::Path;

use super::experiment::ResultsTable;
use crate::ao::Scheme;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn color(s: Scheme) -> &'static str {
    match s {
        Scheme::Proposed => "#d62728",
        Scheme::Fpa => "#1f77b4",
        Scheme::Rpa => "#2ca02c",
        Scheme::Eas => "#9467bd",
    }
}

fn marker(s: Scheme, x: f64, y: f64, c: &str) -> String {
    match s {
        Scheme::Proposed => format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{c}"/>"#),
        Scheme::Fpa => format!(
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="{c}"/>"#,
            x - 4.0,
            y - 4.0
        ),
        Scheme::Rpa => format!(
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}"/>"#,
            x,
            y - 5.0,
            x - 5.0,
            y + 4.0,
            x + 5.0,
            y + 4.0
        ),
        Scheme::Eas => format!(
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}"/>"#,
            x,
            y - 5.0,
            x + 5.0,
            y,
            x,
            y + 5.0,
            x - 5.0,
            y
        ),
    }
}

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn to_svg_string(table: &ResultsTable) -> Result<String> {
    if table.aggregates.is_empty() {
        return Err(Error::InvalidInput("nothing to plot: no aggregate rows".into()));
    }
    let finite = |x: f64| x.is_finite();
    let xs: Vec<f64> = table.aggregates.iter().map(|a| a.sweep_value).collect();
    let (mut x_lo, mut x_hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if x_hi <= x_lo {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let mut y_hi = table
        .aggregates
        .iter()
        .filter(|a| finite(a.mean))
        .map(|a| a.mean + if finite(a.sem()) { a.sem() } else { 0.0 })
        .fold(0.0, f64::max);
    if y_hi <= 0.0 {
        y_hi = 1.0;
    }
    y_hi *= 1.05;
    let y_lo = 0.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for t in nice_ticks(x_lo, x_hi, 6) {
        let x = px(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            tick_label(t)
        );
    }
    for t in nice_ticks(y_lo, y_hi, 6) {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT + plot_w,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        table.axis.label()
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">secrecy rate (bit/s/Hz)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, scheme) in table.schemes().into_iter().enumerate() {
        let c = color(scheme);
        let pts: Vec<(f64, f64, f64)> = table
            .aggregates
            .iter()
            .filter(|a| a.scheme == scheme && finite(a.mean))
            .map(|a| (a.sweep_value, a.mean, a.sem()))
            .collect();
        let _ = writeln!(s, r#"<g class="series" data-scheme="{}">"#, scheme.name());
        let points: Vec<String> = pts.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        for &(x, y, e) in &pts {
            if finite(e) && e > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line class="errorbar" x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="{c}"/>"#,
                    px(x),
                    py((y - e).max(y_lo)),
                    py(y + e)
                );
            }
            let _ = writeln!(s, "{}", marker(scheme, px(x), py(y), c));
        }
        let _ = writeln!(s, "</g>");
        let ly = TOP + 10.0 + 22.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>{}<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 30.0,
            marker(scheme, lx + 15.0, ly, c),
            lx + 38.0,
            ly + 4.0,
            scheme.name()
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(table: &ResultsTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_svg_string(table)?).map_err(|e| Error::io(path, e))
}
