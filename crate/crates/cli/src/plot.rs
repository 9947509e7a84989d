//! Deterministic SVG line plots of result tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::ResultsTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlotError {
    #[error("column `{0}` is not in the table")]
    MissingColumn(String),
    #[error("column `{0}` has non-positive values on a log axis")]
    NonPositiveLogData(String),
    #[error("column `{0}` holds non-numeric values")]
    NonNumeric(String),
    #[error("a reference slope needs logarithmic x and y axes")]
    SlopeNeedsLogAxes,
}

/// Axes and series selection for [`emit_plot`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub x: String,
    pub y: Vec<String>,
    #[serde(default)]
    pub log_x: bool,
    #[serde(default)]
    pub log_y: bool,
    #[serde(default)]
    pub title: Option<String>,
    /// Dashed guide `y ∝ x^slope` through the first point of the first series.
    #[serde(default)]
    pub reference_slope: Option<f64>,
    /// Vertical marker line at this abscissa.
    #[serde(default)]
    pub marker_x: Option<f64>,
    #[serde(default)]
    pub marker_label: Option<String>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
    ticks: Vec<(f64, String)>,
}

impl Axis {
    fn new(values: &[f64], log: bool) -> Self {
        let t: Vec<f64> = values.iter().map(|v| if log { v.log10() } else { *v }).collect();
        let (mut lo, mut hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        } else if hi - lo < 1e-12 * lo.abs().max(1.0) {
            let pad = if log { 0.5 } else { 0.5 * lo.abs().max(1e-3) };
            (lo, hi) = (lo - pad, hi + pad);
        }
        if log {
            let (a, b) = (lo.floor(), hi.ceil());
            let ticks = (a as i64..=b as i64).map(|k| (k as f64, format!("1e{k}"))).collect();
            return Axis { log, lo: a, hi: b, ticks };
        }
        let step = nice_step((hi - lo) / 5.0);
        let decimals = (-step.log10().floor()).max(0.0) as usize;
        let (a, b) = ((lo / step).floor() as i64, (hi / step).ceil() as i64);
        let ticks = (a..=b).map(|k| (k as f64 * step, label(k as f64 * step, decimals))).collect();
        Axis { log, lo: a as f64 * step, hi: b as f64 * step, ticks }
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }
}

fn nice_step(raw: f64) -> f64 {
    let p = 10f64.powf(raw.log10().floor());
    let m = raw / p;
    let k = if m <= 1.0 {
        1.0
    } else if m <= 2.0 {
        2.0
    } else if m <= 5.0 {
        5.0
    } else {
        10.0
    };
    k * p
}

fn label(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn numeric_column(table: &ResultsTable, name: &str, log: bool) -> Result<Vec<f64>, PlotError> {
    let idx = table.column_index(name).ok_or_else(|| PlotError::MissingColumn(name.to_string()))?;
    let values: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r[idx].as_f64().ok_or_else(|| PlotError::NonNumeric(name.to_string())))
        .collect::<Result<_, _>>()?;
    if log && values.iter().any(|v| !(*v > 0.0)) {
        return Err(PlotError::NonPositiveLogData(name.to_string()));
    }
    Ok(values)
}

/// Render `spec` over `table`. A table without rows yields axes only.
pub fn emit_plot(table: &ResultsTable, spec: &PlotSpec) -> Result<String, PlotError> {
    if spec.reference_slope.is_some() && !(spec.log_x && spec.log_y) {
        return Err(PlotError::SlopeNeedsLogAxes);
    }
    let (xs, series) = if table.rows.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let xs = numeric_column(table, &spec.x, spec.log_x)?;
        let series = spec
            .y
            .iter()
            .map(|name| numeric_column(table, name, spec.log_y).map(|v| (name.as_str(), v)))
            .collect::<Result<Vec<_>, _>>()?;
        (xs, series)
    };
    let mut x_extent = xs.clone();
    x_extent.extend(spec.marker_x.filter(|m| !spec.log_x || *m > 0.0));
    let all_y: Vec<f64> = series.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let xa = Axis::new(&x_extent, spec.log_x);
    let ya = Axis::new(&all_y, spec.log_y);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |v: f64| LEFT + xa.frac(v) * pw;
    let py = |v: f64| TOP + (1.0 - ya.frac(v)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath>"#);
    if let Some(t) = &spec.title {
        let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(t));
    }
    for (v, text) in &xa.ticks {
        let x = LEFT + (v - xa.lo) / (xa.hi - xa.lo) * pw;
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{text}</text>"#, TOP + ph + 16.0);
    }
    for (v, text) in &ya.ticks {
        let y = TOP + (1.0 - (v - ya.lo) / (ya.hi - ya.lo)) * ph;
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{text}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0, escape(&spec.x));

    for (k, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = xs.iter().zip(ys).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        for (x, y) in xs.iter().zip(ys) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(*x), py(*y));
        }
        let ly = TOP + 12.0 + 16.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 24.0, ly + 4.0, escape(name));
    }

    if let (Some(slope), Some((_, ys))) = (spec.reference_slope, series.first()) {
        if let (Some(&x0), Some(&y0)) = (xs.first(), ys.first()) {
            let guide = |x: f64| y0 * (x / x0).powf(slope);
            let (xl, xr) = (10f64.powf(xa.lo), 10f64.powf(xa.hi));
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555555" stroke-dasharray="6 4" clip-path="url(#plot-area)"/>"##,
                px(xl),
                py(guide(xl)),
                px(xr),
                py(guide(xr))
            );
            let ly = TOP + 12.0 + 16.0 * series.len() as f64;
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">slope {}</text>"#, LEFT + pw + 36.0, ly + 4.0, label(slope, 2));
        }
    }
    if let Some(m) = spec.marker_x.filter(|m| !spec.log_x || *m > 0.0) {
        let x = px(m);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#000000" stroke-dasharray="2 3"/>"##, TOP + ph);
        let text = spec.marker_label.clone().unwrap_or_else(|| format!("x = {m:.6}"));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 4.0, TOP + 12.0, escape(&text));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Cell;

    fn spec(x: &str, y: &[&str]) -> PlotSpec {
        PlotSpec {
            x: x.into(),
            y: y.iter().map(|s| s.to_string()).collect(),
            log_x: false,
            log_y: false,
            title: None,
            reference_slope: None,
            marker_x: None,
            marker_label: None,
        }
    }

    fn rate_table() -> ResultsTable {
        let mut t = ResultsTable::new(["kappa", "err"]);
        for k in [16.0f64, 32.0, 64.0, 128.0] {
            t.push(vec![Cell::Float(k), Cell::Float(k.powf(-1.5))]).unwrap();
        }
        t
    }

    #[test]
    fn empty_table_gives_axes_only() {
        let svg = emit_plot(&ResultsTable::new(["a", "b"]), &spec("a", &["b"])).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains("stroke=\"black\""));
    }

    #[test]
    fn missing_and_non_positive_columns_are_reported() {
        let t = rate_table();
        assert_eq!(emit_plot(&t, &spec("kappa", &["nope"])), Err(PlotError::MissingColumn("nope".into())));
        let mut t2 = t.clone();
        t2.rows[1][1] = Cell::Float(0.0);
        let s = PlotSpec { log_y: true, ..spec("kappa", &["err"]) };
        assert_eq!(emit_plot(&t2, &s), Err(PlotError::NonPositiveLogData("err".into())));
    }

    #[test]
    fn reference_slope_draws_a_guide() {
        let s = PlotSpec { log_x: true, log_y: true, reference_slope: Some(-1.5), ..spec("kappa", &["err"]) };
        let svg = emit_plot(&rate_table(), &s).unwrap();
        assert!(svg.contains("stroke-dasharray=\"6 4\""));
        assert!(svg.contains("slope -1.50"));
        assert_eq!(svg, emit_plot(&rate_table(), &s).unwrap());
        let linear = PlotSpec { reference_slope: Some(-1.5), ..spec("kappa", &["err"]) };
        assert_eq!(emit_plot(&rate_table(), &linear), Err(PlotError::SlopeNeedsLogAxes));
    }

    #[test]
    fn marker_is_drawn_with_its_label() {
        let s = PlotSpec { marker_x: Some(50.0), marker_label: Some("mu* = 50".into()), ..spec("kappa", &["err"]) };
        let svg = emit_plot(&rate_table(), &s).unwrap();
        assert!(svg.contains("stroke-dasharray=\"2 3\"") && svg.contains("mu* = 50"));
    }

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(0.13), 0.2);
        assert_eq!(nice_step(3.0), 5.0);
        assert_eq!(nice_step(7.0), 10.0);
        assert_eq!(label(-0.0, 2), "0.00");
    }
}
