//! CSV, JSON and SVG output for experiment results.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::experiment::{ExperimentResult, Quantity};

pub const CSV_HEADER: &str = "m,empirical,std_err,bound_plateau,bound_linear";

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("nothing to plot")]
    EmptyInput,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn write_file(path: &Path, contents: &str) -> Result<(), EmitError> {
    std::fs::write(path, contents).map_err(|source| EmitError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// 12 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_value).unwrap_or_default()
}

pub fn csv_string(res: &ExperimentResult) -> String {
    let empirical = res.empirical();
    let plateau = res.curve("plateau");
    let linear = res.curve("linear");
    let mut ms = BTreeSet::new();
    if let Some(s) = empirical {
        ms.extend(s.points.iter().map(|p| p.m));
    }
    for c in [plateau, linear].into_iter().flatten() {
        ms.extend(c.points.iter().map(|p| p.0));
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for m in ms {
        let point = empirical.and_then(|s| s.value_at(m));
        let _ = writeln!(
            out,
            "{m},{},{},{},{}",
            opt(point.map(|p| p.value)),
            opt(point.and_then(|p| p.std_err)),
            opt(plateau.and_then(|c| c.value_at(m))),
            opt(linear.and_then(|c| c.value_at(m))),
        );
    }
    out
}

pub fn emit_csv(res: &ExperimentResult, path: &Path) -> Result<(), EmitError> {
    write_file(path, &csv_string(res))
}

pub fn json_string(res: &ExperimentResult) -> Result<String, EmitError> {
    let mut s = serde_json::to_string_pretty(res)?;
    s.push('\n');
    Ok(s)
}

pub fn emit_json(res: &ExperimentResult, path: &Path) -> Result<(), EmitError> {
    write_file(path, &json_string(res)?)
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Line {
    label: String,
    points: Vec<(f64, f64, Option<f64>)>,
    dashed: bool,
    /// Whether the line sets the vertical scale.
    scaled: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn lines(res: &ExperimentResult) -> Vec<Line> {
    let mut out: Vec<Line> = res
        .series
        .iter()
        .map(|s| Line {
            label: String::from(s.label.label()),
            points: s.points.iter().map(|p| (p.m as f64, p.value, p.std_err)).collect(),
            dashed: false,
            scaled: true,
        })
        .collect();
    for c in &res.bounds {
        let label = match c.quantity {
            Quantity::SquaredDistance => format!("{} bound (r = {:.3e})", c.kind, c.parameter),
            Quantity::Distance => format!("{} bound on the norm (γ = {:.3e})", c.kind, c.parameter),
        };
        out.push(Line {
            label,
            points: c.points.iter().map(|&(m, v)| (m as f64, v, None)).collect(),
            dashed: true,
            scaled: c.quantity == Quantity::SquaredDistance,
        });
    }
    out.retain(|l| !l.points.is_empty());
    out
}

fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}

/// Error (squared Frobenius distance) against `m`, one polyline per series
/// and bound curve. Curves above the plot area are clipped.
pub fn svg_string(res: &ExperimentResult) -> Result<String, EmitError> {
    let lines = lines(res);
    if lines.is_empty() {
        return Err(EmitError::EmptyInput);
    }
    let all = || lines.iter().flat_map(|l| l.points.iter());
    let x_lo = all().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut x_hi = all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    // the linear curve bounds the norm and usually dwarfs the rest
    let y_max = lines
        .iter()
        .filter(|l| l.scaled)
        .flat_map(|l| l.points.iter().map(|p| p.1 + p.2.unwrap_or(0.0)))
        .fold(0.0, f64::max);
    let y_hi = if y_max > 0.0 { 1.05 * y_max } else { 1.0 };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| TOP + ph - y / y_hi * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#);
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);

    // axes and ticks
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}"/></g>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph,
        TOP + ph
    );
    for x in ticks(x_lo, x_hi, 5) {
        let px = sx(x);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            x.round()
        );
    }
    for y in ticks(0.0, y_hi, 5) {
        let py = sy(y);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y:.3}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">gate count m</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">squared Frobenius error</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    let _ = writeln!(s, r#"<g clip-path="url(#plot)" fill="none" stroke-width="1.5">"#);
    for (i, line) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = line.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
        let dash = if line.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(s, r#"<polyline points="{}" stroke="{color}"{dash}/>"#, pts.join(" "));
        for &(x, y, se) in &line.points {
            if let Some(se) = se.filter(|se| *se > 0.0) {
                let px = sx(x);
                let _ = writeln!(
                    s,
                    r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}" stroke-width="1"/>"#,
                    sy(y - se),
                    sy(y + se)
                );
            }
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, line) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 15.0 + 18.0 * i as f64;
        let dash = if line.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 15.0,
            LEFT + 45.0,
            LEFT + 52.0,
            y + 4.0,
            escape(&line.label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn emit_svg_plot(res: &ExperimentResult, path: &Path) -> Result<(), EmitError> {
    write_file(path, &svg_string(res)?)
}
