//! Minimal SVG line charts. Output depends only on the data and the constants
//! below, so plots diff cleanly between runs.

use std::fmt::Write;

use crate::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const MARKER_RADIUS: f64 = 3.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub y: &'a [f64],
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Line chart of several series over shared x values. A single point is drawn
/// as a marker instead of a degenerate polyline.
pub fn line_chart(title: &str, x_label: &str, x: &[f64], series: &[Series]) -> Result<String, CliError> {
    if x.is_empty() {
        return Err(CliError::Runtime(format!("refusing to plot '{title}': no data points")));
    }
    if let Some(s) = series.iter().find(|s| s.y.len() != x.len()) {
        return Err(CliError::Runtime(format!(
            "series '{}' has {} points, expected {}",
            s.label,
            s.y.len(),
            x.len()
        )));
    }
    let (x0, x1) = bounds(x.iter().copied());
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.y.iter().copied()));
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="25" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path d="M{MARGIN} {MARGIN} V{} H{}" fill="none" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(svg, r#"<text x="5" y="{}" font-size="10">{y0:.3}</text>"#, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<text x="5" y="{}" font-size="10">{y1:.3}</text>"#, MARGIN);

    for (i, s) in series.iter().enumerate() {
        if x.len() == 1 {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.3}" cy="{:.3}" r="{MARKER_RADIUS}" fill="{}"/>"#,
                px(x[0]),
                py(s.y[0]),
                s.color
            );
        } else {
            let points: Vec<String> =
                x.iter().zip(s.y).map(|(&a, &b)| format!("{:.3},{:.3}", px(a), py(b))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                s.color,
                points.join(" ")
            );
        }
        let ly = MARGIN + 15.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" font-size="12" fill="{}">{}</text>"#,
            WIDTH - MARGIN - 120.0,
            s.color,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Target vs prediction over the test segment.
pub fn predictions_plot(t: &[usize], target: &[f64], prediction: &[f64]) -> Result<String, CliError> {
    if t.is_empty() {
        return Err(CliError::Runtime("refusing to plot predictions: test segment is empty".into()));
    }
    let x: Vec<f64> = t.iter().map(|&v| v as f64).collect();
    line_chart(
        "Test segment: target vs prediction",
        "t",
        &x,
        &[
            Series { label: "target", color: "#1f77b4", y: target },
            Series { label: "prediction", color: "#d62728", y: prediction },
        ],
    )
}

/// Train and test score against register width.
pub fn scan_plot(qubits: &[usize], train: &[f64], test: &[f64]) -> Result<String, CliError> {
    let x: Vec<f64> = qubits.iter().map(|&v| v as f64).collect();
    line_chart(
        "Train/test score vs qubits",
        "qubits",
        &x,
        &[
            Series { label: "train", color: "#1f77b4", y: train },
            Series { label: "test", color: "#d62728", y: test },
        ],
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
