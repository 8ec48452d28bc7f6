//! Kite (radar) diagram of dimension indices as plain SVG text.
//!
//! The canvas is 600×600 with the origin of the radial scale at the centre;
//! an index of 100 sits 220 px out. Axes start at 12 o'clock and go
//! clockwise. Rings mark the category bounds 25, 50 and 75 and the scale
//! end at 100.

use std::f64::consts::PI;
use std::fmt::Write;

pub const SIZE: f64 = 600.0;
pub const CENTER: f64 = 300.0;
pub const RADIUS: f64 = 220.0;
pub const RINGS: [f64; 4] = [25.0, 50.0, 75.0, 100.0];

/// Position of `value` (0–100 scale) on axis `i` of `n`.
pub fn point(i: usize, n: usize, value: f64) -> (f64, f64) {
    let angle = -PI / 2.0 + 2.0 * PI * i as f64 / n as f64;
    let r = RADIUS * value / 100.0;
    (CENTER + r * angle.cos(), CENTER + r * angle.sin())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// SVG for the given `(dimension, index)` axes, in order.
pub fn render(axes: &[(String, f64)]) -> String {
    let n = axes.len();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    for ring in RINGS {
        let _ = writeln!(
            s,
            r##"<circle class="ring" cx="{CENTER}" cy="{CENTER}" r="{:.3}" fill="none" stroke="#bbbbbb"/>"##,
            RADIUS * ring / 100.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.3}" y="{CENTER}" fill="#777777">{ring}</text>"##,
            CENTER + RADIUS * ring / 100.0 + 3.0
        );
    }
    for (i, (name, value)) in axes.iter().enumerate() {
        let (x, y) = point(i, n, 100.0);
        let _ = writeln!(
            s,
            r##"<line class="axis" x1="{CENTER}" y1="{CENTER}" x2="{x:.3}" y2="{y:.3}" stroke="#555555"/>"##
        );
        let (lx, ly) = point(i, n, 112.0);
        let _ = writeln!(
            s,
            r#"<text x="{lx:.3}" y="{ly:.3}" text-anchor="middle">{} {value:.2}</text>"#,
            escape(name)
        );
    }
    if n > 0 {
        let pts: Vec<String> = axes
            .iter()
            .enumerate()
            .map(|(i, (_, v))| {
                let (x, y) = point(i, n, *v);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polygon class="index" points="{}" fill="#2e7d32" fill-opacity="0.3" stroke="#2e7d32" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
