//! Minimal hand-rolled SVG line charts; informational only, tests assert
//! CSV contents.

use std::fmt::Write as _;
use std::path::Path;

use lipdp::Error;

/// One named polyline: a label and its (x, y) points.
pub type Series = (String, Vec<(f64, f64)>);

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub fn line_chart(
    path: &Path,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
) -> Result<(), Error> {
    let points: Vec<(f64, f64)> = series.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, 0.0f64, f64::MIN);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if points.is_empty() || x0 == x1 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{title}</text>"#,
        W / 2.0
    );
    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (tick, frac) in [(x0, 0.0), (x1, 1.0)] {
        let x = MARGIN + frac * (W - 2.0 * MARGIN);
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle" font-size="10">{tick:.3}</text>"#,
            H - MARGIN + 16.0
        );
    }
    for (tick, frac) in [(y0, 0.0), (y1, 1.0)] {
        let y = H - MARGIN - frac * (H - 2.0 * MARGIN);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{tick:.3}</text>"#,
            MARGIN - 6.0
        );
    }
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path_points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{},{}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path_points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{label}</text>"#,
            W - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64
        );
    }
    let _ = writeln!(s, "</svg>");
    std::fs::write(path, s)?;
    Ok(())
}
