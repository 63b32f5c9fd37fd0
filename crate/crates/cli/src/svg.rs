//! Minimal static line plots.
//!
//! The polyline is written in data coordinates and mapped to the canvas by
//! a group transform, so its `points` attribute carries the plotted values
//! verbatim.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn span(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    let (x0, x1) = span(points.iter().map(|p| p.0));
    let (y0, y1) = span(points.iter().map(|p| p.1));
    let sx = (W - 2.0 * MARGIN) / (x1 - x0);
    let sy = (H - 2.0 * MARGIN) / (y1 - y0);
    // pixel = (MARGIN + sx (x - x0), H - MARGIN - sy (y - y0))
    let (tx, ty) = (MARGIN - sx * x0, H - MARGIN + sy * y0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{title}</text>"#, W / 2.0);
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(s, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#);
    for (v, anchor_x, anchor_y, align) in [
        (x0, l, b + 18.0, "start"),
        (x1, r, b + 18.0, "end"),
    ] {
        let _ = writeln!(s, r#"<text x="{anchor_x}" y="{anchor_y}" text-anchor="{align}" font-size="12">{v:.4}</text>"#);
    }
    for (v, y) in [(y0, b), (y1, t)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-size="12">{v:.4}</text>"#, l - 6.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{xlabel}</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x},{y}")).collect();
    let _ = writeln!(s, r#"<g transform="matrix({sx} 0 0 {} {tx} {ty})">"#, -sy);
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2" vector-effect="non-scaling-stroke"/>"#,
        pts.join(" ")
    );
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

/// Reads back the `points` of the first polyline.
#[cfg(test)]
pub fn polyline_points(svg: &str) -> Vec<(f64, f64)> {
    let start = svg.find("points=\"").expect("polyline") + 8;
    let end = start + svg[start..].find('"').unwrap();
    svg[start..end]
        .split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let pts = [(1.0, 0.1), (2.0, 1.0 / 3.0), (3.0, 2.5)];
        let svg = line_plot("t", "x", "y", &pts);
        assert_eq!(polyline_points(&svg), pts);
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn flat_series_still_renders() {
        let svg = line_plot("t", "x", "y", &[(1.0, 2.0)]);
        assert!(!svg.contains("inf") && !svg.contains("NaN"));
    }
}
