//! Static SVG rendering of a [`ComparisonReport`].

use std::fmt::Write;

use crate::martingale::{appendix_bound, fernholz_bound, ComparisonReport};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 40.0;
const CURVE_SAMPLES: usize = 240;

struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, a: f64) -> f64 {
        MARGIN_LEFT + (a - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_Y - v.min(self.y1) / self.y1 * (HEIGHT - 2.0 * MARGIN_Y)
    }
}

fn polyline(out: &mut String, frame: &Frame, f: impl Fn(f64) -> f64, color: &str, dash: &str) {
    let step = (frame.x1 - frame.x0) / (CURVE_SAMPLES - 1) as f64;
    let points: Vec<String> = (0..CURVE_SAMPLES)
        .map(|i| {
            let a = frame.x0 + step * i as f64;
            format!("{:.2},{:.2}", frame.px(a), frame.py(f(a)))
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}" points="{}"/>"#,
        points.join(" ")
    );
}

fn nice_ticks(max: f64) -> Vec<f64> {
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    (0..)
        .map(|i| i as f64 * step)
        .take_while(|t| *t <= max + 1e-12)
        .collect()
}

/// Bound curves `½e^{A/2}`, `A` and the appendix curve over the report's
/// A-range, the realised values at `τ_A`, and the crossing points.
pub fn comparison_svg(report: &ComparisonReport) -> String {
    let x1 = report.rows.last().map_or(1.0, |r| r.a);
    let assets = report.assets.max(1);
    let appendix = |a: f64| appendix_bound(assets, a).unwrap_or(f64::NAN);

    let mut y1 = fernholz_bound(x1).max(x1).max(appendix(x1));
    for r in report.reached() {
        y1 = y1.max(r.fernholz_value.unwrap_or(0.0)).max(r.sv_value.unwrap_or(0.0));
    }
    let y1 = y1 * 1.05;
    let frame = Frame { x0: 0.0, x1, y1 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let (left, right) = (frame.px(0.0), frame.px(x1));
    let (top, bottom) = (frame.py(y1), frame.py(0.0));
    let _ = writeln!(
        out,
        r#"<path d="M{left:.2},{top:.2} V{bottom:.2} H{right:.2}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(x1) {
        let x = frame.px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
            bottom + 5.0,
            bottom + 18.0
        );
    }
    for t in nice_ticks(y1) {
        let y = frame.py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t}</text>"#,
            left - 5.0,
            left - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">A</text>"#,
        (left + right) / 2.0,
        HEIGHT - 6.0
    );

    polyline(&mut out, &frame, fernholz_bound, "#1f77b4", "none");
    polyline(&mut out, &frame, |a| a, "#d62728", "none");
    polyline(&mut out, &frame, appendix, "#2ca02c", "6 4");

    for r in report.reached() {
        if let Some(z) = r.fernholz_value {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="#1f77b4"/>"##,
                frame.px(r.a),
                frame.py(z)
            );
        }
        if let Some(x) = r.sv_value {
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="5" height="5" fill="none" stroke="#d62728"/>"##,
                frame.px(r.a) - 2.5,
                frame.py(x) - 2.5
            );
        }
    }

    let c = report.crossings;
    let marks = [
        (c.lower, fernholz_bound(c.lower), "#1f77b4"),
        (c.upper, fernholz_bound(c.upper), "#1f77b4"),
        (c.appendix, c.appendix, "#2ca02c"),
    ];
    for (a, v, color) in marks {
        if !(a > 0.0 && a <= x1) {
            continue;
        }
        let (x, y) = (frame.px(a), frame.py(v));
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{bottom:.2}" stroke="{color}" stroke-dasharray="2 3"/><circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}" fill="{color}">A={a:.4}</text>"#,
            x + 6.0,
            y - 6.0
        );
    }

    let legend = [
        ("#1f77b4", "½e^(A/2)"),
        ("#d62728", "A"),
        ("#2ca02c", "1.25 J^(-3/2) A^(1/2)"),
        ("#1f77b4", "○ Z(τ_A)"),
        ("#d62728", "□ X(τ_A)"),
    ];
    for (i, (color, label)) in legend.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{label}</text>"#,
            right + 12.0,
            top + 16.0 + 18.0 * i as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::compare_at_tau;
    use crate::pathkit::WeightPath;

    #[test]
    fn svg_mentions_crossings() {
        let rows = vec![vec![0.5, 0.5]; 4];
        let p = WeightPath::new(vec![0.0, 1.0, 2.0, 3.0], &rows).unwrap();
        let report = compare_at_tau(&p, &[0.1, 1.0, 6.0]).unwrap();
        let svg = comparison_svg(&report);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("A=0.7148"));
        assert!(svg.contains("A=4.3066"));
        assert!(svg.contains("A=0.1953"));
        assert_eq!(svg.matches("<polyline").count(), 3);
    }
}
