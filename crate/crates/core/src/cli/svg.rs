//! Minimal self-contained SVG line charts for figure reproduction.
//!
//! Plots are rendered from exactly the row data that goes into the CSV
//! files; there is no separate computation path.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f6fb2", "#c94f2a", "#3a8c3f", "#8450a8", "#9b7f0e", "#3f8f8f",
];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

pub struct LineChart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<Series<'a>>,
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.04;
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1000.0 || (v.abs() < 1e-3 && v != 0.0) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s.to_string()
        }
    }
}

impl LineChart<'_> {
    pub fn render(&self) -> String {
        let (x_lo, x_hi) = axis_range(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0)),
        );
        let (y_lo, y_hi) = axis_range(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1)),
        );
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let to_x = |v: f64| MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
        let to_y = |v: f64| MARGIN_TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(
            out,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            self.title
        );

        // Frame and ticks.
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        for k in 0..=4 {
            let frac = k as f64 / 4.0;
            let xv = x_lo + frac * (x_hi - x_lo);
            let yv = y_lo + frac * (y_hi - y_lo);
            let xp = to_x(xv);
            let yp = to_y(yv);
            let _ = writeln!(
                out,
                r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/>"#,
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{xp:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                MARGIN_TOP + plot_h + 18.0,
                tick_label(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{yp:.2}" x2="{MARGIN_LEFT}" y2="{yp:.2}" stroke="black"/>"#,
                MARGIN_LEFT - 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 8.0,
                yp + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            self.x_label
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            self.y_label
        );

        for (idx, series) in self.series.iter().enumerate() {
            let colour = PALETTE[idx % PALETTE.len()];
            let mut path = String::new();
            for (x, y) in series.points {
                let _ = write!(path, "{:.2},{:.2} ", to_x(*x), to_y(*y));
            }
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                path.trim_end()
            );
            let legend_y = MARGIN_TOP + 14.0 + idx as f64 * 16.0;
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{legend_y:.2}" x2="{:.2}" y2="{legend_y:.2}" stroke="{colour}" stroke-width="2"/>"#,
                MARGIN_LEFT + 10.0,
                MARGIN_LEFT + 34.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                MARGIN_LEFT + 40.0,
                legend_y + 4.0,
                series.label
            );
        }
        let _ = writeln!(out, "</svg>");
        out
    }
}
