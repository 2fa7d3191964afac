//! Log-log SVG of a sweep table, written without any plotting dependency.

use std::fmt::Write as _;

use bolab_core::lab::{fit_rate, RateFit};

use crate::output::SWEEP_HEADER;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub sup_hhalf_err: f64,
    pub sup_l2_err: f64,
    pub energy_drift: f64,
    pub l2_deficit: f64,
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == SWEEP_HEADER => {}
        Some(h) => return Err(format!("unexpected header `{h}`")),
        None => return Err("empty file".into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("row {}: {e}", i + 1))?;
        if vals.len() != 5 || vals.iter().any(|v| !v.is_finite()) {
            return Err(format!("row {}: expected 5 finite values", i + 1));
        }
        rows.push(SweepRow {
            epsilon: vals[0],
            sup_hhalf_err: vals[1],
            sup_l2_err: vals[2],
            energy_drift: vals[3],
            l2_deficit: vals[4],
        });
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(rows)
}

struct Series<'a> {
    name: &'a str,
    color: &'a str,
    points: Vec<(f64, f64)>,
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, eps: f64) -> f64 {
        LEFT + (eps.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn decade_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        let l = v.log10();
        (lo.min(l), hi.max(l))
    });
    if !lo.is_finite() {
        return (-1.0, 0.0);
    }
    let (mut lo, mut hi) = (lo.floor(), hi.ceil());
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}

/// Renders the sweep table. Returns the SVG text and any warnings for stderr.
pub fn render_svg(rows: &[SweepRow]) -> (String, Vec<String>) {
    let mut warnings = Vec::new();
    let series = [
        Series {
            name: "sup H^1/2 error",
            color: "#1f77b4",
            points: rows.iter().map(|r| (r.epsilon, r.sup_hhalf_err)).collect(),
        },
        Series {
            name: "energy drift",
            color: "#d62728",
            points: rows.iter().map(|r| (r.epsilon, r.energy_drift)).collect(),
        },
    ];
    let positive = |&(e, v): &(f64, f64)| e > 0.0 && v > 0.0;
    let (x0, x1) = decade_range(rows.iter().map(|r| r.epsilon).filter(|e| *e > 0.0));
    let (y0, y1) = decade_range(
        series
            .iter()
            .flat_map(|s| s.points.iter().copied().filter(positive).map(|p| p.1)),
    );
    let axes = Axes { x0, x1, y0, y1 };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (px0, px1) = (LEFT, WIDTH - RIGHT);
    let (py0, py1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r#"<rect x="{px0:.2}" y="{py1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        px1 - px0,
        py0 - py1
    );
    for d in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = axes.px(10f64.powi(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{py0:.2}" x2="{x:.2}" y2="{py1:.2}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#,
            py0 + 18.0
        );
    }
    for d in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = axes.py(10f64.powi(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{px0:.2}" y1="{y:.2}" x2="{px1:.2}" y2="{y:.2}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            px0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">epsilon</text>"#,
        0.5 * (px0 + px1),
        HEIGHT - 15.0
    );

    for (idx, s) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(positive).collect();
        if pts.len() < s.points.len() {
            warnings.push(format!("{}: non-positive values omitted from log plot", s.name));
        }
        if pts.len() >= 2 {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(e, v)| format!("{:.2},{:.2}", axes.px(e), axes.py(v)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline class="data" points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                coords.join(" "),
                s.color
            );
        }
        for &(e, v) in &pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{}"/>"#,
                axes.px(e),
                axes.py(v),
                s.color
            );
        }
        let legend_y = TOP + 20.0 + 40.0 * idx as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{legend_y:.2}" fill="{}">{}</text>"#,
            px1 + 12.0,
            s.color,
            s.name
        );
        match fit_rate(&pts) {
            Ok(RateFit { slope, intercept, .. }) => {
                let (ea, eb) = (10f64.powf(x0), 10f64.powf(x1));
                let f = |e: f64| (intercept + slope * e.ln()).exp();
                let _ = writeln!(
                    svg,
                    r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-dasharray="5,4"/>"#,
                    axes.px(ea),
                    axes.py(f(ea)),
                    axes.px(eb),
                    axes.py(f(eb)),
                    s.color
                );
                let _ = writeln!(
                    svg,
                    r#"<text class="slope" x="{:.2}" y="{:.2}" fill="{}">slope = {slope:.3}</text>"#,
                    px1 + 12.0,
                    legend_y + 16.0,
                    s.color
                );
            }
            Err(e) => warnings.push(format!("{}: no rate fit ({e})", s.name)),
        }
    }
    svg.push_str("</svg>\n");
    (svg, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(rows: &[[f64; 5]]) -> String {
        let mut s = format!("{SWEEP_HEADER}\n");
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    #[test]
    fn five_rows_have_two_polylines_and_slopes() {
        let rows: Vec<[f64; 5]> = [1e-1f64, 3e-2, 1e-2, 3e-3, 1e-3]
            .iter()
            .map(|&e| [e, 5.0 * e, 3.0 * e, 4.0 * e.powf(0.9), 10.0 * e])
            .collect();
        let parsed = parse_sweep_csv(&csv(&rows)).unwrap();
        let (svg, warnings) = render_svg(&parsed);
        assert!(warnings.is_empty());
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("class=\"slope\"").count(), 2);
        assert!(svg.contains("slope = 1.000"));
        assert!(svg.contains("slope = 0.900"));
        assert_eq!(render_svg(&parsed).0, svg);
    }

    #[test]
    fn single_row_has_points_only() {
        let parsed = parse_sweep_csv(&csv(&[[1e-2, 0.1, 0.05, 0.2, 0.3]])).unwrap();
        let (svg, warnings) = render_svg(&parsed);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("class=\"fit\"").count(), 0);
        assert_eq!(warnings.len(), 2);
    }

    #[test]
    fn malformed_tables_rejected() {
        assert!(parse_sweep_csv("").is_err());
        assert!(parse_sweep_csv("a,b,c\n1,2,3\n").is_err());
        assert!(parse_sweep_csv(&format!("{SWEEP_HEADER}\n")).is_err());
        assert!(parse_sweep_csv(&format!("{SWEEP_HEADER}\n1,2,3\n")).is_err());
        assert!(parse_sweep_csv(&format!("{SWEEP_HEADER}\n1,2,x,4,5\n")).is_err());
    }
}
