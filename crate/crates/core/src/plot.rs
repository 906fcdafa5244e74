//! SVG rendering of training-size ablation curves.
//!
//! Left panel: mean F1 per training fraction. Right panel: the same values
//! as a percentage of the full-data F1 of each curve.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    /// (fraction, mean F1), sorted by fraction.
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    /// Each point relative to the full-data value, in percent. Empty when
    /// the curve has no positive full-data point.
    pub fn relative(&self) -> Vec<(f64, f64)> {
        let full = self.points.iter().find(|(f, _)| *f == 1.0).map(|p| p.1);
        match full {
            Some(full) if full > 0.0 => self.points.iter().map(|&(f, v)| (f, 100.0 * v / full)).collect(),
            _ => Vec::new(),
        }
    }
}

/// One curve per (setting, row) with entries at two or more fractions.
pub fn ablation_curves(report: &MetricsReport) -> Vec<Curve> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for e in &report.entries {
        let key = (e.setting.as_str(), e.row.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let multi_setting = keys.iter().any(|k| k.0 != keys[0].0);
    keys.into_iter()
        .filter_map(|(setting, row)| {
            let mut points: Vec<(f64, f64)> = report
                .entries
                .iter()
                .filter(|e| e.setting == setting && e.row == row)
                .map(|e| (e.fraction, e.aggregate.mean_f1))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            points.dedup_by(|a, b| a.0 == b.0);
            (points.len() >= 2).then(|| Curve {
                label: if multi_setting { format!("{row} ({setting})") } else { row.to_string() },
                points,
            })
        })
        .collect()
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 260.0;
const MARGIN: f64 = 50.0;
const LEGEND_H: f64 = 18.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(out: &mut String, x0: f64, title: &str, y_label: &str, y_max: f64, series: &[(usize, Vec<(f64, f64)>)]) {
    let (left, top) = (x0 + MARGIN, MARGIN);
    let sx = |f: f64| left + (f - 0.25) / 0.75 * PANEL_W;
    let sy = |v: f64| top + PANEL_H - v / y_max * PANEL_H;
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        left + PANEL_W / 2.0,
        top - 15.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{PANEL_W:.1}" height="{PANEL_H:.1}" fill="none" stroke="#333"/>"##
    );
    for f in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}%</text>"#,
            sx(f),
            top + PANEL_H + 16.0,
            (f * 100.0) as u32
        );
    }
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r##"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"##,
            left + PANEL_W,
            left - 5.0,
            sy(v) + 4.0,
            if y_max > 10.0 { format!("{v:.0}") } else { format!("{v:.2}") },
            y = sy(v),
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">training data</text>"#,
        left + PANEL_W / 2.0,
        top + PANEL_H + 34.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        left - 38.0,
        top + PANEL_H / 2.0,
        left - 38.0,
        top + PANEL_H / 2.0,
        escape(y_label)
    );
    for (idx, points) in series {
        let color = PALETTE[idx % PALETTE.len()];
        let path: Vec<String> = points.iter().map(|&(f, v)| format!("{:.1},{:.1}", sx(f), sy(v))).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(f, v) in points {
            let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(f), sy(v));
        }
    }
}

/// Renders both panels side by side with a shared legend.
pub fn render_ablation_svg(report: &MetricsReport) -> Result<String> {
    let curves = ablation_curves(report);
    if curves.is_empty() {
        return Err(Error::Empty("ablation curves (need entries at two or more fractions)"));
    }
    let legend_rows = curves.len().div_ceil(3);
    let width = 2.0 * (PANEL_W + 2.0 * MARGIN);
    let height = PANEL_H + 2.0 * MARGIN + 30.0 + LEGEND_H * legend_rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let absolute: Vec<(usize, Vec<(f64, f64)>)> = curves.iter().enumerate().map(|(i, c)| (i, c.points.clone())).collect();
    panel(&mut out, 0.0, "F1 by training size", "F1", 1.0, &absolute);
    let relative: Vec<(usize, Vec<(f64, f64)>)> = curves
        .iter()
        .enumerate()
        .map(|(i, c)| (i, c.relative()))
        .filter(|(_, p)| !p.is_empty())
        .collect();
    let rel_max = relative
        .iter()
        .flat_map(|(_, p)| p.iter().map(|x| x.1))
        .fold(100.0_f64, f64::max);
    let rel_max = (rel_max / 20.0).ceil() * 20.0;
    panel(
        &mut out,
        PANEL_W + 2.0 * MARGIN,
        "F1 relative to full data",
        "% of full-data F1",
        rel_max,
        &relative,
    );
    let legend_top = PANEL_H + 2.0 * MARGIN + 20.0;
    for (i, c) in curves.iter().enumerate() {
        let x = MARGIN + (i % 3) as f64 * 230.0;
        let y = legend_top + (i / 3) as f64 * LEGEND_H;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            y - 10.0,
            x + 18.0,
            y,
            escape(&c.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{MetricsReport, RunScore, PRF};
    use crate::plan::Task;

    fn report() -> MetricsReport {
        let mut runs = Vec::new();
        for (row, task, vals) in [
            ("Pivot", Task::Pivot, [0.20, 0.30, 0.36, 0.45]),
            ("Justification", Task::Justification, [0.70, 0.74, 0.76, 0.77]),
        ] {
            for (f, v) in [0.25, 0.5, 0.75, 1.0].into_iter().zip(vals) {
                runs.push(RunScore {
                    task,
                    row: row.into(),
                    seed: 1,
                    fraction: f,
                    prf: PRF { precision: v, recall: v, f1: v },
                    per_class: None,
                });
            }
        }
        MetricsReport::from_runs("best", &runs).unwrap()
    }

    #[test]
    fn curves_and_relative_values() {
        let curves = ablation_curves(&report());
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].points.len(), 4);
        let rel = curves[0].relative();
        assert!((rel[2].1 - 80.0).abs() < 1e-9);
        assert_eq!(rel[3].1, 100.0);
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = render_ablation_svg(&report()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("Pivot"));
        assert!(render_ablation_svg(&MetricsReport::default()).is_err());
    }
}
