//! `estimates.csv` and per-option SVG line charts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::FitOutput;

pub const ESTIMATES_FILE: &str = "estimates.csv";
pub const PLOTS_DIR: &str = "plots";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub sd: Vec<Vec<f64>>,
    pub ci_lo: Vec<Vec<f64>>,
    pub ci_hi: Vec<Vec<f64>>,
}

/// A matrix of estimates ready to be written out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Numeric x position of each row (bracket midpoints); rows are evenly
    /// spaced when absent.
    pub positions: Option<Vec<f64>>,
    pub mean: Vec<Vec<f64>>,
    pub spread: Option<Spread>,
}

impl Estimates {
    pub fn empty() -> Self {
        Estimates {
            row_labels: Vec::new(),
            col_labels: Vec::new(),
            positions: None,
            mean: Vec::new(),
            spread: None,
        }
    }

    pub fn from_fit(fit: &FitOutput) -> Self {
        let m = fit.mean();
        Estimates {
            row_labels: m.row_labels().to_vec(),
            col_labels: m.col_labels().to_vec(),
            positions: None,
            mean: m.values().to_vec(),
            spread: fit.posterior().map(|s| Spread {
                sd: s.sd.clone(),
                ci_lo: s.ci_lo.clone(),
                ci_hi: s.ci_hi.clone(),
            }),
        }
    }

    pub fn with_positions(mut self, positions: Vec<f64>) -> Self {
        self.positions = Some(positions);
        self
    }

    fn is_empty(&self) -> bool {
        self.row_labels.is_empty() || self.col_labels.is_empty()
    }
}

/// One parsed line of `estimates.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub row_label: String,
    pub col_label: String,
    pub mean: f64,
    pub sd: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

/// Writes `estimates.csv` and/or `plots/*.svg` under `out_dir`, returning
/// the paths written. Output bytes depend only on `estimates`.
pub fn report_emit(estimates: &Estimates, out_dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    if formats.contains(&ReportFormat::Csv) {
        let path = out_dir.join(ESTIMATES_FILE);
        write_csv(estimates, &path)?;
        written.push(path);
    }
    if formats.contains(&ReportFormat::Svg) && !estimates.is_empty() {
        let dir = out_dir.join(PLOTS_DIR);
        fs::create_dir_all(&dir)?;
        for p in 0..estimates.col_labels.len() {
            let path = dir.join(format!("{p:02}_{}.svg", slug(&estimates.col_labels[p])));
            fs::write(&path, render_svg(estimates, p))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_csv(est: &Estimates, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["row_label", "col_label", "mean", "sd", "ci_lo", "ci_hi"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (g, row_label) in est.row_labels.iter().enumerate() {
        for (p, col_label) in est.col_labels.iter().enumerate() {
            let s = est.spread.as_ref();
            w.write_record([
                row_label.clone(),
                col_label.clone(),
                est.mean[g][p].to_string(),
                opt(s.map(|s| s.sd[g][p])),
                opt(s.map(|s| s.ci_lo[g][p])),
                opt(s.map(|s| s.ci_hi[g][p])),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_estimates_csv(path: &Path) -> Result<Vec<EstimateRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if s.is_empty() {
        "option".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 56.0;

/// Line chart of column `p` across rows with a ±1 sd band when available.
fn render_svg(est: &Estimates, p: usize) -> String {
    let n = est.row_labels.len();
    let xs: Vec<f64> = est
        .positions
        .clone()
        .unwrap_or_else(|| (0..n).map(|g| g as f64).collect());
    let (xmin, xmax) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = if xmax > xmin { xmax - xmin } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| {
        if n == 1 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + (x - xmin) / span * plot_w
        }
    };
    let py = |y: f64| TOP + (1.0 - y.clamp(0.0, 1.0)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(&est.col_labels[p])
    );

    // Axes and y ticks.
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#,
        TOP + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    for k in 0..=4 {
        let y = k as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            py(y),
            LEFT + plot_w,
            py(y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{y:.2}</text>"#,
            LEFT - 6.0,
            py(y) + 3.0
        );
    }

    // Thin out x labels so at most ~12 are drawn.
    let every = n.div_ceil(12).max(1);
    for (g, label) in est.row_labels.iter().enumerate() {
        if g % every != 0 {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            px(xs[g]),
            TOP + plot_h + 16.0,
            escape(label)
        );
    }

    if let Some(spread) = &est.spread {
        let mut pts: Vec<String> = (0..n)
            .map(|g| format!("{:.2},{:.2}", px(xs[g]), py(est.mean[g][p] + spread.sd[g][p])))
            .collect();
        pts.extend(
            (0..n)
                .rev()
                .map(|g| format!("{:.2},{:.2}", px(xs[g]), py(est.mean[g][p] - spread.sd[g][p]))),
        );
        let _ = writeln!(
            s,
            r##"<polygon points="{}" fill="#1f77b4" fill-opacity="0.25" stroke="none"/>"##,
            pts.join(" ")
        );
    }

    let line: Vec<String> = (0..n)
        .map(|g| format!("{:.2},{:.2}", px(xs[g]), py(est.mean[g][p])))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        line.join(" ")
    );
    for g in 0..n {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f77b4"/>"##,
            px(xs[g]),
            py(est.mean[g][p])
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(spread: bool) -> Estimates {
        Estimates {
            row_labels: vec!["18-29".into(), "30+".into()],
            col_labels: vec!["A".into(), "B & co".into()],
            positions: Some(vec![23.5, 40.0]),
            mean: vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            spread: spread.then(|| Spread {
                sd: vec![vec![0.01, 0.01], vec![0.02, 0.02]],
                ci_lo: vec![vec![0.68, 0.28], vec![0.16, 0.76]],
                ci_hi: vec![vec![0.72, 0.32], vec![0.24, 0.84]],
            }),
        }
    }

    #[test]
    fn empty_set_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let files = report_emit(&Estimates::empty(), dir.path(), &[ReportFormat::Csv, ReportFormat::Svg]).unwrap();
        assert_eq!(files.len(), 1);
        let text = fs::read_to_string(dir.path().join(ESTIMATES_FILE)).unwrap();
        assert_eq!(text, "row_label,col_label,mean,sd,ci_lo,ci_hi\n");
        assert!(!dir.path().join(PLOTS_DIR).exists());
    }

    #[test]
    fn four_rows_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let est = two_by_two(false);
        report_emit(&est, dir.path(), &[ReportFormat::Csv]).unwrap();
        let rows = read_estimates_csv(&dir.path().join(ESTIMATES_FILE)).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].col_label, "B & co");
        assert_eq!(rows[2].mean, 0.2);
        assert!(rows.iter().all(|r| r.sd.is_none() && r.ci_lo.is_none()));
    }

    #[test]
    fn deterministic_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let est = two_by_two(true);
        let fa = report_emit(&est, a.path(), &[ReportFormat::Csv, ReportFormat::Svg]).unwrap();
        let fb = report_emit(&est, b.path(), &[ReportFormat::Csv, ReportFormat::Svg]).unwrap();
        assert_eq!(fa.len(), 3);
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
    }

    #[test]
    fn svg_has_band_only_with_spread() {
        let with = render_svg(&two_by_two(true), 0);
        let without = render_svg(&two_by_two(false), 0);
        assert!(with.contains("<polygon"));
        assert!(!without.contains("<polygon"));
        assert!(!with.contains("<script"));
        assert!(render_svg(&two_by_two(true), 1).contains("B &amp; co"));
    }
}
