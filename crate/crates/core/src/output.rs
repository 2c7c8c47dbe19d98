//! Artifact writers. Every file starts with the run configuration: CSV and
//! SVG as a comment line, JSON as the leading `config` field.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::characteristics::CharacteristicPath;
use crate::diagnostics::EnergySample;
use crate::error::Result;
use crate::solver::{Grid, GridState};

/// Round-trip formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), fmt_f64)
}

/// In-memory CSV table with a provenance line.
#[derive(Debug, Clone)]
pub struct CsvTable {
    buf: String,
    width: usize,
}

impl CsvTable {
    pub fn new(config: &Value, columns: &[&str]) -> Self {
        let mut buf = format!("# config: {config}\n");
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Self {
            buf,
            width: columns.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.width);
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    /// Row of preformatted cells, for mixed or missing values.
    pub fn raw_row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.buf)?;
        Ok(())
    }
}

pub fn initial_csv(config: &Value, grid: &Grid, st: &GridState) -> CsvTable {
    let mut t = CsvTable::new(config, &["r", "u", "R", "S"]);
    for (i, &r) in grid.r().iter().enumerate() {
        t.row(&[r, st.u[i], st.big_r[i], st.big_s[i]]);
    }
    t
}

/// Snapshots stacked in time order; `u_r` is supplied per snapshot.
pub fn snapshots_csv(config: &Value, grid: &Grid, snaps: &[(GridState, Vec<f64>)]) -> CsvTable {
    let mut t = CsvTable::new(config, &["t", "r", "u", "R", "S", "u_r"]);
    for (st, u_r) in snaps {
        for (i, &r) in grid.r().iter().enumerate() {
            t.row(&[st.t, r, st.u[i], st.big_r[i], st.big_s[i], u_r[i]]);
        }
    }
    t
}

pub fn energy_csv(config: &Value, samples: &[EnergySample]) -> CsvTable {
    let mut t = CsvTable::new(config, &["t", "E", "flux_lo", "flux_hi"]);
    for s in samples {
        t.row(&[s.t, s.energy, s.flux_lo, s.flux_hi]);
    }
    t
}

pub fn path_csv(config: &Value, path: &CharacteristicPath) -> CsvTable {
    let mut t = CsvTable::new(config, &["t", "r", "u", "R", "S"]);
    for p in &path.points {
        t.row(&[p.t, p.r, p.u, p.big_r, p.big_s]);
    }
    t
}

/// `(t, r, S, 1/S)` with `nan` where `S <= 0`.
pub fn inv_s_csv(config: &Value, trace: &[crate::diagnostics::InvSSample]) -> CsvTable {
    let mut t = CsvTable::new(config, &["t", "r", "S", "inv_S"]);
    for s in trace {
        t.raw_row(&[fmt_f64(s.t), fmt_f64(s.r), fmt_f64(s.s), fmt_opt(s.inv_s)]);
    }
    t
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    config: &'a Value,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object with `config` first, followed by the fields of `body`.
pub fn json_document<T: Serialize>(config: &Value, body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Document { config, body })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, config: &Value, body: &T) -> Result<()> {
    fs::write(path, json_document(config, body)?)?;
    Ok(())
}

/// One named polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

const SVG_W: f64 = 720.0;
const SVG_H: f64 = 440.0;
const PAD_L: f64 = 80.0;
const PAD_R: f64 = 150.0;
const PAD_T: f64 = 40.0;
const PAD_B: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of `series` with linear axes. Non-finite points are dropped.
pub fn svg_plot(config: &Value, title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let finite = |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().filter(finite).copied()).collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, lo + 0.5),
            _ => (0.0, 1.0),
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let pw = SVG_W - PAD_L - PAD_R;
    let ph = SVG_H - PAD_T - PAD_B;
    let sx = |x: f64| PAD_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| PAD_T + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    // "--" is not allowed inside XML comments.
    let header = config.to_string().replace("--", "- -");
    let _ = writeln!(out, "<!-- config: {header} -->");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        PAD_L + pw / 2.0,
        xml_escape(title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{PAD_L}" y="{PAD_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.4e}</text>"#,
            sx(xv),
            PAD_T + ph + 18.0,
            xv
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.4e}</text>"#,
            PAD_L - 6.0,
            sy(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        PAD_L + pw / 2.0,
        SVG_H - 10.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        PAD_T + ph / 2.0,
        PAD_T + ph / 2.0,
        xml_escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(finite)
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = PAD_T + 14.0 + 16.0 * k as f64;
        let lx = PAD_L + pw + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/><text x="{}" y="{ly}">{}</text>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0,
            lx + 24.0,
            xml_escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}
