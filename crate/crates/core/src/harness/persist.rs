//! CSV and SVG output and the run manifest.
//!
//! Trajectory CSV columns: `t`, then `re_rc`, `im_rc` for every density-matrix
//! entry (r, c) in row-major order, then `C` and `F` (overlap with the Bell
//! target the stationary state approaches). Sweep CSV columns: the knob, each
//! requested output, `mu1`, `method`, `approximate`, `error`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::sweep::SweepTable;
use crate::analytic::stationary_target_phase;
use crate::dynamics::{Tolerances, Trajectory};
use crate::error::Result;
use crate::measures::{bell_target, concurrence, fidelity_with};
use crate::model::ModelSpec;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn trajectory_header() -> String {
    let mut cols = vec!["t".to_string()];
    for r in 0..4 {
        for c in 0..4 {
            cols.push(format!("re_{r}{c}"));
            cols.push(format!("im_{r}{c}"));
        }
    }
    cols.push("C".into());
    cols.push("F".into());
    cols.join(",")
}

pub fn trajectory_csv(spec: &ModelSpec, traj: &Trajectory) -> Result<String> {
    let mut out = trajectory_header();
    out.push('\n');
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let mut cells = vec![fmt_f64(*t)];
        for r in 0..4 {
            for c in 0..4 {
                let z = rho.get(r, c);
                cells.push(fmt_f64(z.re));
                cells.push(fmt_f64(z.im));
            }
        }
        cells.push(fmt_f64(concurrence(rho)?));
        cells.push(fmt_f64(fidelity_with(rho, &bell_target(stationary_target_phase(spec, *t)))));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut cols = vec![table.knob.clone()];
    cols.extend(table.outputs.iter().map(|o| o.name().to_string()));
    cols.extend(["mu1", "method", "approximate", "error"].map(String::from));
    let mut out = cols.join(",");
    out.push('\n');
    for row in &table.rows {
        let mut cells = vec![fmt_f64(row.value)];
        for k in 0..table.outputs.len() {
            cells.push(fmt_f64(row.values.get(k).copied().unwrap_or(f64::NAN)));
        }
        cells.push(row.mu1.map(fmt_f64).unwrap_or_default());
        cells.push(row.method.map(|m| serde_json::to_value(m).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()).unwrap_or_default());
        cells.push(row.approximate.to_string());
        cells.push(row.error.as_deref().map(|e| format!("\"{}\"", e.replace('"', "'"))).unwrap_or_default());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub input_hash: String,
    pub timestamp: String,
    pub tolerances: Option<Tolerances>,
    pub methods: Vec<String>,
    pub outputs: Vec<String>,
}

/// SHA-256 over the command, version, input and tolerances (not the time).
pub fn input_hash(command: &str, input: &Value, tolerances: Option<&Tolerances>) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(TOOL_VERSION.as_bytes());
    h.update([0]);
    h.update(serde_json::to_string(input).unwrap_or_default().as_bytes());
    h.update([0]);
    if let Some(t) = tolerances {
        h.update(fmt_f64(t.rtol).as_bytes());
        h.update(fmt_f64(t.atol).as_bytes());
    }
    hex::encode(h.finalize())
}

impl RunManifest {
    pub fn new(command: &str, input: &Value, tolerances: Option<Tolerances>, methods: Vec<String>, outputs: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            input_hash: input_hash(command, input, tolerances.as_ref()),
            timestamp: chrono::Utc::now().to_rfc3339(),
            tolerances,
            methods,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal line plot; NaN points break the line.
pub fn line_plot_svg(title: &str, x_label: &str, series: &[Series]) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let finite = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, title);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 10.0, x_label);
    let _ = writeln!(s, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{x:.4}</text>"#, sx(x), h - m + 15.0);
    }
    for y in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y:.4}</text>"#, m - 4.0, sy(y) + 4.0);
    }
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &ser.points {
            if x.is_finite() && y.is_finite() {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.trim_end());
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, w - m + 4.0, m + 14.0 * (k as f64 + 1.0), ser.name);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::quantum::DensityMatrix;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn trajectory_csv_shape_and_determinism() {
        let spec = ModelSpec::symmetric(10.0, 0.5, 0.0, 1.0, 0.1);
        let run = || {
            let traj = evolve(&spec, &DensityMatrix::ground(), 2.0, 11, &Tolerances::default()).unwrap();
            trajectory_csv(&spec, &traj).unwrap()
        };
        let a = run();
        assert_eq!(a, run());
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines.len(), 12);
        assert!(lines.iter().all(|l| l.split(',').count() == 35));
        assert!(lines[0].starts_with("t,re_00,im_00"));
    }

    #[test]
    fn hash_ignores_time() {
        let input = serde_json::json!({"mu1": 1.0});
        let a = RunManifest::new("evolve", &input, Some(Tolerances::default()), vec![], vec![]);
        let b = RunManifest::new("evolve", &input, Some(Tolerances::default()), vec!["x".into()], vec![]);
        assert_eq!(a.input_hash, b.input_hash);
        let c = RunManifest::new("evolve", &serde_json::json!({"mu1": 1.0000000000000002}), Some(Tolerances::default()), vec![], vec![]);
        assert_ne!(a.input_hash, c.input_hash);
        assert_eq!(a.input_hash.len(), 64);
    }

    #[test]
    fn svg_is_well_formed() {
        let s = line_plot_svg("C", "t", &[Series { name: "C", points: vec![(0.0, 0.0), (1.0, f64::NAN), (2.0, 0.3)] }]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<path").count(), 1);
    }
}
