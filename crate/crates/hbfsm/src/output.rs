//! CSV tables, the JSON run manifest and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hbfsm_core::channel::{ChannelRealization, Path as RayPath, PathSet, ScenarioChannels};
use hbfsm_core::codebook::QuantizationReport;
use hbfsm_core::Complex64;
use hbfsm_core::rate::RatePoint;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::AppError;
use crate::sim::ber::CurveResult;
use crate::sim::beta::BetaReport;

pub const BER_HEADER: [&str; 8] = ["snr_db", "ber", "ber_spatial", "ber_symbol", "bits", "errors", "stderr", "degenerate"];
pub const RATE_HEADER: [&str; 4] = ["snr_db", "exact", "lower", "upper"];
pub const QUANTIZATION_HEADER: [&str; 4] = ["B", "mean_dc2", "max_dc2", "fitted_bound"];
pub const BETA_HEADER: [&str; 9] = [
    "label",
    "users",
    "beta",
    "realizations",
    "degenerate",
    "check_realizations",
    "check_degenerate",
    "mean_power",
    "median_power",
];

/// File-name-safe version of a curve label.
pub fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn ber_csv(curve: &CurveResult) -> Vec<u8> {
    csv_bytes(
        &BER_HEADER,
        curve.points.iter().map(|p| {
            vec![
                p.snr_db.to_string(),
                p.ber().to_string(),
                p.ber_spatial().to_string(),
                p.ber_symbol().to_string(),
                p.counts.bits().to_string(),
                p.counts.errors().to_string(),
                p.std_error().to_string(),
                p.counts.degenerate_uses.to_string(),
            ]
        }),
    )
}

pub fn rate_csv(points: &[RatePoint]) -> Vec<u8> {
    csv_bytes(
        &RATE_HEADER,
        points
            .iter()
            .map(|p| vec![p.snr_db.to_string(), p.exact.to_string(), p.lower.to_string(), p.upper.to_string()]),
    )
}

pub fn quantization_csv(report: &QuantizationReport) -> Vec<u8> {
    csv_bytes(
        &QUANTIZATION_HEADER,
        report.points.iter().map(|p| {
            vec![
                p.bits.to_string(),
                p.mean_dc2.to_string(),
                p.max_dc2.to_string(),
                report.fitted_bound(p.bits).to_string(),
            ]
        }),
    )
}

pub fn beta_csv(reports: &[BetaReport]) -> Vec<u8> {
    csv_bytes(
        &BETA_HEADER,
        reports.iter().map(|r| {
            vec![
                r.label.clone(),
                r.users.to_string(),
                r.estimate.beta.to_string(),
                r.estimate.realizations.to_string(),
                r.estimate.degenerate.to_string(),
                r.check_realizations.to_string(),
                r.check_degenerate.to_string(),
                r.mean_power.to_string(),
                r.median_power.to_string(),
            ]
        }),
    )
}

pub const CHANNEL_HEADER: [&str; 7] = ["a", "i", "l", "gain_re", "gain_im", "aod", "aoa"];

/// One row per path of every array-to-user channel. Values are written with
/// shortest round-trip formatting, so [`read_channel_dump`] rebuilds the
/// matrices bit for bit.
pub fn channel_dump_csv(sc: &ScenarioChannels) -> Vec<u8> {
    csv_bytes(
        &CHANNEL_HEADER,
        sc.iter().flat_map(|(a, i, ch)| {
            ch.paths.iter().enumerate().map(move |(l, p)| {
                vec![
                    a.to_string(),
                    i.to_string(),
                    l.to_string(),
                    p.gain.re.to_string(),
                    p.gain.im.to_string(),
                    p.aod.to_string(),
                    p.aoa.to_string(),
                ]
            })
        }),
    )
}

pub fn read_channel_dump(data: &[u8], n_t: usize, n_r: usize) -> Result<ScenarioChannels, AppError> {
    let bad = |row: usize, what: &str| AppError::Parse(format!("channel dump row {row}: {what}"));
    let mut rdr = csv::Reader::from_reader(data);
    let header = rdr.headers().map_err(|e| AppError::Parse(e.to_string()))?;
    if header.iter().ne(CHANNEL_HEADER) {
        return Err(AppError::Parse("channel dump: unexpected header".into()));
    }
    // (a, i) -> paths in file order
    let mut grid: Vec<Vec<Vec<RayPath>>> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| AppError::Parse(e.to_string()))?;
        let idx = |k: usize| rec[k].parse::<usize>().map_err(|_| bad(row, "bad index"));
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(row, "bad number"));
        let (a, i, l) = (idx(0)?, idx(1)?, idx(2)?);
        if grid.len() <= a {
            grid.resize_with(a + 1, Vec::new);
        }
        if grid[a].len() <= i {
            grid[a].resize_with(i + 1, Vec::new);
        }
        if grid[a][i].len() != l {
            return Err(bad(row, "path indices must be consecutive"));
        }
        grid[a][i].push(RayPath {
            gain: Complex64::new(num(3)?, num(4)?),
            aod: num(5)?,
            aoa: num(6)?,
        });
    }
    let (n_a, k) = (grid.len(), grid.first().map_or(0, Vec::len));
    let mut channels = Vec::with_capacity(n_a * k);
    for row in grid {
        if row.len() != k {
            return Err(AppError::Parse("channel dump: ragged array/user grid".into()));
        }
        for paths in row {
            channels.push(ChannelRealization::from_paths(PathSet::new(paths)?, n_t, n_r)?);
        }
    }
    Ok(ScenarioChannels::from_grid(n_a, k, channels)?)
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveEntry {
    pub label: String,
    pub file: String,
    pub beta: f64,
    pub beta_realizations: usize,
    pub beta_degenerate: usize,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub snr_db: Vec<f64>,
    pub files: Vec<String>,
    pub curves: Vec<CurveEntry>,
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig, snr_db: Vec<f64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            core_version: hbfsm_core::VERSION,
            command: command.into(),
            seed: config.seed,
            config_sha256: config_hash(config),
            config: config.clone(),
            snr_db,
            files: Vec::new(),
            curves: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// Output directory plus the experiment name used as a file prefix.
#[derive(Debug, Clone)]
pub struct OutputDir {
    pub dir: PathBuf,
    pub prefix: String,
}

impl OutputDir {
    pub fn create(dir: &Path, name: &str) -> Result<Self, AppError> {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            prefix: slug(name),
        })
    }

    pub fn file_name(&self, suffix: &str) -> String {
        format!("{}-{suffix}", self.prefix)
    }

    /// Writes `bytes` and returns the file name relative to the directory.
    pub fn write(&self, suffix: &str, bytes: &[u8]) -> Result<String, AppError> {
        let name = self.file_name(suffix);
        let path = self.dir.join(&name);
        fs::write(&path, bytes).map_err(|e| AppError::io(&path, e))?;
        Ok(name)
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Line plot as a standalone SVG document. With `log_y`, non-positive
/// values are dropped and the axis spans whole decades.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let visible: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite() && (!log_y || p.1 > 0.0))
                .map(|&(x, y)| (x, ty(y)))
                .collect()
        })
        .collect();
    let all = visible.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    } else if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    // grid and ticks
    let yticks: Vec<f64> = if log_y {
        (y0 as i64..=y1 as i64).map(|d| d as f64).collect()
    } else {
        (0..=5).map(|i| y0 + (y1 - y0) * i as f64 / 5.0).collect()
    };
    for yt in yticks {
        let label = if log_y { format!("1e{}", yt as i64) } else { format!("{yt:.3}") };
        let _ = writeln!(
            out,
            r##"<line x1="{left}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{label}</text>"##,
            left + pw,
            left - 6.0,
            sy(yt) + 4.0,
            y = sy(yt),
        );
    }
    for i in 0..=6 {
        let xt = x0 + (x1 - x0) * i as f64 / 6.0;
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" x2="{x:.2}" y1="{top}" y2="{}" stroke="#eee"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            top + ph,
            top + ph + 18.0,
            trim_number(xt),
            x = sx(xt),
        );
    }
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 10.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (k, (s, pts)) in series.iter().zip(&visible).enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.8" points="{}"/>"#, path.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#, sx(x), sy(y));
        }
        let ly = top + 14.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            left + pw + 10.0,
            left + pw + 30.0,
            left + pw + 36.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("F_B, B=6"), "f_b__b_6");
        assert_eq!(slug("classical SM"), "classical_sm");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg_plot(
            "t",
            "SNR (dB)",
            "BER",
            &[Series {
                label: "a<b".into(),
                points: vec![(0.0, 0.1), (10.0, 1e-3), (20.0, 0.0)],
            }],
            true,
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<circle").count(), 2);
    }

    #[test]
    fn rate_table() {
        let text = String::from_utf8(rate_csv(&[RatePoint {
            snr_db: 0.0,
            exact: 0.5,
            lower: 0.25,
            upper: 1.0,
        }]))
        .unwrap();
        assert_eq!(text, "snr_db,exact,lower,upper\n0,0.5,0.25,1\n");
    }

    #[test]
    fn channel_dump_round_trip() {
        use hbfsm_core::channel::generate_scenario;
        use hbfsm_core::RandomStream;
        let sc = generate_scenario(3, 2, 8, 2, 4, &RandomStream::new(11)).unwrap();
        let bytes = channel_dump_csv(&sc);
        let text = std::str::from_utf8(&bytes).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 2 * 4);
        let back = read_channel_dump(&bytes, 8, 2).unwrap();
        assert_eq!((back.n_arrays(), back.n_users()), (3, 2));
        for (a, i, ch) in sc.iter() {
            let err = back.get(a, i).h.as_slice().iter().zip(ch.h.as_slice()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "a={a} i={i} err={err}");
        }
    }

    #[test]
    fn channel_dump_rejects_gaps() {
        let text = "a,i,l,gain_re,gain_im,aod,aoa\n0,0,1,1,0,0,0\n";
        assert!(matches!(read_channel_dump(text.as_bytes(), 4, 1), Err(AppError::Parse(_))));
    }
}
