//! Subcommand execution shared by the binary and the tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{ExperimentConfig, Overrides, ResolvedExperiment};
use crate::error::AppError;
use crate::output::{self, CurveEntry, Manifest, OutputDir, Series};
use crate::presets;
use crate::sim::ber::{run_ber_experiment, CurveResult};
use crate::sim::beta::run_beta_experiment;
use crate::sim::compare::{run_comparison, Crossing};
use crate::sim::quantization::run_quantization;
use crate::sim::rate::run_rate_experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ber,
    Compare,
    Rate,
    Quantization,
    Beta { check_realizations: usize },
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ber => "ber",
            Command::Compare => "compare",
            Command::Rate => "rate",
            Command::Quantization => "quantization",
            Command::Beta { .. } => "beta",
        }
    }
}

#[derive(Debug, Clone)]
pub enum ConfigSource {
    File(PathBuf),
    Preset(String),
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub source: ConfigSource,
    pub overrides: Overrides,
    pub out: PathBuf,
    pub plot: bool,
}

pub fn load(source: &ConfigSource, overrides: &Overrides) -> Result<ResolvedExperiment, AppError> {
    let mut cfg = match source {
        ConfigSource::File(p) => ExperimentConfig::load(p)?,
        ConfigSource::Preset(name) => {
            let text = presets::preset(name).ok_or_else(|| {
                AppError::config("preset", format!("unknown preset `{name}`; available: {:?}", presets::names()))
            })?;
            ExperimentConfig::from_toml(text)?
        }
    };
    cfg.apply(overrides);
    cfg.resolve()
}

/// Runs the subcommand, writes its files and returns a human-readable
/// summary.
pub fn execute(inv: &Invocation) -> Result<String, AppError> {
    let exp = load(&inv.source, &inv.overrides)?;
    // validate the command-specific parts before creating any file
    match inv.command {
        Command::Ber | Command::Beta { .. } if exp.curves.is_empty() => {
            return Err(AppError::config("curves", "at least one curve is required"))
        }
        Command::Compare => {
            exp.check_comparable()?;
        }
        _ => {}
    }
    if matches!(inv.command, Command::Ber | Command::Compare | Command::Rate) {
        exp.require_snr_grid()?;
    }
    let dir = OutputDir::create(&inv.out, &exp.config.name)?;
    let mut manifest = Manifest::new(inv.command.name(), &exp.config, exp.snr_points.clone());
    let mut summary = String::new();
    match inv.command {
        Command::Ber => {
            let curves = run_ber_experiment(&exp)?;
            write_curves(&dir, &mut manifest, &curves, inv.plot, &exp.config.name)?;
            summarize_curves(&mut summary, &curves);
        }
        Command::Compare => {
            let cmp = run_comparison(&exp)?;
            write_curves(&dir, &mut manifest, &cmp.curves, inv.plot, &exp.config.name)?;
            summarize_curves(&mut summary, &cmp.curves);
            let _ = writeln!(summary, "gain at BER {} against `{}`:", cmp.target_ber, cmp.curves[cmp.reference].label);
            let mut gains = Vec::new();
            for g in &cmp.gains {
                let text = match g.gain_db {
                    Some(d) => format!("{d:.2} dB"),
                    None => format!("n/a (curve: {}, reference: {})", crossing_text(g.crossing), crossing_text(g.reference_crossing)),
                };
                let _ = writeln!(summary, "  {}: {text}", g.label);
                gains.push(json!({
                    "label": g.label,
                    "reference": g.reference,
                    "gain_db": g.gain_db,
                    "snr_db_at_target": g.crossing.snr_db(),
                    "reference_snr_db_at_target": g.reference_crossing.snr_db(),
                }));
            }
            manifest.summary = json!({ "target_ber": cmp.target_ber, "gains": gains });
        }
        Command::Rate => {
            let pts = run_rate_experiment(&exp)?;
            manifest.files.push(dir.write("rate.csv", &output::rate_csv(&pts))?);
            if inv.plot {
                let series = [
                    ("exact", pts.iter().map(|p| (p.snr_db, p.exact)).collect::<Vec<_>>()),
                    ("lower bound", pts.iter().map(|p| (p.snr_db, p.lower)).collect()),
                    ("upper bound", pts.iter().map(|p| (p.snr_db, p.upper)).collect()),
                ]
                .map(|(label, points)| Series {
                    label: label.into(),
                    points,
                });
                let svg = output::svg_plot(&exp.config.name, "SNR (dB)", "rate (bits/use)", &series, false);
                manifest.files.push(dir.write("rate.svg", svg.as_bytes())?);
            }
            let _ = writeln!(summary, "{:>8} {:>8} {:>8} {:>8}", "snr_db", "lower", "exact", "upper");
            for p in &pts {
                let _ = writeln!(summary, "{:>8} {:>8.4} {:>8.4} {:>8.4}", p.snr_db, p.lower, p.exact, p.upper);
            }
        }
        Command::Quantization => {
            let report = run_quantization(&exp)?;
            manifest.files.push(dir.write("quantization.csv", &output::quantization_csv(&report))?);
            let slope = report.mean_decay_slope();
            let _ = writeln!(summary, "{:>4} {:>12} {:>12}", "B", "mean_dc2", "max_dc2");
            for p in &report.points {
                let _ = writeln!(summary, "{:>4} {:>12.4e} {:>12.4e}", p.bits, p.mean_dc2, p.max_dc2);
            }
            let _ = writeln!(
                summary,
                "log2(mean d_c²) slope per bit: {slope:.4} (bound shape: {:.4})",
                -1.0 / (report.n_t as f64 - 1.0)
            );
            manifest.summary = json!({
                "mean_decay_slope": slope,
                "bound_slope": -1.0 / (report.n_t as f64 - 1.0),
                "fitted_constant": report.fitted_constant,
                "trials": report.trials,
            });
        }
        Command::Beta { check_realizations } => {
            let reports = run_beta_experiment(&exp, check_realizations)?;
            manifest.files.push(dir.write("beta.csv", &output::beta_csv(&reports))?);
            for r in &reports {
                let _ = writeln!(
                    summary,
                    "{}: beta = {:.6} ({} draws, {} degenerate); mean tr(PPᴴ) = {:.4e}, median = {:.4} (K = {})",
                    r.label, r.estimate.beta, r.estimate.realizations, r.estimate.degenerate, r.mean_power, r.median_power, r.users
                );
                manifest.curves.push(CurveEntry {
                    label: r.label.clone(),
                    file: dir.file_name("beta.csv"),
                    beta: r.estimate.beta,
                    beta_realizations: r.estimate.realizations,
                    beta_degenerate: r.estimate.degenerate,
                });
            }
        }
    }
    let name = dir.file_name("manifest.json");
    manifest.files.push(name);
    dir.write("manifest.json", manifest.to_json().as_bytes())?;
    let _ = writeln!(summary, "wrote {} file(s) to {}", manifest.files.len(), inv.out.display());
    Ok(summary)
}

fn crossing_text(c: Crossing) -> &'static str {
    match c {
        Crossing::At(_) => "reached",
        Crossing::BelowGrid => "below target at grid start",
        Crossing::Unreachable => "target not reached",
    }
}

fn write_curves(dir: &OutputDir, manifest: &mut Manifest, curves: &[CurveResult], plot: bool, title: &str) -> Result<(), AppError> {
    for c in curves {
        let file = dir.write(&format!("{}.csv", output::slug(&c.label)), &output::ber_csv(c))?;
        manifest.files.push(file.clone());
        manifest.curves.push(CurveEntry {
            label: c.label.clone(),
            file,
            beta: c.beta.beta,
            beta_realizations: c.beta.realizations,
            beta_degenerate: c.beta.degenerate,
        });
    }
    if plot {
        let series: Vec<Series> = curves
            .iter()
            .map(|c| Series {
                label: c.label.clone(),
                points: c.points.iter().map(|p| (p.snr_db, p.ber())).collect(),
            })
            .collect();
        let svg = output::svg_plot(title, "SNR (dB)", "BER", &series, true);
        manifest.files.push(dir.write("ber.svg", svg.as_bytes())?);
    }
    Ok(())
}

fn summarize_curves(out: &mut String, curves: &[CurveResult]) {
    for c in curves {
        let _ = writeln!(out, "{} (beta = {:.6})", c.label, c.beta.beta);
        for p in &c.points {
            let _ = writeln!(
                out,
                "  {:>7} dB  BER {:.3e}  ({} errors / {} bits, {} degenerate uses)",
                p.snr_db,
                p.ber(),
                p.counts.errors(),
                p.counts.bits(),
                p.counts.degenerate_uses
            );
        }
    }
}

/// Path of a file written by [`execute`].
pub fn output_path(out: &Path, experiment: &str, suffix: &str) -> PathBuf {
    out.join(format!("{}-{suffix}", output::slug(experiment)))
}
