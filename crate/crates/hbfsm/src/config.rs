//! TOML experiment description.
//!
//! Unknown keys are rejected. [`ExperimentConfig::resolve`] checks every
//! invariant and returns a [`ResolvedExperiment`] whose curves carry fully
//! materialized parameters.

use std::path::Path;

use hbfsm_core::baseline::{BaselineChannel, BaselineConfig};
use hbfsm_core::codebook::{PhaseConvention, MAX_BITS};
use hbfsm_core::txrx::{BetaRule, SUPPORTED_ORDERS};
use serde::{Deserialize, Serialize};

use crate::error::AppError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    /// Empty is allowed for runs that sweep no SNR (quantization, beta).
    #[serde(default = "empty_grid")]
    pub snr_db: SnrGrid,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub curves: Vec<CurveConfig>,
    #[serde(default)]
    pub rate: RateConfig,
    #[serde(default)]
    pub quantization: QuantizationConfig,
}

fn default_name() -> String {
    "experiment".into()
}

fn empty_grid() -> SnrGrid {
    SnrGrid::List(Vec::new())
}

/// Either an explicit list or an inclusive `start:stop:step` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl SnrGrid {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            SnrGrid::List(ref v) => v.clone(),
            SnrGrid::Range { start, stop, step } => {
                if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                    return Vec::new();
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    /// `"a:b:c"` for a range, `"a,b,…"` for a list.
    pub fn parse(text: &str) -> Result<Self, AppError> {
        let bad = || AppError::config("snr_db", format!("cannot parse SNR grid `{text}`"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok(SnrGrid::Range {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                step: num(parts[2])?,
            })
        } else {
            Ok(SnrGrid::List(text.split(',').map(num).collect::<Result<_, _>>()?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRuleName {
    MeanOfRoot,
    RootOfMean,
}

impl From<BetaRuleName> for BetaRule {
    fn from(r: BetaRuleName) -> Self {
        match r {
            BetaRuleName::MeanOfRoot => BetaRule::MeanOfRoot,
            BetaRuleName::RootOfMean => BetaRule::RootOfMean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Channel uses per SNR point.
    pub uses_per_point: u64,
    /// How many of the highest SNR points get `boosted_uses` instead.
    pub boosted_points: usize,
    pub boosted_uses: u64,
    /// Channel uses per channel realization.
    pub frame_length: u64,
    pub early_stop: bool,
    pub min_errors: u64,
    pub min_uses: u64,
    pub beta_realizations: usize,
    pub beta_rule: BetaRuleName,
    /// Rayon worker threads; 0 picks the machine default.
    pub workers: usize,
    pub target_ber: f64,
    /// σ². `snr_db` sets ρ, so SNR = ρ/σ² only for the default σ² = 1.
    pub noise_variance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            uses_per_point: 200_000,
            boosted_points: 0,
            boosted_uses: 2_000_000,
            frame_length: 100,
            early_stop: true,
            min_errors: 500,
            min_uses: 10_000,
            beta_realizations: 10_000,
            beta_rule: BetaRuleName::MeanOfRoot,
            workers: 0,
            target_ber: 1e-3,
            noise_variance: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionName {
    Sine,
    Raw,
}

impl From<ConventionName> for PhaseConvention {
    fn from(c: ConventionName) -> Self {
        match c {
            ConventionName::Sine => PhaseConvention::Sine,
            ConventionName::Raw => PhaseConvention::Raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub k: usize,
    pub n_a: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub paths: usize,
    pub order: usize,
    /// Recorded only; the simulation needs exactly K streams.
    pub n_rf: Option<usize>,
    pub phase_convention: ConventionName,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            k: 2,
            n_a: 4,
            n_t: 8,
            n_r: 1,
            paths: 3,
            order: 4,
            n_rf: None,
            phase_convention: ConventionName::Sine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    HbfSm,
    ClassicalSm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookName {
    ArrayResponse,
    Beamsteering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelName {
    Rayleigh,
    Geometric,
}

/// One BER curve. Dimension fields override `[system]` for this curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub label: String,
    #[serde(default)]
    pub scheme: SchemeName,
    pub codebook: Option<CodebookName>,
    pub bits: Option<u32>,
    pub k: Option<usize>,
    pub n_a: Option<usize>,
    pub n_t: Option<usize>,
    pub n_r: Option<usize>,
    pub paths: Option<usize>,
    pub order: Option<usize>,
    /// Classical SM only.
    pub channel: Option<ChannelName>,
    /// Marks the curve other curves are compared against.
    #[serde(default)]
    pub reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    pub realizations: usize,
    pub grid: usize,
    pub codebook: CodebookName,
    pub bits: Option<u32>,
    /// Receiving user whose mixture is evaluated (zero-based).
    pub user: usize,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            realizations: 100,
            grid: 256,
            codebook: CodebookName::ArrayResponse,
            bits: None,
            user: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantizationConfig {
    pub n_t: usize,
    pub paths: usize,
    pub bits: Vec<u32>,
    pub trials: usize,
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        Self {
            n_t: 8,
            paths: 1,
            bits: vec![4, 6, 8, 10, 12],
            trials: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CodebookChoice {
    ArrayResponse,
    Beamsteering { bits: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbfCurve {
    pub k: usize,
    pub n_a: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub paths: usize,
    pub order: usize,
    pub codebook: CodebookChoice,
    #[serde(skip)]
    pub convention: PhaseConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CurveScheme {
    HbfSm(HbfCurve),
    ClassicalSm {
        k: usize,
        n_t: usize,
        n_r: usize,
        order: usize,
        channel: ChannelName,
        paths: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedCurve {
    pub label: String,
    pub reference: bool,
    pub scheme: CurveScheme,
}

impl ResolvedCurve {
    pub fn users(&self) -> usize {
        match self.scheme {
            CurveScheme::HbfSm(ref h) => h.k,
            CurveScheme::ClassicalSm { k, .. } => k,
        }
    }

    /// (spatial, symbol) bits per user per channel use.
    pub fn bits_per_use(&self) -> (u32, u32) {
        match self.scheme {
            CurveScheme::HbfSm(ref h) => (h.n_a.trailing_zeros(), h.order.trailing_zeros()),
            CurveScheme::ClassicalSm { n_t, order, .. } => (n_t.trailing_zeros(), order.trailing_zeros()),
        }
    }

    pub fn baseline(&self) -> Option<BaselineConfig> {
        match self.scheme {
            CurveScheme::ClassicalSm {
                k,
                n_t,
                n_r,
                order,
                channel,
                paths,
            } => Some(BaselineConfig {
                k,
                n_t,
                n_r,
                order,
                channel: match channel {
                    ChannelName::Rayleigh => BaselineChannel::Rayleigh,
                    ChannelName::Geometric => BaselineChannel::Geometric { paths },
                },
            }),
            CurveScheme::HbfSm(_) => None,
        }
    }
}

/// Validated experiment with materialized curves and SNR points.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedExperiment {
    pub config: ExperimentConfig,
    pub snr_points: Vec<f64>,
    pub curves: Vec<ResolvedCurve>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub snr: Option<SnrGrid>,
    pub uses_per_point: Option<u64>,
    pub workers: Option<usize>,
}

fn positive(key: &str, v: usize) -> Result<(), AppError> {
    if v == 0 {
        return Err(AppError::config(key, "must be at least 1"));
    }
    Ok(())
}

fn power_of_two(key: &str, v: usize) -> Result<(), AppError> {
    if v == 0 || !v.is_power_of_two() {
        return Err(AppError::config(key, format!("{v} is not a power of two")));
    }
    Ok(())
}

fn check_order(key: &str, m: usize) -> Result<(), AppError> {
    if !SUPPORTED_ORDERS.contains(&m) {
        return Err(AppError::config(key, format!("{m} is not one of {SUPPORTED_ORDERS:?}")));
    }
    Ok(())
}

fn check_bits(key: &str, b: u32) -> Result<(), AppError> {
    if b == 0 || b > MAX_BITS {
        return Err(AppError::config(key, format!("{b} is outside 1..={MAX_BITS}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, AppError> {
        toml::from_str(text).map_err(|e| AppError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(ref g) = o.snr {
            self.snr_db = g.clone();
        }
        if let Some(u) = o.uses_per_point {
            self.run.uses_per_point = u;
        }
        if let Some(w) = o.workers {
            self.run.workers = w;
        }
    }

    pub fn resolve(&self) -> Result<ResolvedExperiment, AppError> {
        let snr_points = self.snr_db.points();
        if let SnrGrid::Range { start, stop, step } = self.snr_db {
            if !(step > 0.0 && stop >= start) {
                return Err(AppError::config("snr_db", "range needs step > 0 and stop ≥ start"));
            }
        }
        if snr_points.iter().any(|s| !s.is_finite()) {
            return Err(AppError::config("snr_db", "values must be finite"));
        }
        if snr_points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AppError::config("snr_db", "grid must be strictly increasing"));
        }

        let r = &self.run;
        if r.uses_per_point == 0 {
            return Err(AppError::config("run.uses_per_point", "must be at least 1"));
        }
        if r.boosted_points > 0 && r.boosted_uses == 0 {
            return Err(AppError::config("run.boosted_uses", "must be at least 1"));
        }
        if r.frame_length == 0 {
            return Err(AppError::config("run.frame_length", "must be at least 1"));
        }
        positive("run.beta_realizations", r.beta_realizations)?;
        if !(r.target_ber > 0.0 && r.target_ber < 1.0) {
            return Err(AppError::config("run.target_ber", "must lie in (0, 1)"));
        }
        if !(r.noise_variance >= 0.0 && r.noise_variance.is_finite()) {
            return Err(AppError::config("run.noise_variance", "must be finite and non-negative"));
        }

        let s = &self.system;
        positive("system.k", s.k)?;
        power_of_two("system.n_a", s.n_a)?;
        positive("system.n_t", s.n_t)?;
        positive("system.n_r", s.n_r)?;
        positive("system.paths", s.paths)?;
        check_order("system.order", s.order)?;
        if let Some(n_rf) = s.n_rf {
            if n_rf < s.k {
                return Err(AppError::config("system.n_rf", format!("{n_rf} RF chains cannot carry {} users", s.k)));
            }
        }

        let q = &self.quantization;
        if q.n_t < 2 {
            return Err(AppError::config("quantization.n_t", "must be at least 2"));
        }
        positive("quantization.paths", q.paths)?;
        positive("quantization.trials", q.trials)?;
        for (i, &b) in q.bits.iter().enumerate() {
            check_bits(&format!("quantization.bits[{i}]"), b)?;
        }

        let rc = &self.rate;
        positive("rate.realizations", rc.realizations)?;
        if rc.grid < hbfsm_core::rate::MIN_QUADRATURE_GRID {
            return Err(AppError::config(
                "rate.grid",
                format!("must be at least {}", hbfsm_core::rate::MIN_QUADRATURE_GRID),
            ));
        }
        match (rc.codebook, rc.bits) {
            (CodebookName::Beamsteering, None) => return Err(AppError::config("rate.bits", "required for a beamsteering codebook")),
            (CodebookName::Beamsteering, Some(b)) => check_bits("rate.bits", b)?,
            (CodebookName::ArrayResponse, Some(_)) => {
                return Err(AppError::config("rate.bits", "only valid with a beamsteering codebook"))
            }
            _ => {}
        }
        if rc.user >= s.k {
            return Err(AppError::config("rate.user", format!("must be below system.k = {}", s.k)));
        }

        let mut curves = Vec::with_capacity(self.curves.len());
        for (i, c) in self.curves.iter().enumerate() {
            curves.push(self.resolve_curve(i, c)?);
        }
        if curves.iter().filter(|c| c.reference).count() > 1 {
            return Err(AppError::config("curves", "at most one curve may set reference = true"));
        }
        for (i, c) in curves.iter().enumerate() {
            if curves[..i].iter().any(|o| o.label == c.label) {
                return Err(AppError::config(&format!("curves[{i}].label"), format!("duplicate label `{}`", c.label)));
            }
        }
        Ok(ResolvedExperiment {
            config: self.clone(),
            snr_points,
            curves,
        })
    }

    fn resolve_curve(&self, i: usize, c: &CurveConfig) -> Result<ResolvedCurve, AppError> {
        let key = |field: &str| format!("curves[{i}].{field}");
        let s = &self.system;
        if c.label.trim().is_empty() {
            return Err(AppError::config(&key("label"), "must not be empty"));
        }
        let k = c.k.unwrap_or(s.k);
        let n_t = c.n_t.unwrap_or(s.n_t);
        let n_r = c.n_r.unwrap_or(s.n_r);
        let paths = c.paths.unwrap_or(s.paths);
        let order = c.order.unwrap_or(s.order);
        positive(&key("k"), k)?;
        positive(&key("n_t"), n_t)?;
        positive(&key("n_r"), n_r)?;
        positive(&key("paths"), paths)?;
        check_order(&key("order"), order)?;
        let scheme = match c.scheme {
            SchemeName::HbfSm => {
                let n_a = c.n_a.unwrap_or(s.n_a);
                power_of_two(&key("n_a"), n_a)?;
                if c.channel.is_some() {
                    return Err(AppError::config(&key("channel"), "only valid for classical_sm"));
                }
                let codebook = match (c.codebook, c.bits) {
                    (None, _) => return Err(AppError::config(&key("codebook"), "required for hbf_sm")),
                    (Some(CodebookName::ArrayResponse), None) => CodebookChoice::ArrayResponse,
                    (Some(CodebookName::ArrayResponse), Some(_)) => {
                        return Err(AppError::config(&key("bits"), "only valid with a beamsteering codebook"))
                    }
                    (Some(CodebookName::Beamsteering), None) => {
                        return Err(AppError::config(&key("bits"), "required for a beamsteering codebook"))
                    }
                    (Some(CodebookName::Beamsteering), Some(b)) => {
                        check_bits(&key("bits"), b)?;
                        CodebookChoice::Beamsteering { bits: b }
                    }
                };
                CurveScheme::HbfSm(HbfCurve {
                    k,
                    n_a,
                    n_t,
                    n_r,
                    paths,
                    order,
                    codebook,
                    convention: s.phase_convention.into(),
                })
            }
            SchemeName::ClassicalSm => {
                power_of_two(&key("n_t"), n_t)?;
                if c.codebook.is_some() || c.bits.is_some() {
                    return Err(AppError::config(&key("codebook"), "classical_sm has no analog codebook"));
                }
                if c.n_a.is_some() {
                    return Err(AppError::config(&key("n_a"), "classical_sm selects antennas, not arrays; use n_t"));
                }
                CurveScheme::ClassicalSm {
                    k,
                    n_t,
                    n_r,
                    order,
                    channel: c.channel.unwrap_or(ChannelName::Rayleigh),
                    paths,
                }
            }
        };
        Ok(ResolvedCurve {
            label: c.label.clone(),
            reference: c.reference,
            scheme,
        })
    }
}

impl ResolvedExperiment {
    pub fn require_snr_grid(&self) -> Result<(), AppError> {
        if self.snr_points.is_empty() {
            return Err(AppError::config("snr_db", "this run needs a non-empty SNR grid"));
        }
        Ok(())
    }

    /// Channel uses scheduled for SNR point `index`.
    pub fn uses_at(&self, index: usize) -> u64 {
        let r = &self.config.run;
        if index + r.boosted_points >= self.snr_points.len() {
            r.boosted_uses
        } else {
            r.uses_per_point
        }
    }

    /// Index of the curve others are compared against: the flagged one, or
    /// else the first classical SM curve.
    pub fn reference_curve(&self) -> Option<usize> {
        self.curves
            .iter()
            .position(|c| c.reference)
            .or_else(|| self.curves.iter().position(|c| matches!(c.scheme, CurveScheme::ClassicalSm { .. })))
    }

    /// Every curve compared against the reference must carry the same bits
    /// per user and channel use.
    pub fn check_comparable(&self) -> Result<usize, AppError> {
        let r = self
            .reference_curve()
            .ok_or_else(|| AppError::config("curves", "comparison needs a reference or classical_sm curve"))?;
        let want = self.curves[r].bits_per_use();
        for (i, c) in self.curves.iter().enumerate() {
            if c.bits_per_use() != want {
                return Err(AppError::config(
                    &format!("curves[{i}]"),
                    format!(
                        "carries {:?} (spatial, symbol) bits per use but the reference carries {want:?}",
                        c.bits_per_use()
                    ),
                ));
            }
        }
        Ok(r)
    }
}
