use hbfsm_core::txrx::{beta_realization, combine_beta, run_frame, BetaEstimate, BetaRule, FrameCounts};
use hbfsm_core::RandomStream;
use rayon::prelude::*;

use super::{db_to_linear, with_workers, CurveModel};
use crate::config::{ResolvedExperiment, RunConfig};
use crate::error::AppError;

/// Frames handed to one parallel task.
const CHUNK_FRAMES: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub counts: FrameCounts,
}

impl BerPoint {
    fn ratio(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn ber(&self) -> f64 {
        Self::ratio(self.counts.errors(), self.counts.bits())
    }

    pub fn ber_spatial(&self) -> f64 {
        Self::ratio(self.counts.spatial_errors, self.counts.spatial_bits)
    }

    pub fn ber_symbol(&self) -> f64 {
        Self::ratio(self.counts.symbol_errors, self.counts.symbol_bits)
    }

    /// Binomial standard error `sqrt(p(1−p)/bits)`. Errors inside one
    /// frame are correlated, so treat this as a lower bound.
    pub fn std_error(&self) -> f64 {
        let p = self.ber();
        let n = self.counts.bits();
        if n == 0 {
            0.0
        } else {
            (p * (1.0 - p) / n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    pub label: String,
    pub beta: BetaEstimate,
    pub points: Vec<BerPoint>,
}

/// Stream root of one curve; keyed by label so adding curves leaves the
/// others untouched.
pub fn curve_stream(seed: u64, label: &str) -> RandomStream {
    RandomStream::new(seed).named("ber").named(label)
}

/// β from `realizations` independent designs, each with a uniformly random
/// array selection.
pub fn estimate_curve_beta(
    model: &CurveModel,
    realizations: usize,
    rule: BetaRule,
    stream: &RandomStream,
) -> Result<BetaEstimate, AppError> {
    let draw = |s: &RandomStream| model.draw(s);
    let samples = (0..realizations)
        .into_par_iter()
        .map(|r| beta_realization(stream, r, &draw))
        .collect::<hbfsm_core::Result<Vec<_>>>()?;
    Ok(combine_beta(&samples, rule))
}

/// Runs one SNR point. Chunks are evaluated in parallel batches but merged
/// in order, and the early-stop rule is only checked at chunk boundaries, so
/// the result is the same for every worker count.
pub fn run_point(
    model: &CurveModel,
    beta: f64,
    rho: f64,
    uses: u64,
    run: &RunConfig,
    stream: &RandomStream,
) -> Result<FrameCounts, AppError> {
    let frame_len = run.frame_length;
    let frames = uses.div_ceil(frame_len);
    let chunks = frames.div_ceil(CHUNK_FRAMES);
    let batch = (rayon::current_num_threads() as u64 * 2).max(1);
    let chunk = |c: u64| -> hbfsm_core::Result<FrameCounts> {
        let mut acc = FrameCounts::default();
        for f in c * CHUNK_FRAMES..((c + 1) * CHUNK_FRAMES).min(frames) {
            let s = stream.child(f);
            let design = model.draw(&s.named("channels"))?.with_beta(beta);
            let n = frame_len.min(uses - f * frame_len) as usize;
            acc += run_frame(
                &design,
                model.constellation(),
                n,
                rho,
                run.noise_variance,
                &mut s.named("uses").rng(),
            )?;
        }
        Ok(acc)
    };
    let mut total = FrameCounts::default();
    let mut next = 0;
    while next < chunks {
        let end = (next + batch).min(chunks);
        let parts: Vec<_> = (next..end).into_par_iter().map(chunk).collect();
        for part in parts {
            total += part?;
            if run.early_stop && total.errors() >= run.min_errors && total.uses >= run.min_uses {
                return Ok(total);
            }
        }
        next = end;
    }
    Ok(total)
}

/// Full SNR sweep for curve `index` on the current rayon pool.
pub fn run_curve(exp: &ResolvedExperiment, index: usize) -> Result<CurveResult, AppError> {
    let curve = &exp.curves[index];
    let model = CurveModel::new(curve)?;
    let run = &exp.config.run;
    let root = curve_stream(exp.config.seed, &curve.label);
    let beta = estimate_curve_beta(&model, run.beta_realizations, run.beta_rule.into(), &root.named("beta"))?;
    let frames = root.named("frames");
    let points = exp
        .snr_points
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let counts = run_point(&model, beta.beta, db_to_linear(snr_db), exp.uses_at(i), run, &frames.child(i as u64))?;
            Ok(BerPoint { snr_db, counts })
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    Ok(CurveResult {
        label: curve.label.clone(),
        beta,
        points,
    })
}

pub fn run_ber_experiment(exp: &ResolvedExperiment) -> Result<Vec<CurveResult>, AppError> {
    if exp.curves.is_empty() {
        return Err(AppError::config("curves", "a BER run needs at least one curve"));
    }
    exp.require_snr_grid()?;
    with_workers(exp.config.run.workers, || {
        (0..exp.curves.len()).map(|i| run_curve(exp, i)).collect()
    })?
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn small(extra: &str) -> ResolvedExperiment {
        let text = format!(
            r#"
seed = 11
snr_db = [-20.0, 30.0]
[run]
uses_per_point = 3000
beta_realizations = 500
{extra}
[[curves]]
label = "F_A"
codebook = "array_response"
"#
        );
        ExperimentConfig::from_toml(&text).unwrap().resolve().unwrap()
    }

    #[test]
    fn low_snr_is_guessing() {
        let exp = small("early_stop = false");
        let r = run_ber_experiment(&exp).unwrap();
        let p = r[0].points[0];
        assert_eq!(p.counts.uses, 3000);
        // the array index is pure guessing; symbols on weak arrays see a
        // combiner with tiny noise gain and keep a little information
        let se = (0.25 / p.counts.spatial_bits as f64).sqrt();
        assert!((p.ber_spatial() - 0.5).abs() < 3.0 * se, "{}", p.ber_spatial());
        assert!(p.ber() > 0.46 && p.ber() <= 0.5 + 3.0 * p.std_error(), "{}", p.ber());
    }

    #[test]
    fn zero_noise_is_error_free() {
        let exp = small("noise_variance = 0.0");
        let r = run_ber_experiment(&exp).unwrap();
        for p in &r[0].points {
            assert_eq!(p.counts.errors(), 0);
            assert_eq!(p.counts.uses, 3000);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let mut a = small("workers = 1");
        let r1 = run_ber_experiment(&a).unwrap();
        a.config.run.workers = 5;
        let r5 = run_ber_experiment(&a).unwrap();
        assert_eq!(r1, r5);
    }

    #[test]
    fn early_stop_honours_minimums() {
        let mut exp = small("min_errors = 50\nmin_uses = 2000");
        exp.config.run.uses_per_point = 20_000;
        let r = run_ber_experiment(&exp).unwrap();
        let p = r[0].points[0];
        // stops at the first chunk boundary past both minimums
        assert_eq!(p.counts.uses, 2 * CHUNK_FRAMES * 100);
        assert!(p.counts.errors() >= 50);
    }

    #[test]
    fn accounting() {
        let exp = small("");
        let r = run_ber_experiment(&exp).unwrap();
        for p in &r[0].points {
            assert_eq!(p.counts.errors(), p.counts.spatial_errors + p.counts.symbol_errors);
            assert!(p.counts.errors() <= p.counts.bits());
            assert!((0.0..=1.0).contains(&p.ber()));
        }
    }
}
