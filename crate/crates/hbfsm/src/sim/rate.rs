use hbfsm_core::channel::generate_scenario;
use hbfsm_core::codebook::Codebook;
use hbfsm_core::rate::{mixture_for_user, rate_point, RatePoint};
use hbfsm_core::txrx::{design_link, BeamSource, Constellation};
use hbfsm_core::RandomStream;
use rayon::prelude::*;

use super::{db_to_linear, with_workers};
use crate::config::{CodebookName, ResolvedExperiment};
use crate::error::AppError;

/// Per-user rate averaged over `rate.realizations` channel draws. Every SNR
/// point reuses the same draws, and each user gets ρ/K.
pub fn run_rate_experiment(exp: &ResolvedExperiment) -> Result<Vec<RatePoint>, AppError> {
    exp.require_snr_grid()?;
    let cfg = &exp.config;
    let (s, rc) = (&cfg.system, &cfg.rate);
    let sigma2 = cfg.run.noise_variance;
    if sigma2 <= 0.0 {
        return Err(AppError::config("run.noise_variance", "rate curves need a positive noise variance"));
    }
    let constellation = Constellation::new(s.order)?;
    let codebook = match rc.codebook {
        CodebookName::ArrayResponse => None,
        CodebookName::Beamsteering => Some(Codebook::beamsteering(
            rc.bits.expect("validated"),
            s.n_t,
            s.phase_convention.into(),
        )?),
    };
    let root = RandomStream::new(cfg.seed).named("rate");
    let per_realization = |r: usize| -> hbfsm_core::Result<Vec<RatePoint>> {
        let sc = generate_scenario(s.n_a, s.k, s.n_t, s.n_r, s.paths, &root.child(r as u64))?;
        let source = codebook.as_ref().map_or(BeamSource::ArrayResponse, BeamSource::Shared);
        let design = design_link(&sc, source)?;
        exp.snr_points
            .iter()
            .map(|&snr| {
                let rho_user = db_to_linear(snr) / s.k as f64;
                let gm = mixture_for_user(&design, rc.user, rho_user, sigma2, &constellation)?;
                rate_point(snr, &gm, rc.grid)
            })
            .collect()
    };
    let rows = with_workers(cfg.run.workers, || {
        (0..rc.realizations)
            .into_par_iter()
            .map(per_realization)
            .collect::<hbfsm_core::Result<Vec<_>>>()
    })??;
    let n = rows.len() as f64;
    Ok(exp
        .snr_points
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let (mut exact, mut lower, mut upper) = (0.0, 0.0, 0.0);
            for row in &rows {
                exact += row[i].exact;
                lower += row[i].lower;
                upper += row[i].upper;
            }
            RatePoint {
                snr_db,
                exact: exact / n,
                lower: lower / n,
                upper: upper / n,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn small_rate_curve() {
        let text = r#"
seed = 5
snr_db = [-20.0, 0.0, 40.0]
[system]
n_a = 2
order = 2
[rate]
realizations = 4
"#;
        let exp = ExperimentConfig::from_toml(text).unwrap().resolve().unwrap();
        let pts = run_rate_experiment(&exp).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts[0].exact < 0.1);
        assert!((pts[2].exact - 2.0).abs() < 0.02);
        for p in &pts {
            assert!(p.lower <= p.exact + 1e-6 && p.exact <= p.upper + 1e-6, "{p:?}");
        }
    }
}
