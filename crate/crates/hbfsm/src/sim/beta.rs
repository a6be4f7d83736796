use hbfsm_core::txrx::{beta_realization, BetaEstimate};
use hbfsm_core::RandomStream;
use rayon::prelude::*;

use super::ber::{curve_stream, estimate_curve_beta};
use super::{with_workers, CurveModel};
use crate::config::ResolvedExperiment;
use crate::error::AppError;

/// β of one curve plus a check of the average transmit power it yields on
/// fresh channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaReport {
    pub label: String,
    pub users: usize,
    pub estimate: BetaEstimate,
    /// Fresh realizations used for the power check.
    pub check_realizations: usize,
    /// `β² · mean tr(H_eff† H_eff†ᴴ)`, the average of `tr(P Pᴴ)`; compare to K.
    pub mean_power: f64,
    /// Median of `tr(P Pᴴ)` over the same draws.
    pub median_power: f64,
    pub check_degenerate: usize,
}

/// Same β as the BER run of the curve, then `check_realizations` new
/// draws from an independent stream.
pub fn beta_report(exp: &ResolvedExperiment, index: usize, check_realizations: usize) -> Result<BetaReport, AppError> {
    let curve = &exp.curves[index];
    let model = CurveModel::new(curve)?;
    let run = &exp.config.run;
    let root = curve_stream(exp.config.seed, &curve.label);
    let estimate = estimate_curve_beta(&model, run.beta_realizations, run.beta_rule.into(), &root.named("beta"))?;
    let check = RandomStream::new(exp.config.seed).named("power").named(&curve.label);
    let draw = |s: &RandomStream| model.draw(s);
    let samples = (0..check_realizations)
        .into_par_iter()
        .map(|r| beta_realization(&check, r, &draw))
        .collect::<hbfsm_core::Result<Vec<_>>>()?;
    let b2 = estimate.beta * estimate.beta;
    let mut powers: Vec<f64> = samples
        .iter()
        .map(|s| s.trace * b2)
        .filter(|p| p.is_finite())
        .collect();
    let mean_power = powers.iter().sum::<f64>() / powers.len().max(1) as f64;
    powers.sort_by(f64::total_cmp);
    let median_power = powers.get(powers.len() / 2).copied().unwrap_or(f64::NAN);
    Ok(BetaReport {
        label: curve.label.clone(),
        users: model.users(),
        estimate,
        check_realizations,
        mean_power,
        median_power,
        check_degenerate: samples.iter().filter(|s| s.degenerate).count(),
    })
}

pub fn run_beta_experiment(exp: &ResolvedExperiment, check_realizations: usize) -> Result<Vec<BetaReport>, AppError> {
    if exp.curves.is_empty() {
        return Err(AppError::config("curves", "a beta run needs at least one curve"));
    }
    if check_realizations == 0 {
        return Err(AppError::config("check_realizations", "must be at least 1"));
    }
    with_workers(exp.config.run.workers, || {
        (0..exp.curves.len()).map(|i| beta_report(exp, i, check_realizations)).collect()
    })?
}
