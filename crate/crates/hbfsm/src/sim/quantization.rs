use hbfsm_core::codebook::{quantization_error_study, QuantizationReport};
use hbfsm_core::RandomStream;

use crate::config::ResolvedExperiment;
use crate::error::AppError;

/// Chordal-distance study of the `[quantization]` section: `trials`
/// channels, F_A's best beam against each B-bit beamsteering codebook.
pub fn run_quantization(exp: &ResolvedExperiment) -> Result<QuantizationReport, AppError> {
    let cfg = &exp.config;
    let q = &cfg.quantization;
    if q.bits.is_empty() {
        return Err(AppError::config("quantization.bits", "needs at least one resolution"));
    }
    Ok(quantization_error_study(
        q.n_t,
        q.paths,
        &q.bits,
        q.trials,
        cfg.system.phase_convention.into(),
        &RandomStream::new(cfg.seed).named("quantization"),
    )?)
}
