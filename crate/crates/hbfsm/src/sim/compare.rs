use super::ber::{run_ber_experiment, BerPoint, CurveResult};
use crate::config::ResolvedExperiment;
use crate::error::AppError;

/// Where a BER curve meets the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    At(f64),
    /// Already at or below the target at the first grid point.
    BelowGrid,
    /// Never reaches the target on the grid.
    Unreachable,
}

impl Crossing {
    pub fn snr_db(self) -> Option<f64> {
        match self {
            Crossing::At(s) => Some(s),
            _ => None,
        }
    }
}

/// log10 BER, with an error-free point standing in at half an error.
fn log_ber(p: &BerPoint) -> f64 {
    let bits = p.counts.bits().max(1) as f64;
    p.ber().max(0.5 / bits).log10()
}

/// First crossing of `target`, interpolating log10(BER) linearly in dB.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Crossing {
    let Some(i) = points.iter().position(|p| p.ber() <= target) else {
        return Crossing::Unreachable;
    };
    if i == 0 {
        return Crossing::BelowGrid;
    }
    let (a, b) = (&points[i - 1], &points[i]);
    let (ya, yb, yt) = (log_ber(a), log_ber(b), target.log10());
    if (ya - yb).abs() < f64::EPSILON {
        return Crossing::At(b.snr_db);
    }
    Crossing::At(a.snr_db + (ya - yt) / (ya - yb) * (b.snr_db - a.snr_db))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gain {
    pub label: String,
    pub reference: String,
    pub crossing: Crossing,
    pub reference_crossing: Crossing,
    /// Reference SNR minus this curve's SNR at the target BER.
    pub gain_db: Option<f64>,
}

pub fn gains(curves: &[CurveResult], reference: usize, target: f64) -> Vec<Gain> {
    let rc = snr_at_ber(&curves[reference].points, target);
    curves
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != reference)
        .map(|(_, c)| {
            let cc = snr_at_ber(&c.points, target);
            Gain {
                label: c.label.clone(),
                reference: curves[reference].label.clone(),
                crossing: cc,
                reference_crossing: rc,
                gain_db: rc.snr_db().zip(cc.snr_db()).map(|(r, s)| r - s),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub curves: Vec<CurveResult>,
    pub reference: usize,
    pub target_ber: f64,
    pub gains: Vec<Gain>,
}

pub fn run_comparison(exp: &ResolvedExperiment) -> Result<Comparison, AppError> {
    let reference = exp.check_comparable()?;
    let curves = run_ber_experiment(exp)?;
    let target_ber = exp.config.run.target_ber;
    let gains = gains(&curves, reference, target_ber);
    Ok(Comparison {
        curves,
        reference,
        target_ber,
        gains,
    })
}
