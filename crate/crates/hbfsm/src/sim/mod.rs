//! Monte Carlo drivers.
//!
//! Every random draw comes from a [`RandomStream`] keyed by experiment,
//! curve label, SNR index and frame, and partial results are merged in index
//! order. Output therefore does not depend on the number of workers.

pub mod ber;
pub mod beta;
pub mod compare;
pub mod quantization;
pub mod rate;

use hbfsm_core::channel::generate_scenario;
use hbfsm_core::codebook::Codebook;
use hbfsm_core::txrx::{design_link, BeamSource, Constellation, LinkDesign};
use hbfsm_core::{baseline, RandomStream};

use crate::config::{CodebookChoice, CurveScheme, ResolvedCurve};
use crate::error::AppError;

/// Runs `f` on a pool of `workers` threads (0 = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, AppError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::config("run.workers", e.to_string()))?;
    Ok(pool.install(f))
}

/// Everything needed to draw link designs for one curve.
#[derive(Debug, Clone)]
pub struct CurveModel {
    pub curve: ResolvedCurve,
    codebook: Option<Codebook>,
    constellation: Constellation,
}

impl CurveModel {
    pub fn new(curve: &ResolvedCurve) -> Result<Self, AppError> {
        let (codebook, order) = match curve.scheme {
            CurveScheme::HbfSm(ref h) => {
                let cb = match h.codebook {
                    CodebookChoice::ArrayResponse => None,
                    CodebookChoice::Beamsteering { bits } => Some(Codebook::beamsteering(bits, h.n_t, h.convention)?),
                };
                (cb, h.order)
            }
            CurveScheme::ClassicalSm { order, .. } => (None, order),
        };
        Ok(Self {
            curve: curve.clone(),
            codebook,
            constellation: Constellation::new(order)?,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn users(&self) -> usize {
        self.curve.users()
    }

    /// One channel realization and its design, with β = 1.
    pub fn draw(&self, stream: &RandomStream) -> hbfsm_core::Result<LinkDesign> {
        match self.curve.scheme {
            CurveScheme::HbfSm(ref h) => {
                let sc = generate_scenario(h.n_a, h.k, h.n_t, h.n_r, h.paths, stream)?;
                let source = match self.codebook {
                    Some(ref cb) => BeamSource::Shared(cb),
                    None => BeamSource::ArrayResponse,
                };
                design_link(&sc, source)
            }
            CurveScheme::ClassicalSm { .. } => {
                let cfg = self.curve.baseline().expect("classical curve has a baseline config");
                baseline::baseline_design(&cfg, stream)
            }
        }
    }
}

/// `10^(dB/10)`
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
