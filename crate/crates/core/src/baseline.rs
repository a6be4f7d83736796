//! Classical multi-user spatial modulation.
//!
//! Every user owns a dedicated group of N_T transmit antennas; its spatial
//! bits pick one antenna in that group. The active columns form a K×K
//! composite channel that is zero-forced on every channel use, and each user
//! runs the same pseudo-inverse combiner and ML detector as in HBF-SM, with
//! "array" read as "antenna in my group".

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::generate_channel;
use crate::numerics::{standard_complex_gaussian, RandomStream};
use crate::txrx::{estimate_beta, run_frame, BetaEstimate, BetaRule, Constellation, FrameCounts, LinkDesign};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaselineChannel {
    /// i.i.d. CN(0, 1) entries.
    #[default]
    Rayleigh,
    /// Each group is an N_T-element ULA seeing an L-path geometric channel.
    Geometric { paths: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub k: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub order: usize,
    pub channel: BaselineChannel,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_r == 0 {
            return Err(Error::invalid("baseline needs k ≥ 1 and n_r ≥ 1"));
        }
        if self.n_t == 0 || !self.n_t.is_power_of_two() {
            return Err(Error::invalid(alloc::format!(
                "baseline n_t = {} is not a power of two",
                self.n_t
            )));
        }
        if let BaselineChannel::Geometric { paths: 0 } = self.channel {
            return Err(Error::invalid("geometric baseline channel needs at least one path"));
        }
        Constellation::new(self.order)?;
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::new(self.order)
    }

    /// (spatial, symbol) bits per user and channel use.
    pub fn bits_per_use(&self) -> (u32, u32) {
        (self.n_t.trailing_zeros(), self.order.trailing_zeros())
    }
}

/// Draws one realization. The link from group `j` to user `i` comes from
/// `stream.child(i).child(j)`; the returned design has β = 1.
pub fn baseline_design(cfg: &BaselineConfig, stream: &RandomStream) -> Result<LinkDesign> {
    cfg.validate()?;
    let (k, n_t, n_r) = (cfg.k, cfg.n_t, cfg.n_r);
    // links[i][j] holds the N_R×N_T matrix from group j to user i, column by column
    let mut links: Vec<Vec<Vec<Vec<Complex64>>>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let s = stream.child(i as u64).child(j as u64);
            let columns = match cfg.channel {
                BaselineChannel::Rayleigh => {
                    let v = standard_complex_gaussian(&s, n_r * n_t);
                    v.chunks(n_r).map(<[Complex64]>::to_vec).collect()
                }
                BaselineChannel::Geometric { paths } => {
                    let ch = generate_channel(n_t, n_r, paths, &s)?;
                    (0..n_t).map(|t| ch.h.column(t)).collect()
                }
            };
            row.push(columns);
        }
        links.push(row);
    }
    let mut responses = Vec::with_capacity(k * n_t * k);
    for row in &links {
        for t in 0..n_t {
            for cols in row {
                responses.push(cols[t].clone());
            }
        }
    }
    LinkDesign::from_responses(k, n_t, n_r, responses)
}

pub fn estimate_baseline_beta(
    cfg: &BaselineConfig,
    realizations: usize,
    rule: BetaRule,
    stream: &RandomStream,
) -> Result<BetaEstimate> {
    estimate_beta(realizations, rule, stream, |s| baseline_design(cfg, s))
}

/// One channel realization from `stream.named("channels")` carrying `uses`
/// channel uses driven by `stream.named("uses")`.
pub fn baseline_ber_trial(
    cfg: &BaselineConfig,
    beta: f64,
    rho: f64,
    sigma2: f64,
    uses: usize,
    stream: &RandomStream,
) -> Result<FrameCounts> {
    let design = baseline_design(cfg, &stream.named("channels"))?.with_beta(beta);
    run_frame(&design, &cfg.constellation()?, uses, rho, sigma2, &mut stream.named("uses").rng())
}
