//! Transmitter and receiver chain: constellation and spatial mapping, link
//! design (beamformers, combiners, effective channel, ZF precoder, β), the
//! superposed downlink signal and the joint array/symbol ML detector.

mod constellation;
mod detect;
mod link;
mod mapping;

pub use constellation::{Constellation, SUPPORTED_ORDERS};
pub use detect::{
    detection_scale, ml_detect, run_frame, transmit, Detection, FrameCounts, UserDetector,
};
pub use link::{
    beta_realization, beta_sample, combine_beta, design_link, estimate_beta, random_selection,
    zf_precoder, BeamSource, BetaEstimate, BetaRule, BetaSample, LinkDesign, Precoder,
    DEGENERATE_CONDITION,
};
pub use mapping::{bits_per_use, sm_map, sm_unmap, SmSymbol, TxFrame};

#[cfg(test)]
mod tests;
