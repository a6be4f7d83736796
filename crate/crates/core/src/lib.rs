//! Link-level kernels for hybrid-beamforming spatial modulation (HBF-SM) in a
//! multi-user millimeter-wave downlink.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs and a [`RandomStream`], so Monte Carlo drivers can
//! run trials on any number of threads and still reproduce a serial run.
//!
//! Layout:
//!
//! - [`numerics`]: dense complex matrices, SVD pseudo-inverse, seeded streams
//! - [`channel`]: ULA steering vectors and the L-path geometric channel
//! - [`codebook`]: array-response and beamsteering codebooks, beam search,
//!   chordal-distance quantization study
//! - [`txrx`]: constellations, spatial mapping, link design (combiners,
//!   effective channel, ZF precoder, power scaling), transmission and ML
//!   detection
//! - [`rate`]: Gaussian-mixture output density, entropy and rate bounds
//! - [`baseline`]: classical multi-user spatial modulation for comparison

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod channel;
pub mod codebook;
mod error;
pub mod numerics;
pub mod rate;
pub mod txrx;

pub use error::{Error, Result};
pub use numerics::{CMatrix, RandomStream};

pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
