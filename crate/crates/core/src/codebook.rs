//! Analog beamformer codebooks and beam selection.
//!
//! Two codebooks are supported:
//!
//! - *array response* (F_A): the transmit steering vectors of the channel's
//!   own paths, i.e. infinite-resolution phase shifters;
//! - *beamsteering* (F_B): 2^B steering vectors on the angle grid
//!   `2πn / 2^B`, i.e. B-bit phase shifters.
//!
//! The quantization loss of F_B against F_A is measured by the squared
//! chordal distance between the two selected beams on G(N_T, 1).

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// only needed when std's inherent float methods are absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{generate_channel, steering_vector, PathSet};
use crate::numerics::{dot, norm_sq, CMatrix, RandomStream};
use crate::{Error, Result};

/// Largest beamsteering resolution accepted; 2^20 codewords per search.
pub const MAX_BITS: u32 = 20;

/// How a beamsteering grid angle becomes per-element phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    /// Same form as the channel steering vector: element k gets `π k sin(ψ)`.
    /// Grid angles ψ and π − ψ alias to the same codeword.
    #[default]
    Sine,
    /// Grid angle used directly as the spatial frequency: element k gets `π k ψ`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    ArrayResponse,
    Beamsteering { bits: u32, convention: PhaseConvention },
}

#[derive(Debug, Clone)]
pub struct Codebook {
    kind: CodebookKind,
    n_t: usize,
    /// Source angle of each codeword (path AoD or grid angle).
    angles: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
}

impl Codebook {
    pub fn array_response(paths: &PathSet, n_t: usize) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::invalid("n_t must be positive"));
        }
        let angles: Vec<f64> = paths.aods().collect();
        let vectors = angles.iter().map(|&phi| steering_vector(phi, n_t)).collect();
        Ok(Self {
            kind: CodebookKind::ArrayResponse,
            n_t,
            angles,
            vectors,
        })
    }

    pub fn beamsteering(bits: u32, n_t: usize, convention: PhaseConvention) -> Result<Self> {
        if bits == 0 {
            return Err(Error::invalid("beamsteering resolution must be at least 1 bit"));
        }
        if bits > MAX_BITS {
            return Err(Error::ResourceLimit(alloc::format!(
                "{bits}-bit codebook exceeds the {MAX_BITS}-bit search limit"
            )));
        }
        if n_t == 0 {
            return Err(Error::invalid("n_t must be positive"));
        }
        let size = 1usize << bits;
        let angles: Vec<f64> = (0..size).map(|n| 2.0 * PI * n as f64 / size as f64).collect();
        let vectors = angles
            .iter()
            .map(|&psi| match convention {
                PhaseConvention::Sine => steering_vector(psi, n_t),
                PhaseConvention::Raw => raw_phase_vector(psi, n_t),
            })
            .collect();
        Ok(Self {
            kind: CodebookKind::Beamsteering { bits, convention },
            n_t,
            angles,
            vectors,
        })
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn codeword(&self, n: usize) -> &[Complex64] {
        &self.vectors[n]
    }

    pub fn angle(&self, n: usize) -> f64 {
        self.angles[n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.vectors.iter().map(Vec::as_slice)
    }

    /// Codewords re-listed as `order[k]` → source index (repeats allowed).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() || order.iter().any(|&i| i >= self.len()) {
            return Err(Error::invalid("reordering does not match codebook size"));
        }
        Ok(Self {
            kind: self.kind,
            n_t: self.n_t,
            angles: order.iter().map(|&i| self.angles[i]).collect(),
            vectors: order.iter().map(|&i| self.vectors[i].clone()).collect(),
        })
    }
}

fn raw_phase_vector(psi: f64, n: usize) -> Vec<Complex64> {
    let amp = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| Complex64::from_polar(amp, PI * psi * k as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamChoice {
    pub index: usize,
    /// ‖H f‖²
    pub gain: f64,
}

/// Exhaustive `argmax_n ‖H f_n‖²`; the lowest index wins ties.
pub fn select_beamformer(h: &CMatrix, cb: &Codebook) -> Result<BeamChoice> {
    if cb.is_empty() {
        return Err(Error::invalid("empty codebook"));
    }
    if h.cols() != cb.n_t() {
        return Err(Error::dims(alloc::format!(
            "channel has {} transmit antennas, codebook {}",
            h.cols(),
            cb.n_t()
        )));
    }
    let mut best = BeamChoice {
        index: 0,
        gain: f64::NEG_INFINITY,
    };
    for (n, f) in cb.iter().enumerate() {
        let gain: f64 = (0..h.rows())
            .map(|r| h.row(r).iter().zip(f).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
            .sum();
        if gain > best.gain {
            best = BeamChoice { index: n, gain };
        }
    }
    Ok(best)
}

/// `1 − |fᴴ g|²` for unit-norm f, g.
pub fn chordal_distance_sq(f: &[Complex64], g: &[Complex64]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::dims("vectors of different length"));
    }
    for v in [f, g] {
        if (norm_sq(v).sqrt() - 1.0).abs() > 1e-6 {
            return Err(Error::invalid("chordal distance needs unit-norm vectors"));
        }
    }
    Ok((1.0 - dot(f, g).norm_sqr()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationPoint {
    pub bits: u32,
    pub mean_dc2: f64,
    pub max_dc2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizationReport {
    pub n_t: usize,
    pub paths: usize,
    pub trials: usize,
    pub points: Vec<QuantizationPoint>,
    /// Smallest `c'` with `max_dc2 ≤ c' 2^{−B/(N_T−1)}` at every tested B.
    pub fitted_constant: f64,
}

impl QuantizationReport {
    pub fn from_samples(n_t: usize, paths: usize, bits: &[u32], per_trial: &[Vec<f64>]) -> Self {
        let trials = per_trial.len();
        let points: Vec<QuantizationPoint> = bits
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                let column = per_trial.iter().map(|t| t[j]);
                let (sum, max) = column.fold((0.0, 0.0f64), |(s, m), d| (s + d, m.max(d)));
                QuantizationPoint {
                    bits: b,
                    mean_dc2: if trials > 0 { sum / trials as f64 } else { 0.0 },
                    max_dc2: max,
                }
            })
            .collect();
        let fitted_constant = points
            .iter()
            .map(|p| p.max_dc2 / bound_shape(p.bits, n_t))
            .fold(0.0, f64::max);
        Self {
            n_t,
            paths,
            trials,
            points,
            fitted_constant,
        }
    }

    pub fn fitted_bound(&self, bits: u32) -> f64 {
        self.fitted_constant * bound_shape(bits, self.n_t)
    }

    /// Least-squares slope of log2(mean d_c²) against B.
    pub fn mean_decay_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.mean_dc2 > 0.0)
            .map(|p| (p.bits as f64, p.mean_dc2.log2()))
            .collect();
        least_squares_slope(&pts)
    }
}

/// `2^{−B/(N_T−1)}`
pub fn bound_shape(bits: u32, n_t: usize) -> f64 {
    let dim = (n_t.max(2) - 1) as f64;
    (-(bits as f64) / dim).exp2()
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// One channel draw: d_c²(f_A, f_B) for each beamsteering codebook.
pub fn quantization_trial(n_t: usize, paths: usize, codebooks: &[Codebook], stream: &RandomStream) -> Result<Vec<f64>> {
    let ch = generate_channel(n_t, 1, paths, stream)?;
    let fa_book = Codebook::array_response(&ch.paths, n_t)?;
    let fa = fa_book.codeword(select_beamformer(&ch.h, &fa_book)?.index);
    codebooks
        .iter()
        .map(|cb| {
            let fb = cb.codeword(select_beamformer(&ch.h, cb)?.index);
            chordal_distance_sq(fa, fb)
        })
        .collect()
}

/// Sequential study; trial `t` draws from `stream.child(t)`, so a parallel
/// driver that keeps that keying gets identical numbers.
pub fn quantization_error_study(
    n_t: usize,
    paths: usize,
    bits: &[u32],
    trials: usize,
    convention: PhaseConvention,
    stream: &RandomStream,
) -> Result<QuantizationReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let books = bits
        .iter()
        .map(|&b| Codebook::beamsteering(b, n_t, convention))
        .collect::<Result<Vec<_>>>()?;
    let samples = (0..trials)
        .map(|t| quantization_trial(n_t, paths, &books, &stream.child(t as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantizationReport::from_samples(n_t, paths, bits, &samples))
}
