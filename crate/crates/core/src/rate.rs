//! Single-user achievable rate after interference cancellation.
//!
//! With the other users' streams removed, user i sees
//! `y = sqrt(ρ_i) w_{a,i}ᴴ H_{a,i} f_{a,i} s_m + noise`, so its output is an
//! equiprobable Gaussian mixture over the N_A·M (array, symbol) hypotheses.
//! The rate is `h(y) − h(z)` with `h(z) = log2(π e σ²)`.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;
// only needed when std's inherent float methods are absent
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::numerics::{complex_gaussian, RandomStream};
use crate::txrx::{Constellation, LinkDesign};
use crate::{Error, Result};

/// Smallest accepted quadrature grid side.
pub const MIN_QUADRATURE_GRID: usize = 256;
/// Smallest accepted Monte Carlo sample count.
pub const MIN_MONTE_CARLO_SAMPLES: usize = 100_000;
/// Half-width of each integration square, in units of σ.
const SPAN: f64 = 8.0;

/// Equiprobable mixture of circular complex Gaussians sharing one variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    means: Vec<Complex64>,
    variance: f64,
}

impl GaussianMixture {
    pub fn new(means: Vec<Complex64>, variance: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid("mixture variance must be positive and finite"));
        }
        if means.iter().any(|m| !(m.re.is_finite() && m.im.is_finite())) {
            return Err(Error::invalid("mixture means must be finite"));
        }
        Ok(Self { means, variance })
    }

    pub fn means(&self) -> &[Complex64] {
        &self.means
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.means.len() as f64
    }

    /// Natural log of the density, evaluated with log-sum-exp.
    fn ln_density(&self, y: Complex64) -> f64 {
        let inv = 1.0 / self.variance;
        let mut top = f64::NEG_INFINITY;
        for m in &self.means {
            top = top.max(-(y - m).norm_sqr() * inv);
        }
        let sum: f64 = self.means.iter().map(|m| (-(y - m).norm_sqr() * inv - top).exp()).sum();
        top + sum.ln() - (self.means.len() as f64 * PI * self.variance).ln()
    }
}

pub fn gm_density(y: Complex64, gm: &GaussianMixture) -> f64 {
    let inv = 1.0 / gm.variance;
    let sum: f64 = gm.means.iter().map(|m| (-(y - m).norm_sqr() * inv).exp()).sum();
    sum * gm.weight() / (PI * gm.variance)
}

/// `log2(π e σ²)`, the entropy of CN(0, σ²).
pub fn gaussian_entropy(variance: f64) -> f64 {
    (PI * core::f64::consts::E * variance).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    /// Per-component midpoint rule on a `grid × grid` square spanning ±8σ.
    Quadrature { grid: usize },
    MonteCarlo { samples: usize },
}

impl Default for EntropyMethod {
    fn default() -> Self {
        Self::Quadrature {
            grid: MIN_QUADRATURE_GRID,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub bits: f64,
    /// Zero for quadrature.
    pub std_error: f64,
}

/// Differential entropy of the mixture in bits. `stream` only feeds the
/// Monte Carlo method.
pub fn gm_entropy(gm: &GaussianMixture, method: EntropyMethod, stream: &RandomStream) -> Result<EntropyEstimate> {
    match method {
        EntropyMethod::Quadrature { grid } => {
            if grid < MIN_QUADRATURE_GRID {
                return Err(Error::invalid(alloc::format!(
                    "quadrature grid {grid} is below the minimum {MIN_QUADRATURE_GRID}"
                )));
            }
            Ok(EntropyEstimate {
                bits: entropy_quadrature(gm, grid),
                std_error: 0.0,
            })
        }
        EntropyMethod::MonteCarlo { samples } => {
            if samples < MIN_MONTE_CARLO_SAMPLES {
                return Err(Error::invalid(alloc::format!(
                    "{samples} Monte Carlo samples is below the minimum {MIN_MONTE_CARLO_SAMPLES}"
                )));
            }
            Ok(entropy_monte_carlo(gm, samples, &mut stream.rng()))
        }
    }
}

/// `h = −Σ_k w_k ∫ N_k(y) ln f(y) dy`, each term on its own square around
/// `μ_k` so that widely spread means never starve a component of nodes.
fn entropy_quadrature(gm: &GaussianMixture, grid: usize) -> f64 {
    let sigma = gm.variance.sqrt();
    let half = SPAN * sigma;
    let step = 2.0 * half / grid as f64;
    let offsets: Vec<f64> = (0..grid).map(|n| -half + (n as f64 + 0.5) * step).collect();
    // the kernel is shared by all components; normalising it absorbs the truncated tails
    let kernel: Vec<f64> = offsets.iter().map(|x| (-x * x / gm.variance).exp()).collect();
    let mass: f64 = kernel.iter().sum::<f64>().powi(2);
    let mut total = 0.0;
    for mu in &gm.means {
        let mut acc = 0.0;
        for (dx, kx) in offsets.iter().zip(&kernel) {
            let mut row = 0.0;
            for (dy, ky) in offsets.iter().zip(&kernel) {
                row += ky * gm.ln_density(mu + Complex64::new(*dx, *dy));
            }
            acc += kx * row;
        }
        total += acc / mass;
    }
    -total * gm.weight() / LN_2
}

fn entropy_monte_carlo<R: Rng + ?Sized>(gm: &GaussianMixture, samples: usize, rng: &mut R) -> EntropyEstimate {
    let sd = gm.variance.sqrt();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let k = rng.random_range(0..gm.means.len());
        let y = gm.means[k] + complex_gaussian(rng) * sd;
        let v = -gm.ln_density(y) / LN_2;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    EntropyEstimate {
        bits: mean,
        std_error: (var / n).sqrt(),
    }
}

/// `h(y) − h(z)` by quadrature on the minimum grid, clamped at 0.
pub fn mutual_information(gm: &GaussianMixture) -> f64 {
    (entropy_quadrature(gm, MIN_QUADRATURE_GRID) - gaussian_entropy(gm.variance)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `−Σ_i w_i log2 Σ_j w_j exp(−c |μ_i − μ_j|² / σ²)`
fn pairwise_term(gm: &GaussianMixture, c: f64) -> f64 {
    let w = gm.weight();
    let inv = c / gm.variance;
    let total: f64 = gm
        .means
        .iter()
        .map(|a| {
            let inner: f64 = gm.means.iter().map(|b| w * (-(a - b).norm_sqr() * inv).exp()).sum();
            inner.ln()
        })
        .sum();
    -total * w / LN_2
}

/// Entropy of the real 2-D Gaussian with the mixture's covariance.
fn matched_gaussian_entropy(gm: &GaussianMixture) -> f64 {
    let w = gm.weight();
    let mean: Complex64 = gm.means.iter().sum::<Complex64>() * w;
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for m in &gm.means {
        let d = m - mean;
        cxx += w * d.re * d.re;
        cyy += w * d.im * d.im;
        cxy += w * d.re * d.im;
    }
    let half = gm.variance / 2.0;
    let det = (cxx + half) * (cyy + half) - cxy * cxy;
    0.5 * ((2.0 * PI * core::f64::consts::E).powi(2) * det).log2()
}

/// Pairwise-distance sandwich on the rate, in bits per use.
///
/// The lower bound uses Bhattacharyya distances `|Δ|²/(4σ²)`, the upper bound
/// is the tightest of `log2 N`, the KL-distance bound (`|Δ|²/σ²`) and the
/// covariance-matched Gaussian.
pub fn rate_bounds(gm: &GaussianMixture) -> RateBounds {
    let hz = gaussian_entropy(gm.variance);
    let lower = pairwise_term(gm, 0.25).max(0.0);
    let upper = (gm.len() as f64)
        .log2()
        .min(pairwise_term(gm, 1.0))
        .min(matched_gaussian_entropy(gm) - hz)
        .max(0.0);
    RateBounds { lower, upper }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub snr_db: f64,
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Output mixture of `user` after interference cancellation at per-user
/// SNR `rho_user`: means `sqrt(ρ_i) w_{a,i}ᴴ H_{a,i} f_{a,i} s_m` over all
/// arrays `a` and labels `m`.
pub fn mixture_for_user(
    design: &LinkDesign,
    user: usize,
    rho_user: f64,
    sigma2: f64,
    constellation: &Constellation,
) -> Result<GaussianMixture> {
    if user >= design.n_users() {
        return Err(Error::invalid("user index out of range"));
    }
    let amp = rho_user.sqrt();
    let means = (0..design.n_arrays())
        .flat_map(|a| {
            let g = design.cross_term(user, a, user, a) * amp;
            constellation.points().iter().map(move |s| g * s)
        })
        .collect();
    GaussianMixture::new(means, sigma2)
}

/// Exact rate and bounds for one mixture.
pub fn rate_point(snr_db: f64, gm: &GaussianMixture, grid: usize) -> Result<RatePoint> {
    let h = gm_entropy(gm, EntropyMethod::Quadrature { grid }, &RandomStream::new(0))?;
    let b = rate_bounds(gm);
    Ok(RatePoint {
        snr_db,
        exact: (h.bits - gaussian_entropy(gm.variance)).max(0.0),
        lower: b.lower,
        upper: b.upper,
    })
}
