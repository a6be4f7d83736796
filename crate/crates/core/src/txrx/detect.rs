use alloc::vec::Vec;
use core::ops::AddAssign;

use num_complex::Complex64;
use num_traits::Zero;
// only needed when std's inherent float methods are absent
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{Constellation, LinkDesign, Precoder, TxFrame};
use crate::numerics::{complex_gaussian, dot};
use crate::{Error, Result};

/// Gain that the ZF chain puts on a user's symbol after combining:
/// `w_{a_i,i}ᴴ r_i = β sqrt(ρ) s_i + noise`.
pub fn detection_scale(beta: f64, rho: f64) -> f64 {
    beta * rho.sqrt()
}

/// `r_i = sqrt(ρ) Σ_j H_{a_j,i} f_{a_j,j} p_{a_j,j} s + n_i` for every user,
/// with `n_i ~ CN(0, σ² I)`.
pub fn transmit<R: Rng + ?Sized>(
    frame: &TxFrame,
    design: &LinkDesign,
    precoder: &Precoder,
    rho: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    let k = design.n_users();
    if frame.users.len() != k {
        return Err(Error::dims("frame must carry one symbol per user"));
    }
    let selection = frame.selection();
    if selection.iter().any(|&a| a >= design.n_arrays()) {
        return Err(Error::invalid("array index out of range"));
    }
    let x = precoder.matrix.mul_vec(&frame.symbols())?;
    let amp = rho.sqrt();
    let noise_amp = sigma2.sqrt();
    let received = (0..k)
        .map(|i| {
            let mut r = alloc::vec![Complex64::zero(); design.n_r()];
            for (j, &xj) in x.iter().enumerate() {
                let v = design.response(i, selection[j], j);
                for (acc, &h) in r.iter_mut().zip(v) {
                    *acc += h * xj * amp;
                }
            }
            if sigma2 > 0.0 {
                for acc in r.iter_mut() {
                    *acc += complex_gaussian(rng) * noise_amp;
                }
            }
            r
        })
        .collect();
    Ok(received)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub array: usize,
    pub label: usize,
}

/// Per-user ML detector. It only knows the combiners `w_{a,i}`, the
/// constellation and the scale `β sqrt(ρ)`.
#[derive(Debug, Clone)]
pub struct UserDetector {
    combiners: Vec<Vec<Complex64>>,
    inv_scale: f64,
}

impl UserDetector {
    pub fn new(design: &LinkDesign, user: usize, scale: f64) -> Self {
        let w = design.combiner_matrix(user);
        Self {
            combiners: (0..w.cols()).map(|a| w.column(a)).collect(),
            inv_scale: 1.0 / scale,
        }
    }

    /// `argmin_{a,m} |w_{a,i}ᴴ r / scale − s_m|²`, lowest (a, m) on ties.
    pub fn detect(&self, r: &[Complex64], constellation: &Constellation) -> Detection {
        let mut best = Detection { array: 0, label: 0 };
        let mut best_d = f64::INFINITY;
        for (a, w) in self.combiners.iter().enumerate() {
            let z = dot(w, r) * self.inv_scale;
            for (m, s) in constellation.points().iter().enumerate() {
                let d = (z - s).norm_sqr();
                if d < best_d {
                    best_d = d;
                    best = Detection { array: a, label: m };
                }
            }
        }
        best
    }
}

pub fn ml_detect(
    r: &[Complex64],
    design: &LinkDesign,
    user: usize,
    constellation: &Constellation,
    scale: f64,
) -> Detection {
    UserDetector::new(design, user, scale).detect(r, constellation)
}

/// Bit and error tallies. Integer-only so partial sums merge exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameCounts {
    pub uses: u64,
    pub spatial_bits: u64,
    pub symbol_bits: u64,
    pub spatial_errors: u64,
    pub symbol_errors: u64,
    pub degenerate_uses: u64,
}

impl FrameCounts {
    pub fn bits(&self) -> u64 {
        self.spatial_bits + self.symbol_bits
    }

    pub fn errors(&self) -> u64 {
        self.spatial_errors + self.symbol_errors
    }
}

impl AddAssign for FrameCounts {
    fn add_assign(&mut self, o: Self) {
        self.uses += o.uses;
        self.spatial_bits += o.spatial_bits;
        self.symbol_bits += o.symbol_bits;
        self.spatial_errors += o.spatial_errors;
        self.symbol_errors += o.symbol_errors;
        self.degenerate_uses += o.degenerate_uses;
    }
}

/// Runs `uses` channel uses over one fixed design: fresh bits per use,
/// `H_eff` and `P` rebuilt for each selection tuple, detection at every
/// user.
pub fn run_frame<R: Rng + ?Sized>(
    design: &LinkDesign,
    constellation: &Constellation,
    uses: usize,
    rho: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<FrameCounts> {
    let k = design.n_users();
    let n_a = design.n_arrays();
    if !n_a.is_power_of_two() {
        return Err(Error::invalid("n_a must be a power of two"));
    }
    let spatial_bits = u64::from(n_a.trailing_zeros());
    let symbol_bits = u64::from(constellation.bits_per_symbol());
    let scale = detection_scale(design.beta(), rho);
    let detectors: Vec<UserDetector> = (0..k).map(|i| UserDetector::new(design, i, scale)).collect();

    let mut counts = FrameCounts::default();
    let mut arrays = alloc::vec![0usize; k];
    let mut labels = alloc::vec![0usize; k];
    for _ in 0..uses {
        for i in 0..k {
            arrays[i] = rng.random_range(0..n_a);
            labels[i] = rng.random_range(0..constellation.order());
        }
        let frame = TxFrame::from_indices(&arrays, &labels, constellation);
        let precoder = design.precoder(&arrays)?;
        let received = transmit(&frame, design, &precoder, rho, sigma2, rng)?;
        counts.uses += 1;
        counts.degenerate_uses += u64::from(precoder.degenerate);
        for (i, r) in received.iter().enumerate() {
            let d = detectors[i].detect(r, constellation);
            counts.spatial_bits += spatial_bits;
            counts.symbol_bits += symbol_bits;
            counts.spatial_errors += u64::from((d.array ^ arrays[i]).count_ones());
            counts.symbol_errors += u64::from((d.label ^ labels[i]).count_ones());
        }
    }
    Ok(counts)
}
