//! Geometric L-path millimeter-wave channel between a BS uniform linear
//! array and a user array.
//!
//! ```text
//! H = sqrt(N_T N_R / L) · Σ_l α_l a_R(θ_l) a_T(φ_l)ᴴ
//! ```
//!
//! with half-wavelength spacing, α_l ~ CN(0, 1) and both angles uniform on
//! (0, 2π]. Angles are not folded into (−π/2, π/2]; `sin` takes care of the
//! aliasing.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// only needed when std's inherent float methods are absent
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::numerics::{complex_gaussian, CMatrix, RandomStream};
use crate::{Error, Result};

/// `(1/√n) [1, e^{jπ sin θ}, …, e^{jπ(n−1) sin θ}]ᵀ`
pub fn steering_vector(angle: f64, n: usize) -> Vec<Complex64> {
    let amp = 1.0 / (n as f64).sqrt();
    let step = PI * angle.sin();
    (0..n)
        .map(|k| Complex64::from_polar(amp, step * k as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    /// angle of departure, radians
    pub aod: f64,
    /// angle of arrival, radians
    pub aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet(Vec<Path>);

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("a channel needs at least one path"));
        }
        Ok(Self(paths))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Path> {
        self.0.iter()
    }

    pub fn aods(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|p| p.aod)
    }
}

impl core::ops::Index<usize> for PathSet {
    type Output = Path;

    fn index(&self, i: usize) -> &Path {
        &self.0[i]
    }
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMatrix,
    pub paths: PathSet,
    pub n_t: usize,
    pub n_r: usize,
}

impl ChannelRealization {
    pub fn from_paths(paths: PathSet, n_t: usize, n_r: usize) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::invalid("antenna counts must be positive"));
        }
        let h = synthesize(&paths, n_t, n_r);
        Ok(Self { h, paths, n_t, n_r })
    }

    pub fn paths_count(&self) -> usize {
        self.paths.len()
    }
}

/// Sum of rank-one path contributions.
pub fn synthesize(paths: &PathSet, n_t: usize, n_r: usize) -> CMatrix {
    let scale = ((n_t * n_r) as f64 / paths.len() as f64).sqrt();
    let mut h = CMatrix::zeros(n_r, n_t);
    for p in paths.iter() {
        let ar = steering_vector(p.aoa, n_r);
        let at = steering_vector(p.aod, n_t);
        for r in 0..n_r {
            let left = p.gain * ar[r] * scale;
            for c in 0..n_t {
                h[(r, c)] += left * at[c].conj();
            }
        }
    }
    h
}

/// Uniform on (0, 2π].
fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    2.0 * PI * (1.0 - u)
}

pub fn generate_channel(n_t: usize, n_r: usize, paths: usize, stream: &RandomStream) -> Result<ChannelRealization> {
    if paths == 0 {
        return Err(Error::invalid("path count must be at least 1"));
    }
    let mut rng = stream.rng();
    let set = (0..paths)
        .map(|_| {
            let gain = complex_gaussian(&mut rng);
            let aod = uniform_angle(&mut rng);
            let aoa = uniform_angle(&mut rng);
            Path { gain, aod, aoa }
        })
        .collect();
    ChannelRealization::from_paths(PathSet::new(set)?, n_t, n_r)
}

/// Channels from every BS array to every user.
#[derive(Debug, Clone)]
pub struct ScenarioChannels {
    n_a: usize,
    k: usize,
    grid: Vec<ChannelRealization>,
}

impl ScenarioChannels {
    /// `channels[a * k + i]` is the channel from array `a` to user `i`.
    pub fn from_grid(n_a: usize, k: usize, channels: Vec<ChannelRealization>) -> Result<Self> {
        if n_a == 0 || k == 0 || channels.len() != n_a * k {
            return Err(Error::invalid("scenario grid must hold n_a * k channels"));
        }
        let first = &channels[0];
        if channels
            .iter()
            .any(|c| c.n_t != first.n_t || c.n_r != first.n_r || c.paths.len() != first.paths.len())
        {
            return Err(Error::dims("all scenario channels must share (N_T, N_R, L)"));
        }
        Ok(Self { n_a, k, grid: channels })
    }

    pub fn n_arrays(&self) -> usize {
        self.n_a
    }

    pub fn n_users(&self) -> usize {
        self.k
    }

    pub fn n_t(&self) -> usize {
        self.grid[0].n_t
    }

    pub fn n_r(&self) -> usize {
        self.grid[0].n_r
    }

    /// Zero-based array and user.
    pub fn get(&self, array: usize, user: usize) -> &ChannelRealization {
        &self.grid[array * self.k + user]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &ChannelRealization)> {
        self.grid
            .iter()
            .enumerate()
            .map(move |(idx, c)| (idx / self.k, idx % self.k, c))
    }
}

/// Channel (a, i) is drawn from `stream.child(a).child(i)`, so it does not
/// change when N_A or K grow.
pub fn generate_scenario(
    n_a: usize,
    k: usize,
    n_t: usize,
    n_r: usize,
    paths: usize,
    stream: &RandomStream,
) -> Result<ScenarioChannels> {
    if n_a == 0 || k == 0 {
        return Err(Error::invalid("need at least one array and one user"));
    }
    let mut grid = Vec::with_capacity(n_a * k);
    for a in 0..n_a {
        let sa = stream.child(a as u64);
        for i in 0..k {
            grid.push(generate_channel(n_t, n_r, paths, &sa.child(i as u64))?);
        }
    }
    ScenarioChannels::from_grid(n_a, k, grid)
}

/// Rank of an N_R×N_T matrix by SVD threshold; used in tests and checks.
pub fn numerical_rank(h: &CMatrix) -> usize {
    match crate::numerics::svd(h) {
        Ok(d) => {
            let tol = d.max_singular_value() * 1e-10;
            d.singular_values.iter().filter(|&&s| s > tol).count()
        }
        Err(_) => 0,
    }
}
