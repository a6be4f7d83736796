//! Seeded, splittable random streams.
//!
//! A stream is named by a master seed and a path of integers (for example
//! experiment → SNR index → frame → draw site). The path is folded into a
//! 256-bit ChaCha key, so two streams with different paths never share state
//! and the draws at one site do not depend on how many other sites exist or
//! in which order they are evaluated.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomStream {
    master_seed: u64,
    path: Vec<u64>,
}

impl RandomStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            path: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Sub-stream `id` below this one.
    pub fn child(&self, id: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(id);
        Self {
            master_seed: self.master_seed,
            path,
        }
    }

    /// Sub-stream keyed by a short ASCII label, for named draw sites.
    pub fn named(&self, label: &str) -> Self {
        self.child(label_id(label))
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut state = splitmix64(self.master_seed ^ 0x6a09_e667_f3bc_c908);
        for (depth, &id) in self.path.iter().enumerate() {
            state = splitmix64(state ^ splitmix64(id.wrapping_add((depth as u64) << 56)));
        }
        let mut seed = [0u8; 32];
        let mut s = state;
        for chunk in seed.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

fn label_id(label: &str) -> u64 {
    // FNV-1a, tagged in the top bit so labels never collide with small indices
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h | (1 << 63)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One CN(0, 1) draw: real and imaginary parts each N(0, 1/2).
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// `n` i.i.d. CN(0, 1) values from the start of `stream`.
pub fn standard_complex_gaussian(stream: &RandomStream, n: usize) -> Vec<Complex64> {
    let mut rng = stream.rng();
    (0..n).map(|_| complex_gaussian(&mut rng)).collect()
}
