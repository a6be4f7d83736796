use alloc::vec::Vec;

use num_complex::Complex64;
// only needed when std's inherent float methods are absent
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// M-ary constellation with Gray labels and unit average energy.
///
/// `point(label)` is the symbol carrying `label` (MSB-first). BPSK maps
/// 0 → +1 and 1 → −1. Square QAM takes the first half of the label for the
/// in-phase Gray-coded PAM level and the second half for quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    bits: u32,
    points: Vec<Complex64>,
}

pub const SUPPORTED_ORDERS: [usize; 4] = [2, 4, 16, 64];

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&order) {
            return Err(Error::invalid(alloc::format!(
                "unsupported constellation size {order}; expected one of {SUPPORTED_ORDERS:?}"
            )));
        }
        let bits = order.trailing_zeros();
        if order == 2 {
            return Ok(Self {
                bits,
                points: alloc::vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            });
        }
        let axis_bits = bits / 2;
        let side = 1usize << axis_bits;
        let norm = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let level = |g: usize| (2.0 * gray_decode(g) as f64 - (side as f64 - 1.0)) / norm;
        let mask = side - 1;
        let points = (0..order)
            .map(|label| Complex64::new(level(label >> axis_bits), level(label & mask)))
            .collect();
        Ok(Self { bits, points })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk() {
        let c = Constellation::new(2).unwrap();
        assert_eq!(c.points(), &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
    }

    #[test]
    fn qpsk_points() {
        let c = Constellation::new(4).unwrap();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        for p in c.points() {
            assert!((p.re.abs() - s).abs() < 1e-15 && (p.im.abs() - s).abs() < 1e-15);
        }
        let mut sorted: Vec<_> = c.points().iter().map(|p| (p.re > 0.0, p.im > 0.0)).collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn unit_energy_and_bijection() {
        for m in SUPPORTED_ORDERS {
            let c = Constellation::new(m).unwrap();
            assert!((c.average_energy() - 1.0).abs() < 1e-12, "M={m}");
            for a in 0..m {
                for b in (a + 1)..m {
                    assert!((c.point(a) - c.point(b)).norm() > 1e-6);
                }
            }
        }
    }

    #[test]
    fn nearest_neighbours_differ_in_one_bit() {
        for m in [4, 16, 64] {
            let c = Constellation::new(m).unwrap();
            let dmin = (0..m)
                .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| (c.point(a) - c.point(b)).norm())
                .fold(f64::INFINITY, f64::min);
            let mut pairs = 0;
            for a in 0..m {
                for b in (a + 1)..m {
                    if (c.point(a) - c.point(b)).norm() < dmin * (1.0 + 1e-9) {
                        assert_eq!((a ^ b).count_ones(), 1, "M={m} labels {a:b} {b:b}");
                        pairs += 1;
                    }
                }
            }
            let side = (m as f64).sqrt() as usize;
            assert_eq!(pairs, 2 * side * (side - 1));
        }
    }

    #[test]
    fn rejects_unsupported() {
        for m in [0, 1, 3, 8, 32, 128] {
            assert!(Constellation::new(m).is_err());
        }
    }
}
