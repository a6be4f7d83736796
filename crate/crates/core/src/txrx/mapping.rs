use alloc::vec::Vec;

use num_complex::Complex64;

use super::Constellation;
use crate::{Error, Result};

/// One user's share of a channel use: the array index carried by the
/// spatial bits and the constellation label carried by the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmSymbol {
    /// Zero-based; see [`SmSymbol::array_one_based`].
    pub array: usize,
    pub label: usize,
    pub symbol: Complex64,
}

impl SmSymbol {
    pub fn array_one_based(&self) -> usize {
        self.array + 1
    }
}

/// Bits per channel use for a user: log2(N_A) spatial + log2(M) symbol.
pub fn bits_per_use(n_a: usize, constellation: &Constellation) -> Result<(u32, u32)> {
    if n_a == 0 || !n_a.is_power_of_two() {
        return Err(Error::invalid(alloc::format!("n_a = {n_a} is not a power of two")));
    }
    Ok((n_a.trailing_zeros(), constellation.bits_per_symbol()))
}

fn pack(bits: &[u8]) -> Result<usize> {
    bits.iter().try_fold(0usize, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | b as usize),
        _ => Err(Error::invalid("bits must be 0 or 1")),
    })
}

/// MSB-first: the leading log2(N_A) bits pick the array, the remainder the
/// constellation label.
pub fn sm_map(bits: &[u8], n_a: usize, constellation: &Constellation) -> Result<SmSymbol> {
    let (spatial, symbol) = bits_per_use(n_a, constellation)?;
    if bits.len() != (spatial + symbol) as usize {
        return Err(Error::invalid(alloc::format!(
            "expected {} bits, got {}",
            spatial + symbol,
            bits.len()
        )));
    }
    let (head, tail) = bits.split_at(spatial as usize);
    let array = pack(head)?;
    let label = pack(tail)?;
    Ok(SmSymbol {
        array,
        label,
        symbol: constellation.point(label),
    })
}

pub fn sm_unmap(array: usize, label: usize, n_a: usize, constellation: &Constellation) -> Result<Vec<u8>> {
    let (spatial, symbol) = bits_per_use(n_a, constellation)?;
    if array >= n_a || label >= constellation.order() {
        return Err(Error::invalid("array index or label out of range"));
    }
    let mut out = Vec::with_capacity((spatial + symbol) as usize);
    out.extend((0..spatial).rev().map(|k| ((array >> k) & 1) as u8));
    out.extend((0..symbol).rev().map(|k| ((label >> k) & 1) as u8));
    Ok(out)
}

/// All users' symbols for one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct TxFrame {
    pub users: Vec<SmSymbol>,
}

impl TxFrame {
    pub fn selection(&self) -> Vec<usize> {
        self.users.iter().map(|u| u.array).collect()
    }

    /// Stacked symbol vector `s` (K×1).
    pub fn symbols(&self) -> Vec<Complex64> {
        self.users.iter().map(|u| u.symbol).collect()
    }

    pub fn from_indices(arrays: &[usize], labels: &[usize], constellation: &Constellation) -> Self {
        Self {
            users: arrays
                .iter()
                .zip(labels)
                .map(|(&array, &label)| SmSymbol {
                    array,
                    label,
                    symbol: constellation.point(label),
                })
                .collect(),
        }
    }
}
