//! Small numeric helpers shared across modules.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

/// `e^{2πi·m/n}` for `m` taken mod `n`.
#[inline]
pub(crate) fn root(m: u64, n: u64) -> Complex64 {
    let m = m % n;
    let theta = 2.0 * PI * (m as f64) / (n as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// The `n`-th roots of unity, `pow(m) = e^{2πi m/n}`.
///
/// Up to [`RootTable::FLAT_LIMIT`] entries are tabulated directly; larger `n` use
/// two tables of about `√n` entries each and one complex product per lookup.
#[derive(Debug, Clone)]
pub(crate) struct RootTable {
    mask: u64,
    low_bits: u32,
    fine: Vec<Complex64>,
    coarse: Vec<Complex64>,
}

impl RootTable {
    const FLAT_LIMIT: usize = 4096;

    pub(crate) fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let bits = log2_exact(n);
        let low_bits = if n <= Self::FLAT_LIMIT {
            bits
        } else {
            bits / 2
        };
        let fine = (0..1u64 << low_bits).map(|m| root(m, n as u64)).collect();
        let coarse = (0..1u64 << (bits - low_bits))
            .map(|m| root(m << low_bits, n as u64))
            .collect();
        RootTable {
            mask: n as u64 - 1,
            low_bits,
            fine,
            coarse,
        }
    }

    /// `ω^m` with `ω = e^{2πi/n}`; `m` is reduced mod `n`.
    #[inline]
    pub(crate) fn pow(&self, m: u64) -> Complex64 {
        let m = m & self.mask;
        let fine = self.fine[(m & ((1 << self.low_bits) - 1)) as usize];
        if self.coarse.len() == 1 {
            fine
        } else {
            self.coarse[(m >> self.low_bits) as usize] * fine
        }
    }
}

pub(crate) fn log2_exact(v: usize) -> u32 {
    debug_assert!(v.is_power_of_two());
    v.trailing_zeros()
}

/// Smallest power of two `>= v` (and `>= 1`).
pub(crate) fn next_pow2(v: f64) -> usize {
    let mut p = 1usize;
    while (p as f64) < v {
        p <<= 1;
    }
    p
}

pub(crate) fn ceil(v: f64) -> f64 {
    Float::ceil(v)
}

pub(crate) fn sqrt(v: f64) -> f64 {
    Float::sqrt(v)
}

pub(crate) fn ln(v: f64) -> f64 {
    Float::ln(v)
}

pub(crate) fn log2(v: f64) -> f64 {
    Float::log2(v)
}

pub(crate) fn exp(v: f64) -> f64 {
    Float::exp(v)
}

pub(crate) fn sin(v: f64) -> f64 {
    Float::sin(v)
}

pub(crate) fn floor(v: f64) -> f64 {
    Float::floor(v)
}

pub(crate) fn powi(v: f64, e: i32) -> f64 {
    Float::powi(v, e)
}

pub(crate) fn powf(v: f64, e: f64) -> f64 {
    Float::powf(v, e)
}

pub(crate) fn cos(v: f64) -> f64 {
    Float::cos(v)
}
