//! Orthonormal `d`-dimensional radix-2 FFT.
//!
//! `x̂_j = N^{-1/2} Σ_i ω^{-iᵀj} x_i` with `ω = e^{2πi/n}`; the inverse flips the sign.
//! Multidimensional transforms run the 1-D kernel along each axis in turn.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DenseSignal, Domain};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Kernel `e^{-2πi jk/n}`.
    Forward,
    /// Kernel `e^{+2πi jk/n}`.
    Inverse,
}

/// Precomputed twiddles and bit reversal for one power-of-two length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    /// `e^{2πik/len}` for `k < len/2`.
    inverse: Vec<Complex64>,
    /// Conjugates of `inverse`.
    forward: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::param(alloc::format!(
                "FFT length {len} is not a power of two"
            )));
        }
        let bits = math::log2_exact(len);
        let inverse: Vec<Complex64> = (0..len / 2)
            .map(|k| math::root(k as u64, len as u64))
            .collect();
        let forward = inverse.iter().map(|w| w.conj()).collect();
        let bitrev = (0..len as u32)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        Ok(FftPlan {
            len,
            inverse,
            forward,
            bitrev,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized in-place transform of a contiguous buffer of length `len`.
    pub fn process(&self, buf: &mut [Complex64], dir: Direction) {
        debug_assert_eq!(buf.len(), self.len);
        let n = self.len;
        for (i, &j) in self.bitrev.iter().enumerate() {
            let j = j as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let twiddles = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for block in buf.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = *b * twiddles[k * stride];
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
    }
}

/// Unnormalized in-place transform over `[len]^d` stored row-major.
pub fn fft_nd(plan: &FftPlan, d: usize, buf: &mut [Complex64], dir: Direction) {
    let len = plan.len();
    let total = buf.len();
    debug_assert_eq!(total, len.pow(d as u32));
    let mut line = alloc::vec![Complex64::new(0.0, 0.0); len];
    for axis in 0..d {
        // elements along `axis` are `stride` apart
        let stride = len.pow((d - 1 - axis) as u32);
        if stride == 1 {
            buf.chunks_exact_mut(len)
                .for_each(|row| plan.process(row, dir));
            continue;
        }
        for outer in (0..total).step_by(stride * len) {
            for base in outer..outer + stride {
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + t * stride];
                }
                plan.process(&mut line, dir);
                for (t, v) in line.iter().enumerate() {
                    buf[base + t * stride] = *v;
                }
            }
        }
    }
}

fn transform(x: &DenseSignal, dir: Direction) -> Result<DenseSignal> {
    let grid = *x.grid();
    let plan = FftPlan::new(grid.n())?;
    let mut out = x.clone();
    fft_nd(&plan, grid.d(), out.values_mut(), dir);
    let scale = 1.0 / math::sqrt(grid.size() as f64);
    out.values_mut().iter_mut().for_each(|v| *v *= scale);
    let domain = match dir {
        Direction::Forward => Domain::Frequency,
        Direction::Inverse => Domain::Time,
    };
    Ok(out.with_domain(domain))
}

/// `x ↦ x̂`, orthonormal.
pub fn forward_dft(x: &DenseSignal) -> Result<DenseSignal> {
    transform(x, Direction::Forward)
}

/// `x̂ ↦ x`, orthonormal.
pub fn inverse_dft(xhat: &DenseSignal) -> Result<DenseSignal> {
    transform(xhat, Direction::Inverse)
}
