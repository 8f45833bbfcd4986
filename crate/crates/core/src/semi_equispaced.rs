//! Spectrum of a sparse vector on the low-frequency box `‖ξ‖_∞ ≤ b/2`.
//!
//! The sparse input is convolved with a [`FlatWindow`], sampled on the coarse grid
//! `(n/2b)·[2b]^d` and transformed with a `2b`-point FFT. Aliases of the box land
//! where the window response is below `N^{-c}`, so each output is within
//! `‖x‖₂·N^{-c}` of the exact `x̂_ξ`.
//!
//! The mapped variant evaluates `x̂` on a permuted and shifted box
//! `{M(ξ − a)}` through the substitution `x*_{Mᵀt} = x_t ω^{(Mᵀt)ᵀa}`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dft::{fft_nd, Direction, FftPlan};
use crate::error::{Error, Result};
use crate::filters::{side_of, FlatWindow};
use crate::grid::{Grid, GridIndex, SparseApprox, MAX_DIM};
use crate::math::{self, RootTable};
use crate::permutation::SpectrumPermutation;

/// Default precision exponent `c`.
pub const DEFAULT_PRECISION: u32 = 3;

#[derive(Debug, Clone)]
enum Mode {
    /// Coarse grid of side `2b` with a flat window.
    Windowed { window: FlatWindow, fft: FftPlan },
    /// `2b > n`: scatter into `[n]^d` and run the full FFT.
    Dense { fft: FftPlan },
}

/// Reusable plan for one `(grid, b, c)`.
#[derive(Debug, Clone)]
pub struct SemiEquispacedPlan {
    grid: Grid,
    b: usize,
    mode: Mode,
}

/// Spectrum values on a periodic box of side `side`, valid for `‖ξ‖_∞ ≤ b/2`.
#[derive(Debug, Clone)]
pub struct CoarseSpectrum {
    grid: Grid,
    b: usize,
    side: usize,
    values: Vec<Complex64>,
}

impl CoarseSpectrum {
    /// Half-width of the box on which values are accurate.
    pub fn half_width(&self) -> usize {
        self.b / 2
    }

    /// Value at a frequency given by signed coordinates.
    pub fn get_signed(&self, xi: &[i64]) -> Complex64 {
        let side = self.side as i64;
        let flat = xi.iter().fold(0usize, |acc, &c| {
            acc * self.side + c.rem_euclid(side) as usize
        });
        self.values[flat]
    }

    /// Value at a frequency given as residues mod `n`.
    pub fn get(&self, xi: &GridIndex) -> Complex64 {
        let mut s = [0i64; MAX_DIM];
        for (o, &c) in s.iter_mut().zip(xi.coords()) {
            *o = self.grid.signed(c);
        }
        self.get_signed(&s[..xi.dim()])
    }
}

impl SemiEquispacedPlan {
    pub fn new(grid: Grid, b: usize, precision: u32) -> Result<Self> {
        if b < 2 || !b.is_power_of_two() {
            return Err(Error::param(alloc::format!(
                "b={b} must be a power of two >= 2"
            )));
        }
        if precision < 2 {
            return Err(Error::param("precision c must be at least 2"));
        }
        let mode = if 2 * b <= grid.n() {
            Mode::Windowed {
                window: FlatWindow::new(grid, b, precision)?,
                fft: FftPlan::new(2 * b)?,
            }
        } else {
            Mode::Dense {
                fft: FftPlan::new(grid.n())?,
            }
        };
        Ok(SemiEquispacedPlan { grid, b, mode })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn b(&self) -> usize {
        self.b
    }

    /// Spectrum of the sparse time-domain vector given by `entries`.
    pub fn evaluate<I>(&self, entries: I) -> CoarseSpectrum
    where
        I: IntoIterator<Item = (GridIndex, Complex64)>,
    {
        let (n, d) = (self.grid.n(), self.grid.d());
        match &self.mode {
            Mode::Dense { fft } => {
                let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.size()];
                for (t, v) in entries {
                    buf[self.grid.flat(&t)] += v;
                }
                fft_nd(fft, d, &mut buf, Direction::Forward);
                let scale = 1.0 / math::sqrt(self.grid.size() as f64);
                buf.iter_mut().for_each(|v| *v *= scale);
                CoarseSpectrum {
                    grid: self.grid,
                    b: self.b,
                    side: n,
                    values: buf,
                }
            }
            Mode::Windowed { window, fft } => {
                let side = 2 * self.b;
                let step = n / side;
                let mut buf = vec![Complex64::new(0.0, 0.0); side.pow(d as u32)];
                let mut axes: [Vec<(usize, f64)>; MAX_DIM] = Default::default();
                for (t, v) in entries {
                    if v == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (s, axis) in axes.iter_mut().enumerate().take(d) {
                        axis.clear();
                        coarse_taps(window, t.get(s), step, side, axis);
                    }
                    spread(&axes[..d], side, v, &mut buf);
                }
                fft_nd(fft, d, &mut buf, Direction::Forward);
                let scale = math::sqrt(self.grid.size() as f64) / (side.pow(d as u32) as f64);
                buf.iter_mut().for_each(|v| *v *= scale);
                CoarseSpectrum {
                    grid: self.grid,
                    b: self.b,
                    side,
                    values: buf,
                }
            }
        }
    }

    /// `x̂` on `{M(ξ − a) : ‖ξ‖_∞ ≤ b/2}` where `m_t(v)` computes `Mᵀv`; the result is
    /// indexed by `ξ`.
    pub fn evaluate_mapped<F>(&self, x: &SparseApprox, m_t: F, a: &GridIndex) -> CoarseSpectrum
    where
        F: Fn(&GridIndex) -> GridIndex,
    {
        let roots = RootTable::new(self.grid.n());
        let g = self.grid;
        self.evaluate(x.iter().map(|(t, v)| {
            let u = m_t(&t);
            (u, v * roots.pow(g.dot(&u, a) as u64))
        }))
    }
}

/// Grid points `p ∈ [side]` within the window radius of `u`, with their taps.
fn coarse_taps(
    window: &FlatWindow,
    u: usize,
    step: usize,
    side: usize,
    out: &mut Vec<(usize, f64)>,
) {
    let (u, step) = (u as i64, step as i64);
    if !window.is_truncated() {
        out.extend((0..side).map(|p| (p, window.tap_1d(p as i64 * step - u))));
        return;
    }
    let r = window.radius() as i64;
    let lo = -(r - u).div_euclid(step);
    let hi = (u + r).div_euclid(step);
    for p in lo..=hi {
        let tap = window.tap_1d(p * step - u);
        if tap != 0.0 {
            out.push((p.rem_euclid(side as i64) as usize, tap));
        }
    }
}

/// Adds `v · Π_s taps_s` over the tensor product of per-axis tap lists.
fn spread(axes: &[Vec<(usize, f64)>], side: usize, v: Complex64, buf: &mut [Complex64]) {
    match axes {
        [] => {}
        [a] => {
            for &(p, w) in a {
                buf[p] += v * w;
            }
        }
        [first, rest @ ..] => {
            let stride = side.pow(rest.len() as u32);
            for &(p, w) in first {
                spread(rest, side, v * w, &mut buf[p * stride..(p + 1) * stride]);
            }
        }
    }
}

/// `x̂_ξ` for `‖ξ‖_∞ ≤ b/2` with `B = b^d`, each within `‖x‖₂·N^{-c}`.
pub fn semi_equispaced_fft(
    x: &SparseApprox,
    buckets: usize,
    precision: u32,
) -> Result<CoarseSpectrum> {
    let grid = *x.grid();
    let b = side_of(buckets, grid.d())?;
    Ok(SemiEquispacedPlan::new(grid, b, precision)?.evaluate(x.iter()))
}

/// `x̂` on `{Σ(ξ − q) : ‖ξ‖_∞ ≤ b/2}`, indexed by `ξ`.
pub fn shifted_semi_equispaced(
    x: &SparseApprox,
    perm: &SpectrumPermutation,
    buckets: usize,
    precision: u32,
) -> Result<CoarseSpectrum> {
    let grid = *x.grid();
    grid.same(perm.grid())?;
    let b = side_of(buckets, grid.d())?;
    let plan = SemiEquispacedPlan::new(grid, b, precision)?;
    Ok(plan.evaluate_mapped(x, |t| perm.apply_sigma_t(t), perm.q()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::forward_dft;
    use crate::grid::Domain;
    use crate::permutation::sample_permutation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(g: Grid, k: usize, rng: &mut ChaCha8Rng) -> SparseApprox {
        let mut x = SparseApprox::new(g);
        while x.len() < k {
            let f = rng.gen_range(0..g.size());
            x.insert(
                &g.index(f),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
        x
    }

    fn boxed(g: &Grid, half: i64) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for _ in 0..g.d() {
            out = out
                .into_iter()
                .flat_map(|p| (-half..=half).map(move |c| [p.clone(), vec![c]].concat()))
                .collect();
        }
        out
    }

    fn max_error(x: &SparseApprox, b: usize, c: u32) -> f64 {
        let g = *x.grid();
        let dense = forward_dft(&x.to_dense(Domain::Time)).unwrap();
        let out = semi_equispaced_fft(x, b.pow(g.d() as u32), c).unwrap();
        boxed(&g, b as i64 / 2)
            .iter()
            .map(|xi| {
                let idx = GridIndex::from_signed(xi, g.n());
                (out.get_signed(xi) - dense.get(&idx)).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_input() {
        let g = Grid::new(256, 1).unwrap();
        let out = semi_equispaced_fft(&SparseApprox::new(g), 16, 2).unwrap();
        assert!((-8..=8).all(|i| out.get_signed(&[i]) == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let g = Grid::new(256, 1).unwrap();
        let mut x = SparseApprox::new(g);
        x.insert(&GridIndex::zero(1), Complex64::new(1.0, 0.0));
        let out = semi_equispaced_fft(&x, 16, 2).unwrap();
        for i in -8..=8 {
            assert!((out.get_signed(&[i]) - 1.0 / 16.0).norm() <= 256f64.powi(-2));
        }
    }

    #[test]
    fn random_sparse_matches_dense_1d() {
        let g = Grid::new(256, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for c in [2, 3] {
            let x = random_sparse(g, 10, &mut rng);
            let bound = x.norm_l2() * (g.size() as f64).powi(-(c as i32));
            assert!(max_error(&x, 16, c) <= bound);
        }
    }

    #[test]
    fn truncated_window_matches_dense() {
        let g = Grid::new(4096, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_sparse(g, 20, &mut rng);
        let plan = SemiEquispacedPlan::new(g, 256, 2).unwrap();
        assert!(matches!(&plan.mode, Mode::Windowed { window, .. } if window.is_truncated()));
        let bound = x.norm_l2() / (4096f64 * 4096.0);
        assert!(max_error(&x, 256, 2) <= bound);
    }

    #[test]
    fn random_sparse_matches_dense_2d() {
        let g = Grid::new(16, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_sparse(g, 12, &mut rng);
        let bound = x.norm_l2() * (g.size() as f64).powi(-3);
        assert!(max_error(&x, 4, 3) <= bound);
    }

    #[test]
    fn dense_fallback_when_box_is_large() {
        let g = Grid::new(32, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_sparse(g, 5, &mut rng);
        assert!(max_error(&x, 32, 2) < 1e-12);
    }

    #[test]
    fn shifted_matches_dense() {
        let g = Grid::new(128, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let x = random_sparse(g, 5, &mut rng);
            let perm = sample_permutation(g, &mut rng);
            let dense = forward_dft(&x.to_dense(Domain::Time)).unwrap();
            let out = shifted_semi_equispaced(&x, &perm, 16, 2).unwrap();
            let bound = x.norm_l2() / (128f64 * 128.0);
            for xi in -8i64..=8 {
                let at = perm.apply_sigma(&GridIndex::from_signed(&[xi], 128).sub(perm.q(), 128));
                assert!((out.get_signed(&[xi]) - dense.get(&at)).norm() <= bound);
            }
        }
    }

    #[test]
    fn identity_shift_reduces_to_plain() {
        let g = Grid::new(64, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_sparse(g, 6, &mut rng);
        let id = SpectrumPermutation::identity(g);
        let a = shifted_semi_equispaced(&x, &id, 64, 2).unwrap();
        let b = semi_equispaced_fft(&x, 64, 2).unwrap();
        for xi in boxed(&g, 4) {
            assert!((a.get_signed(&xi) - b.get_signed(&xi)).norm() < 1e-15);
        }
    }

    #[test]
    fn higher_precision_shrinks_error() {
        let g = Grid::new(4096, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_sparse(g, 8, &mut rng);
        let e2 = max_error(&x, 512, 2);
        let e3 = max_error(&x, 512, 3);
        assert!(e3 <= x.norm_l2() * 4096f64.powi(-3));
        assert!(e2 <= x.norm_l2() * 4096f64.powi(-2));
    }

    #[test]
    fn aliasing_duality() {
        // ŷ_i = Σ_l X_{i+2bl} H_{i+2bl}, checked on the unscaled coarse samples
        let g = Grid::new(64, 1).unwrap();
        let b = 8;
        let w = FlatWindow::new(g, b, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_sparse(g, 4, &mut rng);
        let dense = forward_dft(&x.to_dense(Domain::Time)).unwrap();
        let plan = SemiEquispacedPlan::new(g, b, 2).unwrap();
        let out = plan.evaluate(x.iter());
        for i in -(b as i64)..(b as i64) {
            let alias: Complex64 = (0..4)
                .map(|l| {
                    let xi = i + 16 * l;
                    dense.get(&GridIndex::from_signed(&[xi], 64)) * w.response_1d(xi)
                })
                .sum();
            assert!((out.get_signed(&[i]) - alias).norm() < 1e-12);
        }
    }
}
