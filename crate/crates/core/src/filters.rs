//! Bucketing filter `(G, Ĝ)` and the flat window used by the semi-equispaced transform.
//!
//! The bucketing filter is the `d`-fold tensor power of a 1-D window whose spectrum
//! is a box of `b + 1` taps convolved with itself `F` times. In time domain that is
//! a Dirichlet kernel raised to the `F`-th power:
//!
//! ```text
//! G(j) = (sin(π(b+1)j/n) / ((b+1) sin(πj/n)))^F,   G(0) = 1
//! ```
//!
//! so `supp Ĝ ⊆ [-F·b/2, F·b/2]^d`, `G ∈ [0, 1]` for even `F`, the main lobe covers
//! `‖j‖_∞ ≤ n/(2b)` with `G ≥ (2π)^{-F·d}`, and the tail decays like `(n/(b|j|))^F`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridIndex};
use crate::math;

/// `b = B^{1/d}` if `B` is a `d`-th power of a power of two.
pub fn side_of(buckets: usize, d: usize) -> Result<usize> {
    if buckets == 0 || !buckets.is_power_of_two() {
        return Err(Error::param(alloc::format!(
            "B={buckets} is not a power of two"
        )));
    }
    let bits = math::log2_exact(buckets) as usize;
    if !bits.is_multiple_of(d) {
        return Err(Error::param(alloc::format!(
            "B={buckets} is not a power of 2^{d}"
        )));
    }
    Ok(1usize << (bits / d))
}

/// Filter with `B = b^d` buckets and sharpness `F`.
#[derive(Debug, Clone)]
pub struct BucketFilter {
    grid: Grid,
    b: usize,
    sharpness: usize,
    /// Per-axis spectrum, folded mod `n`: `(residue, value)`.
    freq_1d: Vec<(usize, f64)>,
}

impl BucketFilter {
    pub fn new(grid: Grid, buckets: usize, sharpness: usize) -> Result<Self> {
        let d = grid.d();
        let b = side_of(buckets, d)?;
        if !sharpness.is_multiple_of(2) || sharpness < 2 * d {
            return Err(Error::param(alloc::format!(
                "sharpness F={sharpness} must be even and >= 2d={}",
                2 * d
            )));
        }
        if b < 3 {
            return Err(Error::param(alloc::format!("b={b} must be at least 3")));
        }
        if b > grid.n() {
            return Err(Error::param(alloc::format!("b={b} exceeds n={}", grid.n())));
        }
        let n = grid.n();
        let width = b + 1;
        // F-fold self convolution of the normalized box
        let box_tap = 1.0 / width as f64;
        let mut coeffs = vec![box_tap; width];
        for _ in 1..sharpness {
            let mut next = vec![0.0; coeffs.len() + width - 1];
            for (i, &c) in coeffs.iter().enumerate() {
                for slot in &mut next[i..i + width] {
                    *slot += c * box_tap;
                }
            }
            coeffs = next;
        }
        let reach = (coeffs.len() / 2) as i64;
        let mut folded = vec![0.0f64; n];
        let root_n = math::sqrt(n as f64);
        for (t, &c) in coeffs.iter().enumerate() {
            folded[grid.wrap(t as i64 - reach)] += root_n * c;
        }
        let freq_1d = folded
            .into_iter()
            .enumerate()
            .filter(|&(_, v)| v != 0.0)
            .collect();
        Ok(BucketFilter {
            grid,
            b,
            sharpness,
            freq_1d,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Buckets per axis.
    #[inline]
    pub fn b(&self) -> usize {
        self.b
    }

    #[inline]
    pub fn buckets(&self) -> usize {
        self.b.pow(self.grid.d() as u32)
    }

    #[inline]
    pub fn sharpness(&self) -> usize {
        self.sharpness
    }

    /// 1-D time-domain value at residue `j`.
    pub fn time_1d(&self, j: usize) -> f64 {
        let n = self.grid.n();
        let j = self.grid.signed(j);
        if j == 0 {
            return 1.0;
        }
        let w = (self.b + 1) as f64;
        let x = PI * j as f64 / n as f64;
        let dirichlet = math::sin(w * x) / (w * math::sin(x));
        math::powi(dirichlet, self.sharpness as i32)
    }

    /// `G_j`.
    pub fn time_value(&self, j: &GridIndex) -> f64 {
        j.coords().iter().map(|&c| self.time_1d(c)).product()
    }

    /// Nonzero per-axis spectrum entries `(residue, Ĝ¹)`; `Ĝ` is their tensor power.
    #[inline]
    pub fn freq_support_1d(&self) -> &[(usize, f64)] {
        &self.freq_1d
    }

    /// `|supp Ĝ|`, the number of spectrum samples one hashing reads.
    pub fn support_size(&self) -> usize {
        self.freq_1d.len().pow(self.grid.d() as u32)
    }

    /// `Ĝ_ξ` (orthonormal DFT of `G`).
    pub fn freq_value(&self, xi: &GridIndex) -> f64 {
        xi.coords()
            .iter()
            .map(|&c| {
                self.freq_1d
                    .binary_search_by_key(&(c & self.grid.mask()), |&(r, _)| r)
                    .map_or(0.0, |p| self.freq_1d[p].1)
            })
            .product()
    }

    /// Lower bound `(2π)^{-F·d}` on `G` over the main lobe.
    pub fn main_lobe_floor(&self) -> f64 {
        math::powi(2.0 * PI, -((self.sharpness * self.grid.d()) as i32))
    }

    /// Decay envelope `(2 / (1 + (b/n)·‖j‖_∞))^F`.
    pub fn decay_bound(&self, j: &GridIndex) -> f64 {
        let r = self.grid.linf(j) as f64 * self.b as f64 / self.grid.n() as f64;
        math::powi(2.0 / (1.0 + r), self.sharpness as i32)
    }
}

/// Builds the bucketing filter; see [`BucketFilter::new`].
pub fn build_bucket_filter(grid: Grid, buckets: usize, sharpness: usize) -> Result<BucketFilter> {
    BucketFilter::new(grid, buckets, sharpness)
}

/// Compactly supported window whose (unnormalized) frequency response is within
/// `N^{-c}` of 1 on `‖ξ‖_∞ ≤ b/2` and of 0 on `‖ξ‖_∞ > b`.
///
/// Per axis the taps are a Gaussian times the Dirichlet kernel of a box of half-width
/// `⌊3b/4⌋`, truncated where the Gaussian has decayed below the error budget. When the
/// truncation radius would reach `n/2` the untruncated box kernel is used, whose
/// response is exactly the box.
#[derive(Debug, Clone)]
pub struct FlatWindow {
    grid: Grid,
    b: usize,
    precision: u32,
    box_half: usize,
    /// Nonzero taps at signed offsets in `(-n/2, n/2]`.
    taps: Vec<(i64, f64)>,
    radius: usize,
}

impl FlatWindow {
    pub fn new(grid: Grid, b: usize, precision: u32) -> Result<Self> {
        let n = grid.n();
        if b < 2 || !b.is_power_of_two() {
            return Err(Error::param(alloc::format!(
                "b={b} must be a power of two >= 2"
            )));
        }
        if 2 * b > n {
            return Err(Error::param(alloc::format!("2b={} exceeds n={n}", 2 * b)));
        }
        if precision < 2 {
            return Err(Error::param("precision c must be at least 2"));
        }
        let box_half = 3 * b / 4;
        let margin = f64::min(
            box_half as f64 + 0.5 - b as f64 / 2.0,
            b as f64 + 0.5 - box_half as f64,
        );
        // per-axis pointwise budget; the d-fold product and the ℓ2 sum over N points
        // stay under N^{-c}
        let log_budget = -(precision as f64 + 1.0) * grid.log2_size() * core::f64::consts::LN_2
            - math::ln(4.0 * grid.d() as f64);
        let sigma_f = margin / math::sqrt(2.0 * (core::f64::consts::LN_2 - log_budget));
        let sigma_t = n as f64 / (2.0 * PI * sigma_f);
        let radius_f = sigma_t * math::sqrt(2.0 * (math::ln(4.0 * (sigma_t + 1.0)) - log_budget));
        let dirichlet = |t: i64| -> f64 {
            if t == 0 {
                (2 * box_half + 1) as f64 / n as f64
            } else {
                let x = PI * t as f64 / n as f64;
                math::sin((2 * box_half + 1) as f64 * x) / (n as f64 * math::sin(x))
            }
        };
        let (taps, radius) = if radius_f >= (n / 2) as f64 - 1.0 {
            let taps = (-(n as i64) / 2 + 1..=(n as i64) / 2)
                .map(|t| (t, dirichlet(t)))
                .collect();
            (taps, n / 2)
        } else {
            let r = math::ceil(radius_f) as i64;
            let taps = (-r..=r)
                .map(|t| {
                    let gauss = math::exp(-(t * t) as f64 / (2.0 * sigma_t * sigma_t));
                    (t, gauss * dirichlet(t))
                })
                .collect();
            (taps, r as usize)
        };
        Ok(FlatWindow {
            grid,
            b,
            precision,
            box_half,
            taps,
            radius,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn b(&self) -> usize {
        self.b
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Half-width of the time-domain support per axis (`n/2` when untruncated).
    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn is_truncated(&self) -> bool {
        self.radius < self.grid.n() / 2
    }

    pub fn box_half_width(&self) -> usize {
        self.box_half
    }

    /// Per-axis taps at signed offsets.
    #[inline]
    pub fn taps_1d(&self) -> &[(i64, f64)] {
        &self.taps
    }

    /// 1-D tap at a signed offset (zero outside the support).
    pub fn tap_1d(&self, t: i64) -> f64 {
        let n = self.grid.n() as i64;
        let mut t = t.rem_euclid(n);
        if t > n / 2 {
            t -= n;
        }
        let first = self.taps[0].0;
        let pos = t - first;
        if pos < 0 || pos as usize >= self.taps.len() {
            0.0
        } else {
            self.taps[pos as usize].1
        }
    }

    /// Unnormalized 1-D response `Σ_t g(t) e^{-2πi ξ t/n}`.
    pub fn response_1d(&self, xi: i64) -> Complex64 {
        let n = self.grid.n() as u64;
        self.taps
            .iter()
            .map(|&(t, g)| math::root((-(xi * t)).rem_euclid(n as i64) as u64, n) * g)
            .sum()
    }

    /// Ideal per-axis response: 1 inside `b/2`, 0 beyond `b`, the clamped actual
    /// response in between.
    pub fn ideal_1d(&self, xi: i64) -> f64 {
        let r = self.grid.circ(self.grid.wrap(xi)) as f64;
        if r <= self.b as f64 / 2.0 {
            1.0
        } else if r > self.b as f64 {
            0.0
        } else {
            self.response_1d(xi).re.clamp(0.0, 1.0)
        }
    }
}

/// Builds the flat window; see [`FlatWindow::new`].
pub fn build_flat_window(grid: Grid, b: usize, precision: u32) -> Result<FlatWindow> {
    FlatWindow::new(grid, b, precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::forward_dft;
    use crate::grid::{DenseSignal, Domain};

    fn dense_time(f: &BucketFilter) -> DenseSignal {
        let g = *f.grid();
        let v = g
            .indices()
            .map(|j| Complex64::new(f.time_value(&j), 0.0))
            .collect();
        DenseSignal::from_values(g, v, Domain::Time).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = Grid::new(64, 1).unwrap();
        assert!(BucketFilter::new(g, 8, 3).is_err());
        assert!(BucketFilter::new(g, 2, 4).is_err());
        assert!(BucketFilter::new(g, 12, 4).is_err());
        let g2 = Grid::new(64, 2).unwrap();
        assert!(BucketFilter::new(g2, 32, 4).is_err());
        assert!(BucketFilter::new(g2, 64, 2).is_err());
    }

    #[test]
    fn main_lobe_and_decay_n64_b8_f4() {
        let g = Grid::new(64, 1).unwrap();
        let f = BucketFilter::new(g, 8, 4).unwrap();
        let floor = (2.0 * PI).powi(-4);
        for j in g.indices() {
            let v = f.time_value(&j);
            if g.linf(&j) <= 4 {
                assert!(v >= floor && v <= 1.0, "j={j:?} G={v}");
            }
            let bound = (2.0 / (1.0 + g.linf(&j) as f64 / 8.0)).powi(4);
            assert!(v.abs() <= bound + 1e-15);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn spectrum_matches_dense_dft_and_support() {
        for (n, d, b, sharp) in [(64usize, 1, 8usize, 4), (32, 2, 4, 4), (16, 1, 16, 2)] {
            let g = Grid::new(n, d).unwrap();
            let f = BucketFilter::new(g, b.pow(d as u32), sharp).unwrap();
            let ghat = forward_dft(&dense_time(&f)).unwrap();
            for xi in g.indices() {
                let v = ghat.get(&xi);
                assert!((v.re - f.freq_value(&xi)).abs() < 1e-9, "n={n} ξ={xi:?}");
                assert!(v.im.abs() < 1e-9);
                if g.linf(&xi) > sharp * b / 2 {
                    assert!(v.norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn tensor_value_is_product() {
        let g = Grid::new(64, 2).unwrap();
        let f = BucketFilter::new(g, 64, 4).unwrap();
        let f1 = BucketFilter::new(Grid::new(64, 1).unwrap(), 8, 4).unwrap();
        for j in [[0, 0], [3, 60], [17, 5], [32, 32]] {
            let a = f.time_value(&GridIndex::new(&j));
            let b =
                f1.time_value(&GridIndex::new(&[j[0]])) * f1.time_value(&GridIndex::new(&[j[1]]));
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(f.support_size(), f1.support_size().pow(2));
    }

    #[test]
    fn flat_window_full_mode_is_exact_box() {
        let g = Grid::new(256, 1).unwrap();
        let w = FlatWindow::new(g, 16, 2).unwrap();
        assert!(!w.is_truncated());
        let eps = (256f64).powi(-2);
        for xi in -128..128 {
            let r = w.response_1d(xi);
            if xi.abs() <= 8 {
                assert!((r - 1.0).norm() <= eps);
            }
            if xi.abs() > 16 {
                assert!(r.norm() <= eps);
            }
        }
    }

    #[test]
    fn flat_window_truncated_meets_budget() {
        let g = Grid::new(4096, 1).unwrap();
        let w = FlatWindow::new(g, 128, 2).unwrap();
        assert!(w.is_truncated());
        assert!(w.radius() < 2048);
        // ‖Ĝ - Ĝ'‖₂ over the full circle
        let err: f64 = (-2048..2048)
            .map(|xi| (w.response_1d(xi) - w.ideal_1d(xi)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= (4096f64).powi(-2), "err={err}");
    }

    #[test]
    fn flat_window_rejects_bad_parameters() {
        let g = Grid::new(64, 1).unwrap();
        assert!(FlatWindow::new(g, 3, 2).is_err());
        assert!(FlatWindow::new(g, 64, 2).is_err());
        assert!(FlatWindow::new(g, 8, 1).is_err());
    }
}
