//! Median estimators and `EstimateValues`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::filters::BucketFilter;
use crate::grid::{Grid, GridIndex, SparseApprox};
use crate::hashing::{BinHasher, SpectrumOracle};
use crate::math::{self, RootTable};
use crate::permutation::Hashing;

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

/// Median of the real parts plus `i` times the median of the imaginary parts.
///
/// For an even count the lower of the two middle order statistics is used.
pub fn coordinatewise_median(values: &[Complex64]) -> Result<Complex64> {
    if values.is_empty() {
        return Err(Error::param("median of an empty list"));
    }
    let mut re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Ok(Complex64::new(median_of(&mut re), median_of(&mut im)))
}

/// The `⌈γ·s⌉`-th largest of `s` values (at least the largest).
pub fn quantile(values: &[f64], gamma: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("quantile of an empty list"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param(alloc::format!(
            "quantile level {gamma} outside (0, 1)"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let rank = (math::ceil(gamma * values.len() as f64) as usize).clamp(1, values.len());
    Ok(sorted[rank - 1])
}

/// Output of [`estimate_values`].
#[derive(Debug, Clone)]
pub struct EstimateBatch {
    /// `w_f` for every requested location, in request order.
    pub estimates: Vec<(GridIndex, Complex64)>,
    /// The estimates with `|w_f| > ν`.
    pub kept: SparseApprox,
    /// Spectrum samples read.
    pub samples: u64,
    /// Buckets per hashing used.
    pub buckets: usize,
}

/// Bucket count and repetition settings for [`estimate_values`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    /// `B ≥ bucket_factor · k / (ε α^{2d})`, rounded up to a power of `2^d`.
    pub bucket_factor: f64,
    pub alpha: f64,
    pub precision: u32,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            bucket_factor: 1.0,
            alpha: 0.5,
            precision: crate::semi_equispaced::DEFAULT_PRECISION,
        }
    }
}

/// Smallest `b^d ≥ target` with `b` a power of two, `4 ≤ b ≤ n`.
pub(crate) fn bucket_count(grid: &Grid, target: f64) -> usize {
    let d = grid.d() as i32;
    let b = math::next_pow2(math::powf(target, 1.0 / d as f64) - 1e-9).clamp(4, grid.n().max(4));
    b.min(grid.n()).pow(d as u32)
}

/// Estimates `(x − χ)_f` for every `f ∈ locations` from `r_max` fresh random hashings
/// and keeps those with magnitude above `nu`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_values<O, R>(
    xhat: &O,
    chi: &SparseApprox,
    locations: &[GridIndex],
    k: usize,
    epsilon: f64,
    nu: f64,
    r_max: usize,
    config: &EstimateConfig,
    rng: &mut R,
) -> Result<EstimateBatch>
where
    O: SpectrumOracle + ?Sized,
    R: RngCore + ?Sized,
{
    let grid = *xhat.grid();
    chi.grid().same(&grid)?;
    if !(epsilon > 0.0) || k == 0 || r_max == 0 {
        return Err(Error::param("estimation needs k > 0, ε > 0 and r_max > 0"));
    }
    let d = grid.d();
    let target =
        config.bucket_factor * k as f64 / (epsilon * math::powi(config.alpha, 2 * d as i32));
    let buckets = bucket_count(&grid, target);
    if locations.is_empty() {
        return Ok(EstimateBatch {
            estimates: Vec::new(),
            kept: SparseApprox::new(grid),
            samples: 0,
            buckets,
        });
    }
    let filter = Arc::new(BucketFilter::new(grid, buckets, 2 * d)?);
    let roots = RootTable::new(grid.n());
    let mut per_location: Vec<Vec<Complex64>> = (0..locations.len())
        .map(|_| Vec::with_capacity(r_max))
        .collect();
    let mut samples = 0u64;
    for _ in 0..r_max {
        let hashing = Hashing::sample(filter.clone(), rng);
        let mut z = GridIndex::zero(d);
        z.coords_mut()
            .iter_mut()
            .for_each(|c| *c = rng.gen_range(0..grid.n()));
        let hasher = BinHasher::new(hashing, config.precision)?;
        let u = hasher.measure(xhat, chi, &z);
        samples += hasher.samples_per_call() as u64;
        let h = hasher.hashing();
        for (f, acc) in locations.iter().zip(per_location.iter_mut()) {
            let bucket = h.bucket_flat(&h.bucket_of(f));
            let phase = roots.pow((grid.n() - grid.dot(&z, &h.perm().apply_sigma(f))) as u64);
            acc.push(u[bucket] * phase / h.self_gain(f));
        }
    }
    let mut estimates = Vec::with_capacity(locations.len());
    let mut kept = SparseApprox::new(grid);
    for (f, acc) in locations.iter().zip(&per_location) {
        let w = coordinatewise_median(acc)?;
        if w.norm() > nu {
            kept.insert(f, w);
        }
        estimates.push((*f, w));
    }
    Ok(EstimateBatch {
        estimates,
        kept,
        samples,
        buckets,
    })
}
