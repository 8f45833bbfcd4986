//! Brute-force evaluation of the quantities that govern location: head noise,
//! tail noise, per-bucket tail energy and isolation.
//!
//! Everything here costs `Θ(N · |S|)` or more per hashing and exists for tests
//! and experiments at small sizes.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimation::quantile;
use crate::grid::{DenseSignal, Domain, GridIndex, SparseApprox};
use crate::hashing::MeasurementSet;
use crate::location::check_balanced;
use crate::math::{self, RootTable};
use crate::permutation::Hashing;

/// Default cap on `N · |S| · (evaluation points)` for [`compute_noise_profile`].
pub const DEFAULT_WORK_BUDGET: u64 = 1 << 32;

/// `G_{o_i(j)}`.
pub fn gain(h: &Hashing, i: &GridIndex, j: &GridIndex) -> f64 {
    h.filter().time_value(&h.offset(i, j))
}

fn check_time(x: &DenseSignal) -> Result<()> {
    if x.domain() != Domain::Time {
        return Err(Error::param("diagnostics expect a time-domain signal"));
    }
    Ok(())
}

/// Head noise of `i` under `h`: `G_{o_i(i)}^{-1} Σ_{j∈S∖i} G_{o_i(j)} |y_j|`
/// with `y = (x − χ)_S − χ_{∖S}`.
pub fn e_head(
    h: &Hashing,
    x: &DenseSignal,
    chi: &SparseApprox,
    support: &[GridIndex],
    i: &GridIndex,
) -> f64 {
    let in_s = |j: &GridIndex| support.contains(j);
    let head: f64 = support
        .iter()
        .filter(|j| *j != i)
        .map(|j| gain(h, i, j) * (x.get(j) - chi.get(j)).norm())
        .sum();
    let spurious: f64 = chi
        .iter()
        .filter(|(j, _)| !in_s(j))
        .map(|(j, v)| gain(h, i, &j) * v.norm())
        .sum();
    (head + spurious) / h.self_gain(i)
}

/// Tail noise of `i` under `h` at the point `z`:
/// `|G_{o_i(i)}^{-1} Σ_{j∉S} G_{o_i(j)} x_j ω^{zᵀΣ(j−i)}|`.
pub fn e_tail_at(
    h: &Hashing,
    x: &DenseSignal,
    support: &[GridIndex],
    i: &GridIndex,
    z: &GridIndex,
) -> f64 {
    let grid = *x.grid();
    let roots = RootTable::new(grid.n());
    let zs = h.perm().apply_sigma_t(z);
    let base = grid.dot(&zs, i);
    let mut acc = Complex64::new(0.0, 0.0);
    for (flat, v) in x.values().iter().enumerate() {
        if *v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let j = grid.index(flat);
        if support.contains(&j) {
            continue;
        }
        let e = (grid.dot(&zs, &j) + grid.n() - base) & grid.mask();
        acc += *v * gain(h, i, &j) * roots.pow(e as u64);
    }
    acc.norm() / h.self_gain(i)
}

/// `quant^{1/5}` of [`e_tail_at`] over the points `zs`.
pub fn e_tail_over(
    h: &Hashing,
    x: &DenseSignal,
    support: &[GridIndex],
    i: &GridIndex,
    zs: &[GridIndex],
) -> Result<f64> {
    let values: Vec<f64> = zs.iter().map(|z| e_tail_at(h, x, support, i, z)).collect();
    quantile(&values, 0.2)
}

/// `μ²_{H,i}(y) = |G_{o_i(i)}^{-1}| Σ_{j≠i} |y_j|² G_{o_i(j)}²`.
pub fn mu_squared(h: &Hashing, y: &DenseSignal, i: &GridIndex) -> f64 {
    let grid = *y.grid();
    let sum: f64 = y
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .map(|(flat, v)| (grid.index(flat), v))
        .filter(|(j, _)| j != i)
        .map(|(j, v)| v.norm_sqr() * math::powi(gain(h, i, &j), 2))
        .sum();
    sum / h.self_gain(i)
}

/// Isolation of `i` with respect to `support` at scale `t`:
/// `|π(S∖i) ∩ Ball_∞((n/b)h(i), (n/b)2^t)| ≤ (2π)^{-dF} α^{d/2} 2^{(t+1)d} 2^t`.
pub fn is_isolated_at(
    h: &Hashing,
    support: &[GridIndex],
    i: &GridIndex,
    alpha: f64,
    t: u32,
) -> bool {
    let grid = *h.grid();
    let d = grid.d() as i32;
    let center = h.bucket_center(&h.bucket_of(i));
    let radius = (grid.n() / h.b()) << t;
    let count = support
        .iter()
        .filter(|j| *j != i)
        .filter(|j| grid.linf(&h.perm().permute(j).sub(&center, grid.n())) <= radius)
        .count();
    let bound = h.filter().main_lobe_floor()
        * math::powf(alpha, d as f64 / 2.0)
        * math::powi(2.0, (t as i32 + 1) * d)
        * math::powi(2.0, t as i32);
    count as f64 <= bound
}

/// Isolation at every scale. Scales past `log₂ b + 1` cover the whole torus.
pub fn is_isolated(h: &Hashing, support: &[GridIndex], i: &GridIndex, alpha: f64) -> bool {
    let top = math::log2_exact(h.b()) + 1;
    (0..=top).all(|t| is_isolated_at(h, support, i, alpha, t))
}

/// Noise quantities of one hashing for every element of `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct HashingNoise {
    pub e_head: Vec<f64>,
    /// `e_tail(H, A⋆(1, w))` indexed `[i][w]`.
    pub e_tail_by_shift: Vec<Vec<f64>>,
    /// `μ_{H,i}` of the tail `x_{∖S}`.
    pub mu: Vec<f64>,
    /// `40μ + Σ_w |e_tail(H, A⋆(1, w)) − 40μ|_+`.
    pub e_tail: Vec<f64>,
}

/// Head and tail noise of every `i ∈ S` across the hashings of a measurement set.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    pub support: Vec<GridIndex>,
    /// `(x − χ)_i` for `i ∈ S`.
    pub residual: Vec<Complex64>,
    pub per_hashing: Vec<HashingNoise>,
    /// `quant^{1/5}_r` of the head noise.
    pub e_head: Vec<f64>,
    /// `quant^{1/5}_r` of the aggregated tail noise.
    pub e_tail: Vec<f64>,
}

impl NoiseProfile {
    /// Hashings under which `S[idx]` meets all three sufficient conditions for location.
    pub fn certified_hashings(&self, mset: &MeasurementSet, idx: usize) -> Vec<usize> {
        let level = self.residual[idx].norm() / 20.0;
        let d = mset.grid().d();
        let delta = mset.schedule().delta();
        (0..self.per_hashing.len())
            .filter(|&r| {
                let noise = &self.per_hashing[r];
                noise.e_head[idx] < level
                    && noise.e_tail_by_shift[idx].iter().all(|&e| e < level)
                    && (0..d).all(|s| check_balanced(mset.probes(r), s, delta))
            })
            .collect()
    }
}

/// Evaluates every noise quantity for `x` (time domain) and `χ` against the
/// hashings, probes and shifts of `mset`.
pub fn compute_noise_profile(
    x: &DenseSignal,
    chi: &SparseApprox,
    support: &[GridIndex],
    mset: &MeasurementSet,
    budget: u64,
) -> Result<NoiseProfile> {
    check_time(x)?;
    let grid = *mset.grid();
    x.grid().same(&grid)?;
    chi.grid().same(&grid)?;
    let c_max = mset.params().c_max;
    let shifts = mset.schedule().len();
    let points = (mset.r_max() * (2 + c_max * shifts)) as u64;
    let work = (grid.size() as u64)
        .saturating_mul(support.len() as u64)
        .saturating_mul(points);
    if work > budget {
        return Err(Error::ScaleGuard { work, budget });
    }
    let mut tail = x.clone();
    for i in support {
        tail.set(i, Complex64::new(0.0, 0.0));
    }
    let residual: Vec<Complex64> = support.iter().map(|i| x.get(i) - chi.get(i)).collect();
    let mut per_hashing = Vec::with_capacity(mset.r_max());
    for r in 0..mset.r_max() {
        let h = mset.hashing(r);
        let mut noise = HashingNoise {
            e_head: Vec::with_capacity(support.len()),
            e_tail_by_shift: Vec::with_capacity(support.len()),
            mu: Vec::with_capacity(support.len()),
            e_tail: Vec::with_capacity(support.len()),
        };
        for i in support {
            noise.e_head.push(e_head(h, x, chi, support, i));
            let by_shift = (0..shifts)
                .map(|w| {
                    let zs: Vec<GridIndex> =
                        (0..c_max).map(|c| mset.probe_point(r, c, w)).collect();
                    e_tail_over(h, x, support, i, &zs)
                })
                .collect::<Result<Vec<f64>>>()?;
            let mu = math::sqrt(mu_squared(h, &tail, i));
            let aggregated = 40.0 * mu
                + by_shift
                    .iter()
                    .map(|&e| crate::grid::positive_part(e - 40.0 * mu))
                    .sum::<f64>();
            noise.e_tail_by_shift.push(by_shift);
            noise.mu.push(mu);
            noise.e_tail.push(aggregated);
        }
        per_hashing.push(noise);
    }
    let across = |pick: &dyn Fn(&HashingNoise) -> f64| -> Result<f64> {
        let values: Vec<f64> = per_hashing.iter().map(pick).collect();
        quantile(&values, 0.2)
    };
    let mut head = Vec::with_capacity(support.len());
    let mut tail_q = Vec::with_capacity(support.len());
    for idx in 0..support.len() {
        head.push(across(&|n: &HashingNoise| n.e_head[idx])?);
        tail_q.push(across(&|n: &HashingNoise| n.e_tail[idx])?);
    }
    Ok(NoiseProfile {
        support: support.to_vec(),
        residual,
        per_hashing,
        e_head: head,
        e_tail: tail_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::forward_dft;
    use crate::filters::BucketFilter;
    use crate::grid::Grid;
    use crate::hashing::{acquire_measurements, AcquisitionParams};
    use crate::location::{locate_signal, VoteRule};
    use crate::permutation::SpectrumPermutation;
    use alloc::sync::Arc;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hashing(grid: Grid, buckets: usize, seed: u64) -> Hashing {
        let filter = Arc::new(BucketFilter::new(grid, buckets, 2 * grid.d()).unwrap());
        Hashing::sample(filter, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn single_tone_has_no_head_noise() {
        let grid = Grid::new(64, 1).unwrap();
        let h = hashing(grid, 8, 1);
        let i0 = GridIndex::new(&[5]);
        let x = SparseApprox::from_entries(grid, [(i0, Complex64::new(2.0, 0.0))])
            .to_dense(Domain::Time);
        assert_eq!(e_head(&h, &x, &SparseApprox::new(grid), &[i0], &i0), 0.0);
        assert_eq!(e_tail_at(&h, &x, &[i0], &i0, &GridIndex::new(&[3])), 0.0);
        assert_eq!(mu_squared(&h, &x, &i0), 0.0);
    }

    #[test]
    fn two_tone_head_noise_closed_form() {
        let grid = Grid::new(64, 1).unwrap();
        let h = hashing(grid, 8, 2);
        let (i, j) = (GridIndex::new(&[5]), GridIndex::new(&[9]));
        let x = SparseApprox::from_entries(
            grid,
            [(i, Complex64::new(1.0, 0.0)), (j, Complex64::new(0.0, 3.0))],
        )
        .to_dense(Domain::Time);
        let expected = h.filter().time_value(&h.offset(&i, &j)) * 3.0
            / h.filter().time_value(&h.offset(&i, &i));
        let got = e_head(&h, &x, &SparseApprox::new(grid), &[i, j], &i);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn tail_noise_matches_bucket_error() {
        // with S = {i} and χ = 0 the tail noise is exactly the gap between the
        // rescaled bucket value and x_i
        let grid = Grid::new(64, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let x = DenseSignal::from_values(grid, values, Domain::Time).unwrap();
        let xhat = forward_dft(&x).unwrap();
        let h = hashing(grid, 8, 4);
        let i = GridIndex::new(&[17]);
        let z = GridIndex::new(&[rng.gen_range(0..64)]);
        let u = crate::hashing::hash_to_bins(&xhat, &SparseApprox::new(grid), &h, &z).unwrap();
        let roots = RootTable::new(64);
        let m = u[h.bucket_flat(&h.bucket_of(&i))];
        let phase = roots.pow((64 - grid.dot(&z, &h.perm().apply_sigma(&i))) as u64);
        let direct = (m * phase / h.self_gain(&i) - x.get(&i)).norm();
        assert!((direct - e_tail_at(&h, &x, &[i], &i, &z)).abs() < 1e-8);
    }

    #[test]
    fn isolation_counts_neighbours() {
        let grid = Grid::new(64, 1).unwrap();
        let filter = Arc::new(BucketFilter::new(grid, 8, 2).unwrap());
        let h = Hashing::new(SpectrumPermutation::identity(grid), filter).unwrap();
        let i = GridIndex::new(&[8]);
        assert!(is_isolated(&h, &[i], &i, 0.5));
        // a neighbour inside the unit ball breaks isolation at scale 0
        assert!(!is_isolated_at(&h, &[i, GridIndex::new(&[10])], &i, 0.5, 0));
    }

    #[test]
    fn scale_guard_trips() {
        let grid = Grid::new(64, 1).unwrap();
        let x = DenseSignal::zeros(grid, Domain::Time);
        let xhat = forward_dft(&x).unwrap();
        let params = AcquisitionParams {
            buckets: 8,
            sharpness: 2,
            r_max: 1,
            c_max: 4,
            precision: 3,
        };
        let mset = acquire_measurements(&xhat, &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let s = vec![GridIndex::new(&[1])];
        let err = compute_noise_profile(&x, &SparseApprox::new(grid), &s, &mset, 10).unwrap_err();
        assert!(matches!(err, Error::ScaleGuard { .. }));
    }

    #[test]
    fn certified_elements_are_located() {
        let grid = Grid::new(256, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut certified = 0;
        for _ in 0..20 {
            let i0 = grid.index(rng.gen_range(0..256));
            let mut values: Vec<Complex64> = (0..256)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.01)
                .collect();
            values[grid.flat(&i0)] =
                Complex64::from_polar(1.0, rng.gen_range(0.0..core::f64::consts::TAU));
            let x = DenseSignal::from_values(grid, values, Domain::Time).unwrap();
            let xhat = forward_dft(&x).unwrap();
            let params = AcquisitionParams {
                buckets: 16,
                sharpness: 2,
                r_max: 2,
                c_max: 12,
                precision: 3,
            };
            let mset = acquire_measurements(&xhat, &params, &mut rng).unwrap();
            let profile = compute_noise_profile(
                &x,
                &SparseApprox::new(grid),
                &[i0],
                &mset,
                DEFAULT_WORK_BUDGET,
            )
            .unwrap();
            for r in profile.certified_hashings(&mset, 0) {
                certified += 1;
                assert!(locate_signal(&mset, r, &VoteRule::default())
                    .found
                    .contains(&i0));
            }
        }
        assert!(certified > 0);
    }
}
