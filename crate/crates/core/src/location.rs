//! `LocateSignal`: recover the dominant frequency of each bucket digit by digit.
//!
//! For a bucket `j`, coordinate `s` and digit group `g` with shift `w_g·e_s`, the ratio
//! `m_j(a⋆(1, w)) / m_j(a⋆(1, 0))` is close to `ω^{w_g β_s (Σi)_s}` when a single
//! element `i` dominates the bucket. Removing the already decoded low digits leaves
//! `ω_radix^{r₀ β_s}`, and the digit `r₀` is the unique candidate whose correction
//! brings the ratio within `1/3` of 1 for a `3/5` majority of the probes.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::grid::{GridIndex, ProbePair};
use crate::hashing::MeasurementSet;
use crate::math::{self, RootTable};

/// Acceptance rule for one candidate digit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteRule {
    /// A probe supports a digit when the corrected ratio is within this distance of 1.
    pub ratio_tolerance: f64,
    /// Required supporting fraction, as `numerator / denominator`.
    pub vote_numerator: usize,
    pub vote_denominator: usize,
    /// Reference measurements below this magnitude vote against every digit.
    pub reference_floor: f64,
}

impl Default for VoteRule {
    fn default() -> Self {
        VoteRule {
            ratio_tolerance: 1.0 / 3.0,
            vote_numerator: 3,
            vote_denominator: 5,
            reference_floor: 1e-12,
        }
    }
}

/// Located indices for one hashing.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationResult {
    /// One index per bucket that decoded, in bucket order.
    pub found: Vec<GridIndex>,
    /// `failed[j]` is set when bucket `j` did not decode.
    pub failed: Vec<bool>,
}

/// Decodes every bucket of hashing `r`. The tables must already reflect the residual.
pub fn locate_signal(mset: &MeasurementSet, r: usize, rule: &VoteRule) -> LocationResult {
    let grid = *mset.grid();
    let (n, d) = (grid.n(), grid.d());
    let schedule = mset.schedule();
    let probes = mset.probes(r);
    let c_max = probes.len();
    let roots = RootTable::new(n);
    let buckets = mset.buckets();
    let mut found = Vec::new();
    let mut failed = vec![false; buckets];
    let mut counts = vec![0usize; schedule.delta()];
    let mut base = vec![Complex64::new(0.0, 0.0); c_max];
    let refs: Vec<&[Complex64]> = (0..c_max).map(|c| mset.table(r, c, 0)).collect();
    let floor_sq = rule.reference_floor * rule.reference_floor;
    let tolerance_sq = rule.ratio_tolerance * rule.ratio_tolerance;
    let needed = |count: usize| count * rule.vote_denominator >= rule.vote_numerator * c_max;

    'bucket: for j in 0..buckets {
        let mut f = GridIndex::zero(d);
        for s in 0..d {
            let mut fs = 0usize;
            for (g, group) in schedule.groups().iter().enumerate() {
                let shifted: Vec<&[Complex64]> = (0..c_max)
                    .map(|c| mset.table(r, c, schedule.position(g, s, d)))
                    .collect();
                for c in 0..c_max {
                    let reference = refs[c][j];
                    base[c] = if reference.norm_sqr() < floor_sq {
                        Complex64::new(f64::NAN, f64::NAN)
                    } else {
                        let beta = probes[c].beta.get(s);
                        let undo = (n - (group.shift.wrapping_mul(fs).wrapping_mul(beta) & (n - 1)))
                            as u64;
                        shifted[c][j] / reference * roots.pow(undo)
                    };
                }
                let radix = group.radix;
                let step = n / radix;
                counts[..radix].iter_mut().for_each(|v| *v = 0);
                for (c, probe) in probes.iter().enumerate() {
                    if base[c].re.is_nan() {
                        continue;
                    }
                    let beta = probe.beta.get(s);
                    for (digit, count) in counts[..radix].iter_mut().enumerate() {
                        // ω_radix^{-digit·β}
                        let e = n - ((digit * beta) % radix) * step;
                        if (base[c] * roots.pow(e as u64) - 1.0).norm_sqr() < tolerance_sq {
                            *count += 1;
                        }
                    }
                }
                let mut accepted = counts[..radix]
                    .iter()
                    .enumerate()
                    .filter(|&(_, &v)| needed(v));
                match (accepted.next(), accepted.next()) {
                    (Some((digit, _)), None) => fs += digit * group.weight,
                    _ => {
                        failed[j] = true;
                        continue 'bucket;
                    }
                }
            }
            f.coords_mut()[s] = fs;
        }
        found.push(mset.hashing(r).perm().apply_sigma_inv(&f));
    }
    LocationResult { found, failed }
}

/// Sorted, deduplicated union of [`locate_signal`] over every hashing.
pub fn locate_all(mset: &MeasurementSet, rule: &VoteRule) -> Vec<GridIndex> {
    let mut all: Vec<GridIndex> = (0..mset.r_max())
        .flat_map(|r| locate_signal(mset, r, rule).found)
        .collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// `true` iff for every digit `r = 1..Δ−1` at least 49/100 of the points
/// `ω_Δ^{r·β_s}` lie in the closed left half-plane.
pub fn check_balanced(probes: &[ProbePair], s: usize, delta: usize) -> bool {
    check_balanced_with(probes, s, delta, 0.49)
}

/// [`check_balanced`] with an explicit fraction.
pub fn check_balanced_with(probes: &[ProbePair], s: usize, delta: usize, fraction: f64) -> bool {
    if probes.is_empty() {
        return false;
    }
    (1..delta).all(|r| {
        let left = probes
            .iter()
            .filter(|p| {
                // Re ω_Δ^m ≤ 0 exactly when m/Δ ∈ [1/4, 3/4]
                let m = (r * p.beta.get(s)) % delta;
                4 * m >= delta && 4 * m <= 3 * delta
            })
            .count();
        left as f64 >= fraction * probes.len() as f64 - 1e-9
    })
}

/// Angle-based variant used to cross-check the exact arithmetic above.
#[doc(hidden)]
pub fn left_halfplane(r: usize, z: usize, delta: usize) -> bool {
    let theta = 2.0 * core::f64::consts::PI * ((r * z) % delta) as f64 / delta as f64;
    math::cos(theta) <= 1e-12
}
