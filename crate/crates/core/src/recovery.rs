//! The recovery drivers: `ReduceL1Norm`, `ReduceInfNorm`, `RecoverAtConstantSNR`
//! and the top-level [`sparse_fft`].
//!
//! Location measurements are acquired once and reused for every iteration of
//! the SNR loop; only the residual correction is subtracted from them. Value
//! estimation and the two auxiliary drivers draw fresh hashings.

use alloc::vec::Vec;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimation::{bucket_count, estimate_values, EstimateConfig};
use crate::grid::{Grid, RecoveryParams, SparseApprox};
use crate::hashing::{acquire_measurements, AcquisitionParams, MeasurementSet, SpectrumOracle};
use crate::location::{locate_all, locate_signal, VoteRule};
use crate::math;

/// Every constant the drivers depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Location buckets: `B ≥ factor · k / α^d`.
    pub location_buckets: f64,
    /// Estimation buckets: `B ≥ factor · k / (ε α^{2d})`.
    pub estimation_buckets: f64,
    /// Final step buckets: `B ≥ factor · k / (ε α^d)`.
    pub const_snr_buckets: f64,
    /// `r_max = ⌈factor / √α · log₂log₂N⌉`.
    pub location_reps: f64,
    /// `c_max = ⌈factor · log₂log₂N⌉`.
    pub probes: f64,
    /// Estimation repetitions `⌈factor · (log₂log₂N + d² + log₂(B/k))⌉`.
    pub estimate_reps: f64,
    /// Inf-norm hashings `⌈factor / √α · log₂N⌉`.
    pub inf_norm_reps: f64,
    /// Final step repetitions `⌈factor · log₂N⌉`.
    pub const_snr_reps: f64,
    /// Multiplier of `ν 2^{-t}` in the `ℓ₁` estimation threshold.
    pub l1_threshold: f64,
    /// Semi-equispaced precision exponent.
    pub precision: u32,
    /// Abort when the residual proxy grows by more than this factor.
    pub divergence_factor: f64,
    /// Values below `numerical_floor · scale` are treated as zero.
    pub numerical_floor: f64,
    pub vote: VoteRule,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            location_buckets: 8.0,
            estimation_buckets: 1.0,
            const_snr_buckets: 2.0,
            location_reps: 1.0,
            probes: 8.0,
            estimate_reps: 2.0,
            inf_norm_reps: 0.5,
            const_snr_reps: 1.0,
            l1_threshold: 1e-3,
            precision: crate::semi_equispaced::DEFAULT_PRECISION,
            divergence_factor: 10.0,
            numerical_floor: 1e-9,
            vote: VoteRule::default(),
        }
    }
}

/// Spectrum samples read, by phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleLedger {
    pub location: u64,
    pub estimation: u64,
    pub inf_norm: u64,
    pub const_snr: u64,
    /// Number of `EstimateValues` invocations charged to `estimation`.
    pub estimate_calls: u64,
}

impl SampleLedger {
    pub fn total(&self) -> u64 {
        self.location + self.estimation + self.inf_norm + self.const_snr
    }
}

/// Output of [`sparse_fft`].
#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub chi: SparseApprox,
    pub samples: SampleLedger,
    /// Outer iterations `T` that ran.
    pub iterations: usize,
    pub buckets: usize,
    pub r_max: usize,
    pub c_max: usize,
}

/// Derived sizes shared by the drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub grid: Grid,
    pub k: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub sharpness: usize,
    pub buckets: usize,
    pub r_max: usize,
    pub c_max: usize,
    /// `(log₂N)^4`.
    pub polylog: f64,
    /// Absolute magnitude below which values count as zero.
    pub floor: f64,
    pub constants: Constants,
}

impl Plan {
    pub fn new(grid: Grid, params: &RecoveryParams) -> Result<Self> {
        let c = params.constants;
        if params.k == 0 {
            return Err(Error::param("k must be positive"));
        }
        if !(params.alpha > 0.0 && params.alpha < 1.0) {
            return Err(Error::param("alpha must lie in (0, 1)"));
        }
        if !(params.epsilon > 0.0) || !(params.mu >= 0.0) {
            return Err(Error::param("epsilon must be positive and mu nonnegative"));
        }
        let d = grid.d();
        let sharpness = params.sharpness.unwrap_or(2 * d);
        let loglog = math::log2(grid.log2_size()).max(1.0);
        let buckets = match params.buckets {
            Some(b) => b,
            None => bucket_count(
                &grid,
                c.location_buckets * params.k as f64 / math::powi(params.alpha, d as i32),
            ),
        };
        let r_max = params
            .r_max
            .unwrap_or_else(|| {
                math::ceil(c.location_reps / math::sqrt(params.alpha) * loglog) as usize
            })
            .max(1);
        let c_max = params
            .c_max
            .unwrap_or_else(|| math::ceil(c.probes * loglog) as usize)
            .max(1);
        Ok(Plan {
            grid,
            k: params.k,
            alpha: params.alpha,
            epsilon: params.epsilon,
            sharpness,
            buckets,
            r_max,
            c_max,
            polylog: math::powi(grid.log2_size(), 4),
            floor: c.numerical_floor,
            constants: c,
        })
    }

    fn acquisition(&self, buckets: usize, r_max: usize) -> AcquisitionParams {
        AcquisitionParams {
            buckets,
            sharpness: self.sharpness,
            r_max,
            c_max: self.c_max,
            precision: self.constants.precision,
        }
    }

    fn estimate_config(&self, bucket_factor: f64) -> EstimateConfig {
        EstimateConfig {
            bucket_factor,
            alpha: self.alpha,
            precision: self.constants.precision,
        }
    }

    fn vote(&self) -> VoteRule {
        VoteRule {
            reference_floor: self.constants.vote.reference_floor.max(self.floor),
            ..self.constants.vote
        }
    }

    fn estimate_reps(&self, k: usize, epsilon: f64) -> usize {
        let d = self.grid.d() as f64;
        let b = bucket_count(
            &self.grid,
            self.constants.estimation_buckets * k as f64
                / (epsilon * math::powi(self.alpha, 2 * self.grid.d() as i32)),
        );
        let ratio = math::log2(b as f64 / k as f64).max(0.0);
        let loglog = math::log2(self.grid.log2_size()).max(1.0);
        (math::ceil(self.constants.estimate_reps * (loglog + d * d + ratio)) as usize).max(1)
    }
}

/// Mean `ℓ₁` mass of the zero-shift tables, a proxy for the residual head.
fn residual_proxy(mset: &MeasurementSet) -> f64 {
    let (r_max, c_max) = (mset.r_max(), mset.params().c_max);
    let total: f64 = (0..r_max)
        .flat_map(|r| (0..c_max).map(move |c| (r, c)))
        .map(|(r, c)| mset.table(r, c, 0).iter().map(|v| v.norm()).sum::<f64>())
        .sum();
    total / (r_max * c_max) as f64
}

fn max_reference(mset: &MeasurementSet) -> f64 {
    (0..mset.r_max())
        .flat_map(|r| (0..mset.params().c_max).map(move |c| (r, c)))
        .flat_map(|(r, c)| mset.table(r, c, 0).iter().map(|v| v.norm()))
        .fold(0.0, f64::max)
}

/// `ℓ₁` reduction for one SNR level. `mset` must reflect `x − chi` and is updated
/// with the returned correction.
#[allow(clippy::too_many_arguments)]
pub fn reduce_l1_norm<O, R>(
    xhat: &O,
    mset: &mut MeasurementSet,
    chi: &SparseApprox,
    k: usize,
    nu: f64,
    mu: f64,
    plan: &Plan,
    ledger: &mut SampleLedger,
    rng: &mut R,
) -> Result<SparseApprox>
where
    O: SpectrumOracle + ?Sized,
    R: RngCore + ?Sized,
{
    let grid = plan.grid;
    let mut correction = SparseApprox::new(grid);
    let rounds = math::ceil(math::log2(plan.polylog)).max(1.0) as usize;
    let reps = plan.estimate_reps(4 * k, 1.0);
    let config = plan.estimate_config(plan.constants.estimation_buckets);
    let rule = plan.vote();
    let mut found = locate_all(mset, &rule);
    for t in 0..rounds {
        if found.is_empty() {
            continue;
        }
        let threshold = plan.constants.l1_threshold * nu * math::powi(0.5, t as i32) + 4.0 * mu;
        let total = chi.plus(&correction);
        let batch = estimate_values(
            xhat,
            &total,
            &found,
            4 * k,
            1.0,
            threshold,
            reps,
            &config,
            rng,
        )?;
        ledger.estimation += batch.samples;
        ledger.estimate_calls += 1;
        if !batch.kept.is_empty() {
            mset.update_residual(&batch.kept)?;
            correction.add_assign(&batch.kept);
            found = locate_all(mset, &rule);
        }
    }
    correction.prune(plan.floor);
    Ok(correction)
}

/// Removes the elements of `x − chi` above `ν` in magnitude, down to `O(ν + μ)`,
/// using its own hashings. `r_star` bounds the residual head over `ν`.
#[allow(clippy::too_many_arguments)]
pub fn reduce_inf_norm<O, R>(
    xhat: &O,
    chi: &SparseApprox,
    k_tilde: usize,
    nu: f64,
    r_star: f64,
    mu: f64,
    plan: &Plan,
    ledger: &mut SampleLedger,
    rng: &mut R,
) -> Result<SparseApprox>
where
    O: SpectrumOracle + ?Sized,
    R: RngCore + ?Sized,
{
    let grid = plan.grid;
    let k_tilde = k_tilde.max(1);
    let d = grid.d() as i32;
    let buckets = bucket_count(
        &grid,
        plan.constants.location_buckets * k_tilde as f64 / math::powi(plan.alpha, d),
    );
    let r_max =
        (math::ceil(plan.constants.inf_norm_reps / math::sqrt(plan.alpha) * grid.log2_size())
            as usize)
            .max(1);
    let mut mset = acquire_measurements(xhat, &plan.acquisition(buckets, r_max), rng)?;
    ledger.inf_norm += mset.sample_counter();
    mset.update_residual(chi)?;
    let rounds = (math::ceil(math::log2(r_star.max(1.0))) as usize).max(1);
    let reps = plan.estimate_reps(k_tilde, 1.0);
    let config = plan.estimate_config(plan.constants.estimation_buckets);
    let rule = plan.vote();
    let mut correction = SparseApprox::new(grid);
    let mut found = locate_all(&mset, &rule);
    for t in 0..rounds {
        if found.is_empty() {
            continue;
        }
        let threshold = 5.0 * (nu * math::powi(2.0, (rounds - t - 1) as i32) + mu);
        let total = chi.plus(&correction);
        let batch = estimate_values(
            xhat, &total, &found, k_tilde, 1.0, threshold, reps, &config, rng,
        )?;
        ledger.inf_norm += batch.samples;
        if !batch.kept.is_empty() {
            mset.update_residual(&batch.kept)?;
            correction.add_assign(&batch.kept);
            found = locate_all(&mset, &rule);
        }
    }
    correction.prune(plan.floor);
    Ok(correction)
}

/// One location pass plus unthresholded estimation, keeping the top `4k` values.
#[allow(clippy::too_many_arguments)]
pub fn recover_at_constant_snr<O, R>(
    xhat: &O,
    chi: &SparseApprox,
    k: usize,
    epsilon: f64,
    plan: &Plan,
    ledger: &mut SampleLedger,
    rng: &mut R,
) -> Result<SparseApprox>
where
    O: SpectrumOracle + ?Sized,
    R: RngCore + ?Sized,
{
    let grid = plan.grid;
    let d = grid.d() as i32;
    let target =
        plan.constants.const_snr_buckets * k as f64 / (epsilon * math::powi(plan.alpha, d));
    let mut mset =
        acquire_measurements(xhat, &plan.acquisition(bucket_count(&grid, target), 1), rng)?;
    ledger.const_snr += mset.sample_counter();
    mset.update_residual(chi)?;
    let found = locate_signal(&mset, 0, &plan.vote()).found;
    let mut found: Vec<_> = found;
    found.sort_unstable();
    found.dedup();
    let mut out = SparseApprox::new(grid);
    if found.is_empty() {
        return Ok(out);
    }
    let reps = (math::ceil(plan.constants.const_snr_reps * grid.log2_size()) as usize).max(1);
    let config = plan.estimate_config(plan.constants.const_snr_buckets);
    let batch = estimate_values(xhat, chi, &found, k, epsilon, 0.0, reps, &config, rng)?;
    ledger.const_snr += batch.samples;
    out = batch.kept;
    out.keep_top(4 * k);
    out.prune(plan.floor);
    Ok(out)
}

/// Recovers a sparse approximation of `x` from its spectrum `x̂`.
pub fn sparse_fft<O>(xhat: &O, params: &RecoveryParams) -> Result<RecoveryReport>
where
    O: SpectrumOracle + ?Sized,
{
    let grid = *xhat.grid();
    let mut plan = Plan::new(grid, params)?;
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let child = |master: &mut ChaCha8Rng| ChaCha8Rng::seed_from_u64(master.next_u64());
    let mut ledger = SampleLedger::default();

    let mut mset = acquire_measurements(
        xhat,
        &plan.acquisition(plan.buckets, plan.r_max),
        &mut child(&mut master),
    )?;
    ledger.location = mset.sample_counter();
    let mut report = RecoveryReport {
        chi: SparseApprox::new(grid),
        samples: ledger,
        iterations: 0,
        buckets: plan.buckets,
        r_max: plan.r_max,
        c_max: plan.c_max,
    };
    let scale = max_reference(&mset);
    if scale == 0.0 {
        return Ok(report);
    }
    plan.floor = plan.constants.numerical_floor * scale;
    let mu = params.mu.max(plan.floor);
    let r_star = if params.mu > 0.0 {
        params.r_star.max(1.0)
    } else {
        scale / mu
    };
    let polylog = plan.polylog;
    let iterations = params
        .iterations
        .unwrap_or_else(|| (math::ceil(math::ln(r_star) / math::ln(polylog)) as usize).max(1));
    let k = params.k;
    let k_tilde = ((math::ceil(4.0 * k as f64 / polylog)) as usize).max(1);

    let mut chi = SparseApprox::new(grid);
    let mut proxy = residual_proxy(&mset);
    for t in 0..iterations {
        let nu = 4.0 * mu * math::powi(polylog, (iterations - t) as i32);
        let mut rng = child(&mut master);
        let l1 = reduce_l1_norm(
            xhat,
            &mut mset,
            &chi,
            k,
            nu,
            mu,
            &plan,
            &mut ledger,
            &mut rng,
        )?;
        chi.add_assign(&l1);

        let nu_inf =
            polylog * (4.0 * mu * math::powi(polylog, (iterations - t - 1) as i32) + 20.0 * mu);
        let inf = reduce_inf_norm(
            xhat,
            &chi,
            k_tilde,
            nu_inf,
            2.0 * k_tilde as f64,
            nu_inf,
            &plan,
            &mut ledger,
            &mut rng,
        )?;
        if !inf.is_empty() {
            mset.update_residual(&inf)?;
            chi.add_assign(&inf);
        }

        let next = residual_proxy(&mset);
        let reference = proxy.max(plan.floor * plan.buckets as f64);
        if next > plan.constants.divergence_factor * reference {
            return Err(Error::Diverged {
                iteration: t,
                growth: next / reference,
            });
        }
        proxy = next;
    }

    let mut rng = child(&mut master);
    let last = recover_at_constant_snr(
        xhat,
        &chi,
        2 * k,
        params.epsilon,
        &plan,
        &mut ledger,
        &mut rng,
    )?;
    chi.add_assign(&last);
    chi.prune(plan.floor);

    report.chi = chi;
    report.samples = ledger;
    report.iterations = iterations;
    Ok(report)
}
