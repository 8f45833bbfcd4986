//! `HashToBins` and the frozen measurement tables used for location.
//!
//! For a hashing `H = (π, B, F)` and a point `a`, the bucket vector is
//!
//! ```text
//! u_j = Σ_ξ Ĝ_ξ (P_{Σ,a,q}(x̂ − χ̂))_ξ ω_b^{ξᵀj} = Σ_i G_{π(i) − (n/b)j} (x − χ)_i ω^{aᵀΣi}
//! ```
//!
//! The left-hand form reads `|supp Ĝ|` spectrum samples and folds them into a
//! `b`-point FFT; `χ̂` on the permuted support comes from the semi-equispaced
//! transform.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::dft::{fft_nd, Direction, FftPlan};
use crate::error::{Error, Result};
use crate::filters::BucketFilter;
use crate::grid::{DenseSignal, Grid, GridIndex, ProbePair, SparseApprox};
use crate::math::{self, RootTable};
use crate::permutation::Hashing;
use crate::semi_equispaced::{SemiEquispacedPlan, DEFAULT_PRECISION};
use alloc::sync::Arc;

/// Query access to a spectrum `x̂`.
pub trait SpectrumOracle {
    fn grid(&self) -> &Grid;
    fn sample(&self, xi: &GridIndex) -> Complex64;
}

impl SpectrumOracle for DenseSignal {
    fn grid(&self) -> &Grid {
        DenseSignal::grid(self)
    }

    fn sample(&self, xi: &GridIndex) -> Complex64 {
        self.get(xi)
    }
}

/// The empty spectrum, used to hash `−χ` alone.
struct ZeroOracle(Grid);

impl SpectrumOracle for ZeroOracle {
    fn grid(&self) -> &Grid {
        &self.0
    }

    fn sample(&self, _: &GridIndex) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// Per-hashing state for repeated `HashToBins` calls.
#[derive(Debug, Clone)]
pub struct BinHasher {
    hashing: Hashing,
    support: Vec<SupportPoint>,
    fft: FftPlan,
    semi: SemiEquispacedPlan,
}

/// One frequency `ξ` of `supp Ĝ` with everything that does not depend on `a`.
#[derive(Debug, Clone)]
struct SupportPoint {
    xi: GridIndex,
    /// `Σᵀξ`, so that the sample location is `Σᵀξ − Σᵀa`.
    sigma_t_xi: GridIndex,
    /// `ξ mod b`, flattened.
    bin: usize,
    /// `Ĝ_ξ ω^{ξᵀΣq}`.
    weight: Complex64,
}

impl BinHasher {
    pub fn new(hashing: Hashing, precision: u32) -> Result<Self> {
        let grid = *hashing.grid();
        let d = grid.d();
        let filter = hashing.filter();
        let axis = filter.freq_support_1d();
        let mut support: Vec<(GridIndex, f64)> = vec![(GridIndex::zero(d), 1.0)];
        for s in 0..d {
            support = support
                .into_iter()
                .flat_map(|(xi, v)| {
                    axis.iter().map(move |&(r, g)| {
                        let mut next = xi;
                        next.coords_mut()[s] = r;
                        (next, v * g)
                    })
                })
                .collect();
        }
        let fft = FftPlan::new(hashing.b())?;
        let reach = math::next_pow2((filter.sharpness() * filter.b()) as f64);
        let semi = SemiEquispacedPlan::new(grid, reach.max(2), precision)?;
        let perm = hashing.perm();
        let sigma_q = perm.apply_sigma(perm.q());
        let roots = RootTable::new(grid.n());
        let b = hashing.b();
        let support = support
            .into_iter()
            .map(|(xi, g)| SupportPoint {
                sigma_t_xi: perm.apply_sigma_t(&xi),
                bin: xi
                    .coords()
                    .iter()
                    .fold(0, |acc, &c| acc * b + (c & (b - 1))),
                weight: roots.pow(grid.dot(&xi, &sigma_q) as u64) * g,
                xi,
            })
            .collect();
        Ok(BinHasher {
            hashing,
            support,
            fft,
            semi,
        })
    }

    #[inline]
    pub fn hashing(&self) -> &Hashing {
        &self.hashing
    }

    /// Spectrum samples per call.
    #[inline]
    pub fn samples_per_call(&self) -> usize {
        self.support.len()
    }

    /// Bucket values of `x − χ` at `a`; reads [`Self::samples_per_call`] samples.
    pub fn measure<O: SpectrumOracle + ?Sized>(
        &self,
        oracle: &O,
        chi: &SparseApprox,
        a: &GridIndex,
    ) -> Vec<Complex64> {
        let grid = self.hashing.grid();
        let n = grid.n();
        let perm = self.hashing.perm();
        let chi_hat =
            (!chi.is_empty()).then(|| self.semi.evaluate_mapped(chi, |t| perm.apply_sigma(t), a));
        let sigma_t_a = perm.apply_sigma_t(a);
        let mut y = vec![Complex64::new(0.0, 0.0); self.hashing.buckets()];
        for p in &self.support {
            let mut v = oracle.sample(&p.sigma_t_xi.sub(&sigma_t_a, n));
            if let Some(ch) = &chi_hat {
                v -= ch.get(&p.xi);
            }
            y[p.bin] += v * p.weight;
        }
        fft_nd(&self.fft, grid.d(), &mut y, Direction::Inverse);
        y
    }
}

/// Bucket values `u ∈ ℂ^{[b]^d}` of `x − χ` under `hashing` at `a`, with the
/// default precision.
pub fn hash_to_bins<O: SpectrumOracle + ?Sized>(
    xhat: &O,
    chi: &SparseApprox,
    hashing: &Hashing,
    a: &GridIndex,
) -> Result<Vec<Complex64>> {
    xhat.grid().same(hashing.grid())?;
    chi.grid().same(hashing.grid())?;
    hashing.grid().check(a)?;
    Ok(BinHasher::new(hashing.clone(), DEFAULT_PRECISION)?.measure(xhat, chi, a))
}

/// Brute-force `u_j = Σ_i G_{π(i)−(n/b)j} y_i ω^{aᵀΣi}` for a sparse `y`.
pub fn hash_sparse_direct(y: &SparseApprox, hashing: &Hashing, a: &GridIndex) -> Vec<Complex64> {
    let mut u = vec![Complex64::new(0.0, 0.0); hashing.buckets()];
    let weights = DirectWeights::new(hashing, y);
    weights.accumulate(a, 1.0, &mut u);
    u
}

/// Filter weights of each entry of a sparse vector in every bucket of one hashing.
struct DirectWeights<'a> {
    hashing: &'a Hashing,
    /// `(value, Σi, weights over [b]^d)` per entry.
    entries: Vec<(Complex64, GridIndex, Vec<f64>)>,
    roots: RootTable,
}

impl<'a> DirectWeights<'a> {
    fn new(hashing: &'a Hashing, y: &SparseApprox) -> Self {
        let grid = *hashing.grid();
        let (n, b, d) = (grid.n(), hashing.b(), grid.d());
        let step = n / b;
        let filter = hashing.filter();
        let entries = y
            .iter()
            .map(|(i, v)| {
                let p = hashing.perm().permute(&i);
                let mut w = vec![1.0f64];
                for s in 0..d {
                    let axis: Vec<f64> = (0..b)
                        .map(|j| filter.time_1d(p.get(s).wrapping_sub(j * step) & (n - 1)))
                        .collect();
                    w = w
                        .iter()
                        .flat_map(|&acc| axis.iter().map(move |&g| acc * g))
                        .collect();
                }
                (v, hashing.perm().apply_sigma(&i), w)
            })
            .collect();
        DirectWeights {
            hashing,
            entries,
            roots: RootTable::new(n),
        }
    }

    /// `u += sign · Σ_i G_{π(i)−(n/b)j} y_i ω^{aᵀΣi}`.
    fn accumulate(&self, a: &GridIndex, sign: f64, u: &mut [Complex64]) {
        let grid = self.hashing.grid();
        for (v, si, w) in &self.entries {
            let coef = v * self.roots.pow(grid.dot(a, si) as u64) * sign;
            for (slot, &g) in u.iter_mut().zip(w) {
                *slot += coef * g;
            }
        }
    }
}

/// Base of the digit expansion: `2^{⌊½ log₂ log₂ n⌋}`, at least 2.
pub fn digit_base(n: usize) -> Result<usize> {
    let log_n = math::log2_exact(n) as f64;
    let exp = if log_n <= 1.0 {
        0.0
    } else {
        math::floor(0.5 * math::log2(log_n))
    };
    let delta = (1usize << exp as u32).max(2);
    if delta >= n {
        return Err(Error::param(alloc::format!(
            "digit base {delta} must be below n={n}"
        )));
    }
    Ok(delta)
}

/// One digit position of the location expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitGroup {
    /// Number of candidate digits; `Δ` except possibly for the top group.
    pub radix: usize,
    /// Shift magnitude `w_g = n / (Δ^{g−1}·radix_g)`.
    pub shift: usize,
    /// `Δ^{g−1}`, the weight of this digit.
    pub weight: usize,
}

/// The shift set `𝓗 = {0} ∪ {w_g e_s}` and its digit structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftSchedule {
    delta: usize,
    groups: Vec<DigitGroup>,
    shifts: Vec<GridIndex>,
}

impl ShiftSchedule {
    pub fn new(grid: &Grid) -> Result<Self> {
        let (n, d) = (grid.n(), grid.d());
        let delta = digit_base(n)?;
        let bits = math::log2_exact(n) as usize;
        let step = math::log2_exact(delta) as usize;
        let count = bits.div_ceil(step);
        let mut groups = Vec::with_capacity(count);
        let mut weight = 1usize;
        for g in 0..count {
            let radix = if g + 1 == count { n / weight } else { delta };
            groups.push(DigitGroup {
                radix,
                shift: n / (weight * radix),
                weight,
            });
            weight *= radix;
        }
        let mut shifts = vec![GridIndex::zero(d)];
        for grp in &groups {
            for s in 0..d {
                shifts.push(GridIndex::unit(d, s).scale(grp.shift, n));
            }
        }
        Ok(ShiftSchedule {
            delta,
            groups,
            shifts,
        })
    }

    #[inline]
    pub fn delta(&self) -> usize {
        self.delta
    }

    #[inline]
    pub fn groups(&self) -> &[DigitGroup] {
        &self.groups
    }

    /// All shift vectors; index 0 is the zero shift.
    #[inline]
    pub fn shifts(&self) -> &[GridIndex] {
        &self.shifts
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// Position in [`Self::shifts`] of the shift for digit group `g` and coordinate `s`.
    #[inline]
    pub fn position(&self, g: usize, s: usize, d: usize) -> usize {
        1 + g * d + s
    }
}

/// Shape of a measurement acquisition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionParams {
    pub buckets: usize,
    pub sharpness: usize,
    pub r_max: usize,
    pub c_max: usize,
    pub precision: u32,
}

/// Frozen measurements `m(x̂, H_r, a⋆(1, w))` for every hashing `r`, probe `a ∈ A_r`
/// and shift `w ∈ 𝓗`.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    grid: Grid,
    params: AcquisitionParams,
    hashers: Vec<BinHasher>,
    probes: Vec<Vec<ProbePair>>,
    schedule: ShiftSchedule,
    tables: Vec<Complex64>,
    sample_counter: u64,
}

impl MeasurementSet {
    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn params(&self) -> &AcquisitionParams {
        &self.params
    }

    #[inline]
    pub fn r_max(&self) -> usize {
        self.hashers.len()
    }

    #[inline]
    pub fn buckets(&self) -> usize {
        self.params.buckets
    }

    pub fn hashing(&self, r: usize) -> &Hashing {
        self.hashers[r].hashing()
    }

    pub fn probes(&self, r: usize) -> &[ProbePair] {
        &self.probes[r]
    }

    pub fn schedule(&self) -> &ShiftSchedule {
        &self.schedule
    }

    /// Spectrum samples read so far.
    #[inline]
    pub fn sample_counter(&self) -> u64 {
        self.sample_counter
    }

    /// `|supp Ĝ|`.
    pub fn samples_per_table(&self) -> usize {
        self.hashers.first().map_or(0, |h| h.samples_per_call())
    }

    fn table_index(&self, r: usize, c: usize, w: usize) -> usize {
        ((r * self.params.c_max + c) * self.schedule.len() + w) * self.params.buckets
    }

    /// `m(x̂ − χ̂, H_r, a_c ⋆ (1, w))` over `[b]^d`.
    pub fn table(&self, r: usize, c: usize, w: usize) -> &[Complex64] {
        let at = self.table_index(r, c, w);
        &self.tables[at..at + self.params.buckets]
    }

    /// Every table in `(r, c, w, bucket)` order.
    pub fn raw_tables(&self) -> &[Complex64] {
        &self.tables
    }

    /// The point `a⋆(1, w) = α + β∘w`.
    pub fn probe_point(&self, r: usize, c: usize, w: usize) -> GridIndex {
        let n = self.grid.n();
        let p = &self.probes[r][c];
        p.alpha
            .add(&p.beta.hadamard(&self.schedule.shifts()[w], n), n)
    }

    /// Subtracts the hashed contribution of `delta` from every table. Reads no samples.
    pub fn update_residual(&mut self, delta: &SparseApprox) -> Result<()> {
        delta.grid().same(&self.grid)?;
        if delta.is_empty() {
            return Ok(());
        }
        let b_total = self.params.buckets;
        let per_r = self.params.c_max * self.schedule.len();
        let fine = self.hashers[0].semi.b().pow(self.grid.d() as u32);
        let direct_cost = delta.len() * b_total;
        let semi_cost = self.samples_per_table() + 4 * fine * (math::log2_exact(fine) as usize + 1);
        for r in 0..self.hashers.len() {
            if direct_cost <= semi_cost {
                let weights = DirectWeights::new(self.hashers[r].hashing(), delta);
                for c in 0..self.params.c_max {
                    for w in 0..self.schedule.len() {
                        let a = self.probe_point(r, c, w);
                        let at = self.table_index(r, c, w);
                        weights.accumulate(&a, -1.0, &mut self.tables[at..at + b_total]);
                    }
                }
            } else {
                let zero = ZeroOracle(self.grid);
                for idx in 0..per_r {
                    let (c, w) = (idx / self.schedule.len(), idx % self.schedule.len());
                    let a = self.probe_point(r, c, w);
                    let u = self.hashers[r].measure(&zero, delta, &a);
                    let at = self.table_index(r, c, w);
                    for (slot, v) in self.tables[at..at + b_total].iter_mut().zip(u) {
                        *slot += v;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Samples `r_max` hashings with `c_max` probes each and fills every table with `χ = 0`.
pub fn acquire_measurements<O, R>(
    xhat: &O,
    params: &AcquisitionParams,
    rng: &mut R,
) -> Result<MeasurementSet>
where
    O: SpectrumOracle + ?Sized,
    R: RngCore + ?Sized,
{
    let grid = *xhat.grid();
    if params.r_max == 0 || params.c_max == 0 {
        return Err(Error::param("r_max and c_max must be positive"));
    }
    let schedule = ShiftSchedule::new(&grid)?;
    let filter = Arc::new(BucketFilter::new(grid, params.buckets, params.sharpness)?);
    let (n, d) = (grid.n(), grid.d());
    let mut hashers = Vec::with_capacity(params.r_max);
    let mut probes = Vec::with_capacity(params.r_max);
    for _ in 0..params.r_max {
        hashers.push(BinHasher::new(
            Hashing::sample(filter.clone(), rng),
            params.precision,
        )?);
        let set = (0..params.c_max)
            .map(|_| {
                let mut alpha = GridIndex::zero(d);
                let mut beta = GridIndex::zero(d);
                alpha
                    .coords_mut()
                    .iter_mut()
                    .for_each(|c| *c = rng.gen_range(0..n));
                beta.coords_mut()
                    .iter_mut()
                    .for_each(|c| *c = rng.gen_range(0..n));
                ProbePair::new(alpha, beta)
            })
            .collect();
        probes.push(set);
    }
    let total = params.r_max * params.c_max * schedule.len() * params.buckets;
    let mut set = MeasurementSet {
        grid,
        params: *params,
        hashers,
        probes,
        schedule,
        tables: Vec::with_capacity(total),
        sample_counter: 0,
    };
    let empty = SparseApprox::new(grid);
    for r in 0..params.r_max {
        for c in 0..params.c_max {
            for w in 0..set.schedule.len() {
                let a = set.probe_point(r, c, w);
                let u = set.hashers[r].measure(xhat, &empty, &a);
                set.tables.extend(u);
                set.sample_counter += set.hashers[r].samples_per_call() as u64;
            }
        }
    }
    Ok(set)
}

/// See [`MeasurementSet::update_residual`].
pub fn update_residual_measurements(
    mset: &mut MeasurementSet,
    chi_delta: &SparseApprox,
) -> Result<()> {
    mset.update_residual(chi_delta)
}
