//! The acceptance suite run by `sfft-lab selftest` and the `acceptance` test target.
//!
//! Each criterion builds its own brute-force reference (direct DFT sums, direct
//! filter sums) instead of reusing the library's fast paths.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sfft_core::dft::{forward_dft, inverse_dft};
use sfft_core::diagnostics::{compute_noise_profile, DEFAULT_WORK_BUDGET};
use sfft_core::estimation::{estimate_values, EstimateConfig};
use sfft_core::filters::BucketFilter;
use sfft_core::hashing::{acquire_measurements, hash_to_bins, AcquisitionParams, MeasurementSet};
use sfft_core::location::{check_balanced, locate_all, locate_signal, VoteRule};
use sfft_core::permutation::{apply_p, sample_permutation, Hashing};
use sfft_core::recovery::Plan;
use sfft_core::semi_equispaced::{semi_equispaced_fft, shifted_semi_equispaced};
use sfft_core::{sparse_fft, DenseSignal, Domain, Grid, GridIndex, RecoveryParams, SparseApprox};

use crate::experiment::{run_seed, ExperimentSpec, Overrides};
use crate::signal::{generate_signal, SignalModel, SignalSpec};

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{:>2}] {:<28} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Check = fn() -> (bool, String);

/// Every criterion in order: id, title, check.
pub const CRITERIA: [(u32, &str, Check); 12] = [
    (1, "dft oracle", dft_oracle),
    (2, "filter bounds", filter_bounds),
    (3, "permutation identity", permutation_identity),
    (4, "hash-to-bins identity", hash_to_bins_identity),
    (5, "semi-equispaced error", semi_equispaced_error),
    (6, "location correctness", location_correctness),
    (7, "estimation accuracy", estimation_accuracy),
    (8, "exact recovery", exact_recovery),
    (9, "l2/l2 guarantee", l2_guarantee),
    (10, "sample reuse", sample_reuse),
    (11, "sample scaling", sample_scaling),
    (12, "diagnostics consistency", diagnostics_consistency),
];

pub fn run_criterion(id: u32) -> Option<CriterionResult> {
    let (id, title, check) = *CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (passed, detail) = check();
    Some(CriterionResult {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn root(m: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (m % n) as f64 / n as f64)
}

fn dot(a: &GridIndex, b: &GridIndex, n: usize) -> usize {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x * y % n)
        .sum::<usize>()
        % n
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_dense(grid: Grid, domain: Domain, rng: &mut ChaCha8Rng) -> DenseSignal {
    let v = (0..grid.size()).map(|_| random_complex(rng)).collect();
    DenseSignal::from_values(grid, v, domain).expect("size matches")
}

fn random_sparse(grid: Grid, k: usize, rng: &mut ChaCha8Rng) -> SparseApprox {
    let mut x = SparseApprox::new(grid);
    while x.len() < k {
        x.insert(
            &grid.index(rng.gen_range(0..grid.size())),
            random_complex(rng),
        );
    }
    x
}

/// `N^{-1/2} Σ_i v_i ω^{sign · iᵀj}` by direct summation.
fn direct_dft(v: &[Complex64], grid: Grid, sign: i64) -> Vec<Complex64> {
    let n = grid.n();
    let table: Vec<Complex64> = (0..n).map(|m| root(m, n)).collect();
    let idx: Vec<GridIndex> = grid.indices().collect();
    let scale = 1.0 / (grid.size() as f64).sqrt();
    idx.par_iter()
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, x) in idx.iter().zip(v) {
                let e = dot(i, j, n);
                let e = if sign < 0 { (n - e) % n } else { e };
                acc += x * table[e];
            }
            acc * scale
        })
        .collect()
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn dft_oracle() -> (bool, String) {
    let start = Instant::now();
    let mut transform = Duration::ZERO;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut worst_parseval = 0.0f64;
    let shapes = [
        (2, 1),
        (8, 1),
        (64, 1),
        (4, 2),
        (16, 2),
        (64, 2),
        (2, 3),
        (8, 3),
        (16, 3),
    ];
    for (n, d) in shapes {
        let grid = Grid::new(n, d).expect("valid grid");
        let x = random_dense(grid, Domain::Time, &mut rng);
        let y = random_dense(grid, Domain::Frequency, &mut rng);
        let timed = Instant::now();
        let fast = forward_dft(&x).expect("forward");
        let back = inverse_dft(&y).expect("inverse");
        transform += timed.elapsed();
        worst = worst.max(max_abs_diff(
            fast.values(),
            &direct_dft(x.values(), grid, -1),
        ));
        worst = worst.max(max_abs_diff(
            back.values(),
            &direct_dft(y.values(), grid, 1),
        ));
        let (ex, ef) = (x.norm_l2().powi(2), fast.norm_l2().powi(2));
        worst_parseval = worst_parseval.max((ex - ef).abs() / ex);
    }
    let transform = transform.as_secs_f64();
    (
        worst <= 1e-10 && worst_parseval <= 1e-9 && transform < 1.0,
        format!(
            "max abs err {worst:.2e}, parseval rel err {worst_parseval:.2e}, transforms {transform:.4}s, with direct sums {:.3}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn filter_bounds() -> (bool, String) {
    let start = Instant::now();
    let mut configs = 0;
    let mut violations = Vec::new();
    for n in [64usize, 128, 256] {
        for d in 1..=2usize {
            for sharp in [4usize, 8] {
                for b in [4usize, 8, 16] {
                    let grid = Grid::new(n, d).expect("valid grid");
                    let filter = match BucketFilter::new(grid, b.pow(d as u32), sharp) {
                        Ok(f) => f,
                        Err(_) => continue,
                    };
                    configs += 1;
                    let floor = (2.0 * PI).powi(-((sharp * d) as i32));
                    for j in grid.indices() {
                        let g = filter.time_value(&j);
                        let linf = grid.linf(&j) as f64;
                        let lobe = linf <= n as f64 / (2 * b) as f64;
                        let decay = (2.0 / (1.0 + b as f64 / n as f64 * linf)).powi(sharp as i32);
                        let ok = (0.0..=1.0).contains(&g)
                            && (!lobe || g >= floor)
                            && g.abs() <= decay * (1.0 + 1e-12);
                        if !ok {
                            violations.push(format!("n={n} d={d} F={sharp} b={b} j={j:?} G={g:e}"));
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let first = violations.first().cloned().unwrap_or_default();
    (
        configs > 0 && violations.is_empty() && elapsed < 10.0,
        format!(
            "{configs} filters, {} violations {first}, {elapsed:.2}s",
            violations.len()
        ),
    )
}

fn permutation_identity() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for t in 0..50 {
        let grid = Grid::new(32, 1 + t % 2).expect("valid grid");
        let n = grid.n();
        let x = random_dense(grid, Domain::Time, &mut rng);
        let xhat =
            DenseSignal::from_values(grid, direct_dft(x.values(), grid, -1), Domain::Frequency)
                .expect("size matches");
        let perm = sample_permutation(grid, &mut rng);
        let a = grid.index(rng.gen_range(0..grid.size()));
        let permuted = apply_p(&perm, &a, &xhat).expect("apply_p");
        let back = direct_dft(permuted.values(), grid, 1);
        for i in grid.indices() {
            let lhs = back[grid.flat(&perm.permute(&i))];
            let rhs = x.get(&i) * root(dot(&a, &perm.apply_sigma(&i), n), n);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    (worst <= 1e-9, format!("50 instances, max err {worst:.2e}"))
}

/// `u_s = Σ_j G_{π(j) − (n/b)s} y_j ω^{aᵀΣj}` over the whole grid.
fn brute_hash(y: &DenseSignal, h: &Hashing, a: &GridIndex) -> Vec<Complex64> {
    let grid = *y.grid();
    let (n, b) = (grid.n(), h.b());
    (0..h.buckets())
        .map(|flat| {
            let s = h.bucket_index(flat);
            let center = s.scale(n / b, n);
            grid.indices()
                .map(|j| {
                    let g = h.filter().time_value(&h.perm().permute(&j).sub(&center, n));
                    y.get(&j) * g * root(dot(a, &h.perm().apply_sigma(&j), n), n)
                })
                .sum()
        })
        .collect()
}

fn hash_to_bins_identity() -> (bool, String) {
    let results: Vec<f64> = (0..100u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(400 + t);
            let (n, d, b) = match t % 5 {
                0 => (64, 1, 16usize),
                1 => (64, 1, 8),
                2 => (32, 1, 4),
                3 => (64, 2, 4),
                _ => (16, 2, 4),
            };
            let grid = Grid::new(n, d).expect("valid grid");
            let x = random_dense(grid, Domain::Time, &mut rng);
            let chi = random_sparse(grid, 1 + t as usize % 8, &mut rng);
            let xhat = forward_dft(&x).expect("forward");
            let filter = Arc::new(BucketFilter::new(grid, b.pow(d as u32), 2 * d).expect("filter"));
            let h = Hashing::sample(filter, &mut rng);
            let a = grid.index(rng.gen_range(0..grid.size()));
            let u = hash_to_bins(&xhat, &chi, &h, &a).expect("hash_to_bins");
            let mut y = x.clone();
            for (i, v) in chi.iter() {
                y.set(&i, y.get(&i) - v);
            }
            max_abs_diff(&u, &brute_hash(&y, &h, &a))
        })
        .collect();
    let worst = results.iter().copied().fold(0.0, f64::max);
    (worst <= 1e-7, format!("100 instances, max err {worst:.2e}"))
}

fn signed_box(d: usize, half: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| (-half..=half).map(move |c| [p.clone(), vec![c]].concat()))
            .collect();
    }
    out
}

fn semi_equispaced_error() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_ratio = 0.0f64;
    let mut cases = 0;
    let shapes = [
        (64usize, 1usize, 8usize),
        (128, 1, 16),
        (256, 1, 32),
        (256, 1, 8),
        (16, 2, 4),
        (64, 2, 8),
        (256, 2, 16),
    ];
    for (n, d, b) in shapes {
        let grid = Grid::new(n, d).expect("valid grid");
        for c in [2u32, 3] {
            for _ in 0..3 {
                let k = rng.gen_range(1..=32usize.min(grid.size() / 2));
                let x = random_sparse(grid, k, &mut rng);
                let dense = forward_dft(&x.to_dense(Domain::Time)).expect("forward");
                let bound = x.norm_l2() * (grid.size() as f64).powi(-(c as i32));
                let plain = semi_equispaced_fft(&x, b.pow(d as u32), c).expect("semi-equispaced");
                let perm = sample_permutation(grid, &mut rng);
                let shifted =
                    shifted_semi_equispaced(&x, &perm, b.pow(d as u32), c).expect("shifted");
                for xi in signed_box(d, b as i64 / 2) {
                    let at = GridIndex::from_signed(&xi, n);
                    let e1 = (plain.get_signed(&xi) - dense.get(&at)).norm();
                    let moved = perm.apply_sigma(&at.sub(perm.q(), n));
                    let e2 = (shifted.get_signed(&xi) - dense.get(&moved)).norm();
                    worst_ratio = worst_ratio.max(e1.max(e2) / bound);
                }
                cases += 1;
            }
        }
    }
    (
        worst_ratio <= 1.0,
        format!("{cases} cases, worst error / bound {worst_ratio:.3}"),
    )
}

fn plan_for(grid: Grid, k: usize, seed: u64) -> Plan {
    Plan::new(grid, &RecoveryParams::new(k, 0.5, 1.0, 0.0, seed)).expect("plan")
}

fn acquire_with_plan(xhat: &DenseSignal, plan: &Plan, rng: &mut ChaCha8Rng) -> MeasurementSet {
    let params = AcquisitionParams {
        buckets: plan.buckets,
        sharpness: plan.sharpness,
        r_max: plan.r_max,
        c_max: plan.c_max,
        precision: plan.constants.precision,
    };
    acquire_measurements(xhat, &params, rng).expect("acquisition")
}

/// `count` tones pairwise at circular `ℓ∞` distance at least `n/8`.
fn separated_tones(grid: Grid, count: usize, rng: &mut ChaCha8Rng) -> SparseApprox {
    let n = grid.n();
    let mut x = SparseApprox::new(grid);
    while x.len() < count {
        let i = grid.index(rng.gen_range(0..grid.size()));
        if x.support().iter().all(|j| grid.linf(&i.sub(j, n)) >= n / 8) {
            x.insert(
                &i,
                Complex64::from_polar(rng.gen_range(1.0..2.0), rng.gen_range(0.0..2.0 * PI)),
            );
        }
    }
    x
}

fn location_correctness() -> (bool, String) {
    let mut detail = Vec::new();
    let mut passed = true;
    for (n, d) in [(1024usize, 1usize), (64, 2)] {
        let grid = Grid::new(n, d).expect("valid grid");
        for tones in [1usize, 4] {
            let outcomes: Vec<(bool, usize)> = (0..100u64)
                .into_par_iter()
                .map(|seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(6000 + seed);
                    let x = separated_tones(grid, tones, &mut rng);
                    let xhat = forward_dft(&x.to_dense(Domain::Time)).expect("forward");
                    let plan = plan_for(grid, tones, seed);
                    let mset = acquire_with_plan(&xhat, &plan, &mut rng);
                    let found = locate_all(&mset, &plan.constants.vote);
                    let recall = x.support().iter().all(|i| found.contains(i));
                    let spurious = found.iter().filter(|i| !x.contains(i)).count();
                    (recall, spurious)
                })
                .collect();
            let hits = outcomes.iter().filter(|o| o.0).count();
            let spurious: usize = outcomes.iter().map(|o| o.1).sum();
            passed &= hits == 100;
            detail.push(format!(
                "n={n} d={d} tones={tones}: {hits}/100 (spurious {spurious})"
            ));
        }
    }

    // a unit tone gives ratio ω_Δ^{digit·β} exactly; wrong digits sit at least √2 − 1/3 away
    let margin_ok = 2f64.sqrt() - 1.0 / 3.0 > 1.0 / 3.0;
    let grid = Grid::new(1 << 12, 1).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let i0 = grid.index(1234);
    let x = SparseApprox::from_entries(grid, [(i0, Complex64::new(1.0, 0.0))]);
    let xhat = forward_dft(&x.to_dense(Domain::Time)).expect("forward");
    let params = AcquisitionParams {
        buckets: 16,
        sharpness: 2,
        r_max: 8,
        c_max: 30,
        precision: 3,
    };
    let mset = acquire_measurements(&xhat, &params, &mut rng).expect("acquisition");
    let delta = mset.schedule().delta();
    let mut balanced = 0;
    let mut rejected = true;
    for r in 0..mset.r_max() {
        if check_balanced(mset.probes(r), 0, delta) {
            balanced += 1;
            let res = locate_signal(&mset, r, &VoteRule::default());
            rejected &= res.found.iter().all(|f| *f == i0) && res.failed.iter().all(|f| !f);
        }
    }
    passed &= margin_ok && balanced > 0 && rejected;
    detail.push(format!(
        "wrong digits rejected on {balanced} balanced probe sets: {rejected}"
    ));
    (passed, detail.join("; "))
}

/// Failure rate of `|w_i − x_i| > √(εα)(ν + μ)` over the head of noisy instances.
pub fn estimation_failure_rate(
    r_max: usize,
    trials: u64,
    epsilon: f64,
    snr: f64,
    bucket_factor: f64,
) -> f64 {
    let grid = Grid::new(1024, 1).expect("valid grid");
    let (k, alpha) = (10usize, 0.5);
    let spec = SignalSpec {
        grid,
        k,
        model: SignalModel::GaussianTail,
        snr,
        tail_energy: 1.0,
    };
    let failures: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = generate_signal(&spec, 7000 + t).expect("signal");
            let support = g.head.support();
            let nu = g.head.norm_l1() / k as f64;
            let mu = (g.tail_energy / k as f64).sqrt();
            let bound = (epsilon * alpha).sqrt() * (nu + mu);
            let mut rng = ChaCha8Rng::seed_from_u64(70_000 + t);
            let config = EstimateConfig {
                alpha,
                bucket_factor,
                ..EstimateConfig::default()
            };
            let batch = estimate_values(
                &g.xhat,
                &SparseApprox::new(grid),
                &support,
                k,
                epsilon,
                0.0,
                r_max,
                &config,
                &mut rng,
            )
            .expect("estimation");
            batch
                .estimates
                .iter()
                .filter(|(i, w)| (w - g.x.get(i)).norm() > bound)
                .count()
        })
        .sum();
    failures as f64 / (trials as usize * k) as f64
}

/// `ε` and bucket factor of the estimation criterion: 16 buckets for `k = 10`, so
/// that single hashings fail often enough for the median's decay to be visible.
pub const ESTIMATION_EPSILON: f64 = 0.5;
pub const ESTIMATION_BUCKET_FACTOR: f64 = 0.125;

fn estimation_accuracy() -> (bool, String) {
    let rate = |r_max| {
        estimation_failure_rate(
            r_max,
            500,
            ESTIMATION_EPSILON,
            10.0,
            ESTIMATION_BUCKET_FACTOR,
        )
    };
    let (low, high) = (rate(7), rate(15));
    (
        low > 0.0 && high <= low / 2.0,
        format!("failure rate {low:.4} at r_max=7, {high:.4} at r_max=15"),
    )
}

fn exact_spec(n: usize, d: usize, k: usize, seeds: std::ops::Range<u64>) -> ExperimentSpec {
    ExperimentSpec {
        n,
        d,
        k,
        signal_model: SignalModel::ExactSparse,
        snr: 10.0,
        epsilon: 0.2,
        tail_energy: 1.0,
        seeds: seeds.collect(),
        overrides: Overrides::default(),
    }
}

fn exact_recovery() -> (bool, String) {
    let mut passed = true;
    let mut detail = Vec::new();
    for (n, d, k) in [
        (1024usize, 1usize, 5usize),
        (1024, 1, 10),
        (1024, 1, 20),
        (64, 2, 10),
    ] {
        let spec = exact_spec(n, d, k, 0..100);
        let records: Vec<_> = spec
            .seeds
            .par_iter()
            .map(|&s| run_seed(&spec, 8000 + s).expect("run"))
            .collect();
        let good = records
            .iter()
            .filter(|r| {
                r.status == "ok"
                    && r.support_recall == 1.0
                    && r.support_precision == 1.0
                    && r.max_head_error <= 1e-6
                    && r.wall_time_ms < 5000.0
            })
            .count();
        let slowest = records.iter().map(|r| r.wall_time_ms).fold(0.0, f64::max);
        passed &= good >= 99;
        detail.push(format!(
            "n={n} d={d} k={k}: {good}/100 (slowest {slowest:.0}ms)"
        ));
    }
    (passed, detail.join("; "))
}

fn l2_guarantee() -> (bool, String) {
    let epsilon = 0.2;
    let grid = Grid::new(4096, 1).expect("valid grid");
    let k = 16;
    let spec = SignalSpec {
        grid,
        k,
        model: SignalModel::GaussianTail,
        snr: 12.0,
        tail_energy: 1.0,
    };
    let outcomes: Vec<(bool, bool, f64)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let g = generate_signal(&spec, 9000 + seed).expect("signal");
            let planted = g.head.iter().all(|(_, v)| v.norm() >= 10.0 * g.mu);
            let linf = g.head.norm_linf();
            let params = RecoveryParams::new(k, epsilon, linf / g.mu, g.mu, 90_000 + seed);
            match sparse_fft(&g.xhat, &params) {
                Ok(report) => {
                    let err = crate::experiment::l2_error_sq(&g, &report.chi);
                    let ratio = err / g.tail_energy;
                    (planted, ratio <= 1.0 + 10.0 * epsilon, ratio)
                }
                Err(_) => (planted, false, f64::INFINITY),
            }
        })
        .collect();
    let planted = outcomes.iter().all(|o| o.0);
    let good = outcomes.iter().filter(|o| o.1).count();
    let mut ratios: Vec<f64> = outcomes.iter().map(|o| o.2).collect();
    ratios.sort_by(f64::total_cmp);
    (
        planted && good >= 90,
        format!(
            "{good}/100 within (1+10ε)·tail², median ratio {:.3}, worst {:.3}",
            ratios[50], ratios[99]
        ),
    )
}

fn sample_reuse() -> (bool, String) {
    let grid = Grid::new(1024, 1).expect("valid grid");
    let spec = SignalSpec {
        grid,
        k: 8,
        model: SignalModel::ExactSparse,
        snr: 1.0,
        tail_energy: 0.0,
    };
    let mut passed = true;
    let mut per_call = Vec::new();
    let mut detail = Vec::new();
    for seed in 0..5u64 {
        let g = generate_signal(&spec, 10_000 + seed).expect("signal");
        let mut params = RecoveryParams::new(8, 0.2, 1.0, 0.0, seed);
        let mut runs = Vec::new();
        for t in [1usize, 4] {
            params.iterations = Some(t);
            runs.push(sparse_fft(&g.xhat, &params).expect("recovery").samples);
        }
        let (one, four) = (runs[0], runs[1]);
        passed &= one.location == four.location && four.estimate_calls > one.estimate_calls;
        for s in [one, four] {
            passed &= s.estimate_calls > 0 && s.estimation % s.estimate_calls == 0;
            per_call.push(s.estimation / s.estimate_calls);
        }
        if seed == 0 {
            detail.push(format!(
                "location {} vs {}, estimation {}/{} calls vs {}/{} calls",
                one.location,
                four.location,
                one.estimation,
                one.estimate_calls,
                four.estimation,
                four.estimate_calls
            ));
        }
    }
    let constant = per_call.windows(2).all(|w| w[0] == w[1]);
    passed &= constant;
    detail.push(format!("samples per estimation call constant: {constant}"));
    (passed, detail.join("; "))
}

/// Least-squares slope of `log samples_total` against `log k` at `n = 2^16`.
pub fn sample_scaling_slope(seeds: u64) -> (f64, Vec<(usize, f64)>) {
    let ks = [8usize, 16, 32, 64];
    let points: Vec<(usize, f64)> = ks
        .par_iter()
        .map(|&k| {
            let spec = exact_spec(1 << 16, 1, k, 0..seeds);
            let total: f64 = spec
                .seeds
                .iter()
                .map(|&s| run_seed(&spec, 11_000 + s).expect("run").samples_total as f64)
                .sum();
            (k, total / seeds as f64)
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (cov / var, points)
}

fn sample_scaling() -> (bool, String) {
    let (slope, points) = sample_scaling_slope(3);
    let listing: Vec<String> = points
        .iter()
        .map(|(k, s)| format!("k={k}:{s:.0}"))
        .collect();
    (
        (slope - 1.0).abs() <= 0.15,
        format!("slope {slope:.3} ({})", listing.join(", ")),
    )
}

fn diagnostics_consistency() -> (bool, String) {
    let grid = Grid::new(256, 1).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut certified = 0;
    let mut located = 0;
    let mut attempts = 0;
    while certified < 100 && attempts < 2000 {
        attempts += 1;
        let i0 = grid.index(rng.gen_range(0..grid.size()));
        let mut values: Vec<Complex64> = (0..grid.size())
            .map(|_| random_complex(&mut rng) * 0.01)
            .collect();
        values[grid.flat(&i0)] = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
        let x = DenseSignal::from_values(grid, values, Domain::Time).expect("size matches");
        let xhat = forward_dft(&x).expect("forward");
        let params = AcquisitionParams {
            buckets: 16,
            sharpness: 2,
            r_max: 2,
            c_max: 12,
            precision: 3,
        };
        let mset = acquire_measurements(&xhat, &params, &mut rng).expect("acquisition");
        let profile = compute_noise_profile(
            &x,
            &SparseApprox::new(grid),
            &[i0],
            &mset,
            DEFAULT_WORK_BUDGET,
        )
        .expect("profile");
        let hashings = profile.certified_hashings(&mset, 0);
        if hashings.is_empty() {
            continue;
        }
        certified += 1;
        if hashings.iter().all(|&r| {
            locate_signal(&mset, r, &VoteRule::default())
                .found
                .contains(&i0)
        }) {
            located += 1;
        }
    }
    (
        certified == 100 && located == 100,
        format!("{located}/{certified} certified instances located ({attempts} constructed)"),
    )
}
