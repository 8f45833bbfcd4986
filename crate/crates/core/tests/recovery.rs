use std::cell::Cell;
use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfft_core::hashing::SpectrumOracle;
use sfft_core::{sparse_fft, Complex64, Grid, GridIndex, RecoveryParams, SparseApprox};

/// Evaluates the spectrum of a sparse signal term by term and counts queries.
struct SparseOracle {
    grid: Grid,
    terms: Vec<(GridIndex, Complex64)>,
    queries: Cell<u64>,
}

impl SparseOracle {
    fn new(x: &SparseApprox) -> Self {
        SparseOracle {
            grid: *x.grid(),
            terms: x.iter().collect(),
            queries: Cell::new(0),
        }
    }
}

impl SpectrumOracle for SparseOracle {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn sample(&self, xi: &GridIndex) -> Complex64 {
        self.queries.set(self.queries.get() + 1);
        let n = self.grid.n() as u64;
        let norm = (self.grid.size() as f64).sqrt();
        self.terms
            .iter()
            .map(|(i, v)| {
                let dot: u64 = i
                    .coords()
                    .iter()
                    .zip(xi.coords())
                    .map(|(&a, &b)| a as u64 * b as u64)
                    .sum();
                v * Complex64::from_polar(1.0, -TAU * (dot % n) as f64 / n as f64)
            })
            .sum::<Complex64>()
            / norm
    }
}

fn planted(grid: Grid, k: usize, seed: u64) -> SparseApprox {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = SparseApprox::new(grid);
    while x.len() < k {
        let i = grid.index(rng.gen_range(0..grid.size()));
        if !x.contains(&i) {
            x.insert(
                &i,
                Complex64::from_polar(rng.gen_range(1.0..2.0), rng.gen_range(0.0..TAU)),
            );
        }
    }
    x
}

fn max_error(a: &SparseApprox, b: &SparseApprox) -> f64 {
    a.grid()
        .indices()
        .map(|i| (a.get(&i) - b.get(&i)).norm())
        .fold(0.0, f64::max)
}

#[test]
fn recovers_sparse_signal_from_oracle() {
    for (n, d, k) in [(1024, 1, 8), (32, 2, 6), (16, 3, 3)] {
        let grid = Grid::new(n, d).unwrap();
        for seed in 0..5 {
            let x = planted(grid, k, seed);
            let oracle = SparseOracle::new(&x);
            let report = sparse_fft(&oracle, &RecoveryParams::new(k, 0.2, 2.0, 0.0, seed)).unwrap();
            assert!(max_error(&report.chi, &x) < 1e-6, "n={n} d={d} seed={seed}");
        }
    }
}

#[test]
fn ledger_accounts_for_every_query() {
    let grid = Grid::new(512, 1).unwrap();
    let x = planted(grid, 5, 11);
    let oracle = SparseOracle::new(&x);
    let report = sparse_fft(&oracle, &RecoveryParams::new(5, 0.2, 2.0, 0.0, 11)).unwrap();
    assert_eq!(report.samples.total(), oracle.queries.get());
}

#[test]
fn zero_spectrum_gives_empty_output() {
    let grid = Grid::new(256, 2).unwrap();
    let oracle = SparseOracle::new(&SparseApprox::new(grid));
    let report = sparse_fft(&oracle, &RecoveryParams::new(4, 0.2, 1.0, 0.0, 0)).unwrap();
    assert!(report.chi.is_empty());
    assert_eq!(report.samples.total(), report.samples.location);
}

#[test]
fn same_seed_same_report() {
    let grid = Grid::new(256, 1).unwrap();
    let x = planted(grid, 4, 2);
    let run = |seed| {
        sparse_fft(
            &SparseOracle::new(&x),
            &RecoveryParams::new(4, 0.2, 2.0, 0.0, seed),
        )
        .unwrap()
    };
    let (a, b) = (run(7), run(7));
    assert_eq!(a.samples, b.samples);
    assert_eq!(
        a.chi.iter().collect::<Vec<_>>(),
        b.chi.iter().collect::<Vec<_>>()
    );
}

#[test]
fn invalid_parameters_are_rejected() {
    let grid = Grid::new(64, 1).unwrap();
    let oracle = SparseOracle::new(&SparseApprox::new(grid));
    assert!(sparse_fft(&oracle, &RecoveryParams::new(0, 0.2, 1.0, 0.0, 0)).is_err());
    assert!(sparse_fft(&oracle, &RecoveryParams::new(4, -1.0, 1.0, 0.0, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_recovery_for_random_instances(k in 1usize..6, seed in any::<u64>()) {
        let grid = Grid::new(256, 1).unwrap();
        let x = planted(grid, k, seed);
        let report = sparse_fft(&SparseOracle::new(&x), &RecoveryParams::new(k, 0.2, 2.0, 0.0, seed)).unwrap();
        prop_assert!(max_error(&report.chi, &x) < 1e-6);
    }
}
