//! Planted test signals: a `k`-sparse head plus an optional tail.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sfft_core::dft::forward_dft;
use sfft_core::{DenseSignal, Domain, Grid, GridIndex, SparseApprox};

use crate::LabError;

/// How the tail around the planted head is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalModel {
    /// No tail at all.
    ExactSparse,
    /// I.i.d. complex Gaussian tail on every non-head index.
    GaussianTail,
    /// The whole tail sits in one `ℓ∞` ball of the index space.
    AdversarialBucketTail,
}

/// What to plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub grid: Grid,
    pub k: usize,
    pub model: SignalModel,
    /// Head magnitudes are drawn from `[snr, 2 snr] · μ` for noisy models.
    pub snr: f64,
    /// Expected tail energy `‖tail‖₂²`, ignored for the exact model.
    pub tail_energy: f64,
}

/// A planted signal with its ground truth.
#[derive(Debug, Clone)]
pub struct Generated {
    /// The sparse-domain signal `x`.
    pub x: DenseSignal,
    /// Its spectrum `x̂`, the input of the recovery.
    pub xhat: DenseSignal,
    /// The planted head.
    pub head: SparseApprox,
    /// `‖x_tail‖₂²` with the tail being everything off the head.
    pub tail_energy: f64,
    /// `err_k(x) / √k`.
    pub mu: f64,
}

/// `err_k(x)² = Σ` of all but the `k` largest `|x_i|²`.
pub fn best_k_residual(x: &DenseSignal, k: usize) -> f64 {
    let mut energy: Vec<f64> = x.values().iter().map(|v| v.norm_sqr()).collect();
    energy.sort_by(|a, b| b.total_cmp(a));
    energy.iter().skip(k).sum()
}

fn random_phase(rng: &mut ChaCha8Rng, magnitude: f64) -> Complex64 {
    Complex64::from_polar(magnitude, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * (sigma / std::f64::consts::SQRT_2)
}

/// Plants `k` head coefficients and the model's tail, deterministically from `seed`.
pub fn generate_signal(spec: &SignalSpec, seed: u64) -> Result<Generated, LabError> {
    let grid = spec.grid;
    let size = grid.size();
    if spec.k == 0 || spec.k > size / 4 {
        return Err(LabError::Spec(format!(
            "k = {} must lie in 1..={}",
            spec.k,
            size / 4
        )));
    }
    if spec.model != SignalModel::ExactSparse && !(spec.tail_energy > 0.0 && spec.snr > 0.0) {
        return Err(LabError::Spec(
            "noisy models need positive tail energy and snr".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu_target = (spec.tail_energy / spec.k as f64).sqrt();
    let scale = match spec.model {
        SignalModel::ExactSparse => 1.0,
        _ => spec.snr * mu_target,
    };

    let mut head = SparseApprox::new(grid);
    while head.len() < spec.k {
        let i = grid.index(rng.gen_range(0..size));
        if !head.contains(&i) {
            let magnitude = scale * rng.gen_range(1.0..2.0);
            head.insert(&i, random_phase(&mut rng, magnitude));
        }
    }

    let mut x = head.to_dense(Domain::Time);
    match spec.model {
        SignalModel::ExactSparse => {}
        SignalModel::GaussianTail => {
            let sigma = (spec.tail_energy / (size - spec.k) as f64).sqrt();
            for flat in 0..size {
                let i = grid.index(flat);
                if !head.contains(&i) {
                    x.set(&i, gaussian(&mut rng, sigma));
                }
            }
        }
        SignalModel::AdversarialBucketTail => {
            let radius = (grid.n() / 16).max(1) as i64;
            let center = grid.index(rng.gen_range(0..size));
            let ball: Vec<GridIndex> = grid
                .indices()
                .filter(|i| {
                    grid.linf(&i.sub(&center, grid.n())) as i64 <= radius && !head.contains(i)
                })
                .collect();
            let sigma = (spec.tail_energy / ball.len() as f64).sqrt();
            for i in &ball {
                x.set(i, gaussian(&mut rng, sigma));
            }
        }
    }

    let tail_energy: f64 = x
        .values()
        .iter()
        .enumerate()
        .filter(|(flat, _)| !head.contains(&grid.index(*flat)))
        .map(|(_, v)| v.norm_sqr())
        .sum();
    let mu = (best_k_residual(&x, spec.k) / spec.k as f64).sqrt();
    let xhat = forward_dft(&x)?;
    Ok(Generated {
        x,
        xhat,
        head,
        tail_energy,
        mu,
    })
}
