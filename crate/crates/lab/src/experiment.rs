//! Experiment specs, per-seed runs and the parallel driver.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sfft_core::{sparse_fft, Constants, Grid, GridIndex, RecoveryParams, SparseApprox};
use sha2::{Digest, Sha256};

use crate::signal::{generate_signal, Generated, SignalModel, SignalSpec};
use crate::{LabError, Result};

/// Optional overrides of the derived sizes and constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub buckets: Option<usize>,
    pub sharpness: Option<usize>,
    pub r_max: Option<usize>,
    pub c_max: Option<usize>,
    pub iterations: Option<usize>,
    pub alpha: Option<f64>,
    pub location_buckets: Option<f64>,
    pub estimation_buckets: Option<f64>,
    pub const_snr_buckets: Option<f64>,
    pub probes: Option<f64>,
    pub estimate_reps: Option<f64>,
    pub inf_norm_reps: Option<f64>,
    pub const_snr_reps: Option<f64>,
}

impl Overrides {
    fn constants(&self) -> Constants {
        let mut c = Constants::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.location_buckets, self.location_buckets);
        set(&mut c.estimation_buckets, self.estimation_buckets);
        set(&mut c.const_snr_buckets, self.const_snr_buckets);
        set(&mut c.probes, self.probes);
        set(&mut c.estimate_reps, self.estimate_reps);
        set(&mut c.inf_norm_reps, self.inf_norm_reps);
        set(&mut c.const_snr_reps, self.const_snr_reps);
        c
    }
}

fn default_d() -> usize {
    1
}
fn default_snr() -> f64 {
    10.0
}
fn default_epsilon() -> f64 {
    0.2
}
fn default_tail_energy() -> f64 {
    1.0
}
fn default_model() -> SignalModel {
    SignalModel::ExactSparse
}

/// One experiment: a signal family, the recovery knobs and the seeds to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    pub k: usize,
    #[serde(default = "default_model")]
    pub signal_model: SignalModel,
    #[serde(default = "default_snr")]
    pub snr: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_tail_energy")]
    pub tail_energy: f64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub overrides: Overrides,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<Grid> {
        if self.seeds.is_empty() {
            return Err(LabError::Spec("seeds must be nonempty".into()));
        }
        if !self.n.is_power_of_two() {
            return Err(LabError::Spec(format!(
                "n = {} is not a power of two",
                self.n
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(LabError::Spec(format!(
                "epsilon = {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        Ok(Grid::new(self.n, self.d)?)
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        let digest = Sha256::digest(&canonical);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn signal_spec(&self, grid: Grid) -> SignalSpec {
        SignalSpec {
            grid,
            k: self.k,
            model: self.signal_model,
            snr: self.snr,
            tail_energy: self.tail_energy,
        }
    }

    fn recovery_params(&self, g: &Generated, seed: u64) -> RecoveryParams {
        let linf = g
            .head
            .norm_linf()
            .max(g.x.values().iter().map(|v| v.norm()).fold(0.0, f64::max));
        let r_star = if g.mu > 0.0 {
            (linf / g.mu).max(1.0)
        } else {
            1.0
        };
        let o = &self.overrides;
        let mut p = RecoveryParams::new(self.k, self.epsilon, r_star, g.mu, seed);
        if let Some(a) = o.alpha {
            p.alpha = a;
        }
        p.sharpness = o.sharpness;
        p.buckets = o.buckets;
        p.r_max = o.r_max;
        p.c_max = o.c_max;
        p.iterations = o.iterations;
        p.constants = o.constants();
        p
    }
}

/// Metrics of one seeded run. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec_hash: String,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub status: String,
    /// `‖x − χ‖₂² / ‖tail‖₂²`, or relative to `‖x‖₂²` when the tail is zero.
    pub l2_error_ratio: f64,
    pub support_precision: f64,
    pub support_recall: f64,
    pub max_head_error: f64,
    pub samples_location: u64,
    pub samples_estimation: u64,
    pub samples_inf_norm: u64,
    pub samples_const_snr: u64,
    pub samples_total: u64,
    pub estimate_calls: u64,
    pub iterations: usize,
    pub buckets: usize,
    pub r_max: usize,
    pub c_max: usize,
    pub output_size: usize,
    pub wall_time_ms: f64,
}

impl RunRecord {
    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let key = |r: &RunRecord| {
            let mut r = r.clone();
            r.wall_time_ms = 0.0;
            serde_json::to_string(&r).expect("record serializes")
        };
        key(self) == key(other)
    }
}

/// Squared error of `chi` against `x` over the whole grid.
pub fn l2_error_sq(g: &Generated, chi: &SparseApprox) -> f64 {
    let grid = g.x.grid();
    let mut err: f64 = g.x.values().iter().map(|v| v.norm_sqr()).sum();
    for (i, v) in chi.iter() {
        let xi = g.x.get(&i);
        err += (xi - v).norm_sqr() - xi.norm_sqr();
    }
    debug_assert!(chi.iter().all(|(i, _)| grid.contains(&i)));
    err.max(0.0)
}

/// Runs one seed of `spec`: plants a signal, recovers it and scores the result.
pub fn run_seed(spec: &ExperimentSpec, seed: u64) -> Result<RunRecord> {
    let grid = spec.validate()?;
    let generated = generate_signal(&spec.signal_spec(grid), seed)?;
    let params = spec.recovery_params(&generated, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 1);
    let start = Instant::now();
    let outcome = sparse_fft(&generated.xhat, &params);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut record = RunRecord {
        spec_hash: spec.hash(),
        seed,
        n: spec.n,
        d: spec.d,
        k: spec.k,
        status: "ok".into(),
        l2_error_ratio: f64::NAN,
        support_precision: f64::NAN,
        support_recall: f64::NAN,
        max_head_error: f64::NAN,
        samples_location: 0,
        samples_estimation: 0,
        samples_inf_norm: 0,
        samples_const_snr: 0,
        samples_total: 0,
        estimate_calls: 0,
        iterations: 0,
        buckets: 0,
        r_max: 0,
        c_max: 0,
        output_size: 0,
        wall_time_ms,
    };
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            record.status = e.to_string();
            return Ok(record);
        }
    };
    let s = report.samples;
    record.samples_location = s.location;
    record.samples_estimation = s.estimation;
    record.samples_inf_norm = s.inf_norm;
    record.samples_const_snr = s.const_snr;
    record.samples_total = s.total();
    record.estimate_calls = s.estimate_calls;
    record.iterations = report.iterations;
    record.buckets = report.buckets;
    record.r_max = report.r_max;
    record.c_max = report.c_max;
    record.output_size = report.chi.len();

    let truth: BTreeSet<GridIndex> = generated.head.support().into_iter().collect();
    let found: BTreeSet<GridIndex> = report.chi.support().into_iter().collect();
    let hits = truth.intersection(&found).count() as f64;
    record.support_recall = hits / truth.len() as f64;
    record.support_precision = if found.is_empty() {
        0.0
    } else {
        hits / found.len() as f64
    };
    record.max_head_error = generated
        .head
        .iter()
        .map(|(i, v)| (report.chi.get(&i) - v).norm() / v.norm())
        .fold(0.0, f64::max);
    let err = l2_error_sq(&generated, &report.chi);
    let reference = if generated.tail_energy > 0.0 {
        generated.tail_energy
    } else {
        generated.x.values().iter().map(|v| v.norm_sqr()).sum()
    };
    record.l2_error_ratio = err / reference;
    Ok(record)
}

/// Runs every seed in parallel; records come back in seed order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    spec.seeds
        .par_iter()
        .map(|&seed| run_seed(spec, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(k: usize) -> ExperimentSpec {
        ExperimentSpec {
            n: 1024,
            d: 1,
            k,
            signal_model: SignalModel::ExactSparse,
            snr: 10.0,
            epsilon: 0.2,
            tail_energy: 1.0,
            seeds: vec![1, 2, 3],
            overrides: Overrides::default(),
        }
    }

    #[test]
    fn exact_spec_recovers_exactly() {
        for r in run_experiment(&exact(8)).unwrap() {
            assert_eq!(r.status, "ok");
            assert_eq!(r.support_recall, 1.0);
            assert!(r.l2_error_ratio < 1e-12, "{r:?}");
            assert_eq!(
                r.samples_total,
                r.samples_location
                    + r.samples_estimation
                    + r.samples_inf_norm
                    + r.samples_const_snr
            );
        }
    }

    #[test]
    fn hash_ignores_nothing() {
        let a = exact(8);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.overrides.r_max = Some(3);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn json_defaults_fill_in() {
        let s = ExperimentSpec::from_json(r#"{"n": 256, "k": 4, "seeds": [0]}"#).unwrap();
        assert_eq!(s.d, 1);
        assert_eq!(s.signal_model, SignalModel::ExactSparse);
        assert!(
            ExperimentSpec::from_json(r#"{"n": 256, "k": 4, "seeds": [0], "bogus": 1}"#).is_err()
        );
    }

    #[test]
    fn validation() {
        let mut s = exact(4);
        s.seeds.clear();
        assert!(s.validate().is_err());
        let mut s = exact(4);
        s.n = 1000;
        assert!(s.validate().is_err());
    }
}
