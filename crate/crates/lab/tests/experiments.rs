use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfft_core::hashing::{acquire_measurements, AcquisitionParams};
use sfft_core::Grid;
use sfft_lab::dump::Dump;
use sfft_lab::experiment::{run_experiment, run_seed, ExperimentSpec, Overrides};
use sfft_lab::output::{read_records, summarize, write_records, write_summary};
use sfft_lab::signal::{generate_signal, SignalModel, SignalSpec};

fn spec(k: usize, model: SignalModel, seeds: Vec<u64>) -> ExperimentSpec {
    ExperimentSpec {
        n: 1024,
        d: 1,
        k,
        signal_model: model,
        snr: 12.0,
        epsilon: 0.2,
        tail_energy: 1.0,
        seeds,
        overrides: Overrides::default(),
    }
}

#[test]
fn csv_roundtrip_preserves_records() {
    let records = run_experiment(&spec(6, SignalModel::GaussianTail, vec![1, 2, 3, 4])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    write_records(&path, &records).unwrap();
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("spec_hash,seed,n,d,k,status,l2_error_ratio,"));
    assert_eq!(read_records(&path).unwrap(), records);
}

#[test]
fn summary_has_one_block_per_spec() {
    let mut records = run_experiment(&spec(4, SignalModel::ExactSparse, vec![1, 2])).unwrap();
    records.extend(run_experiment(&spec(8, SignalModel::ExactSparse, vec![1, 2])).unwrap());
    let rows = summarize(&records);
    let hashes: std::collections::BTreeSet<_> = rows.iter().map(|r| r.spec_hash.clone()).collect();
    assert_eq!(hashes.len(), 2);
    let recall: Vec<f64> = rows
        .iter()
        .filter(|r| r.metric == "support_recall" && r.statistic == "mean")
        .map(|r| r.value)
        .collect();
    assert_eq!(recall, vec![1.0, 1.0]);
    let dir = tempfile::tempdir().unwrap();
    write_summary(&dir.path().join("summary.csv"), &rows).unwrap();
}

#[test]
fn identical_spec_and_seed_reproduce() {
    let s = spec(8, SignalModel::GaussianTail, vec![5]);
    let a = run_seed(&s, 5).unwrap();
    let b = run_seed(&s, 5).unwrap();
    assert!(a.same_outcome(&b));
    let c = run_seed(&s, 6).unwrap();
    assert!(!a.same_outcome(&c));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let s = spec(6, SignalModel::GaussianTail, (0..6).collect());
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = serial.install(|| run_experiment(&s)).unwrap();
    let b = wide.install(|| run_experiment(&s)).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)));
}

#[test]
fn samples_grow_with_k() {
    let totals: Vec<u64> = [4, 8, 16, 32]
        .iter()
        .map(|&k| {
            let s = ExperimentSpec {
                n: 4096,
                ..spec(k, SignalModel::ExactSparse, vec![0])
            };
            run_seed(&s, 0).unwrap().samples_total
        })
        .collect();
    assert!(totals.windows(2).all(|w| w[0] < w[1]), "{totals:?}");
}

#[test]
fn sample_components_add_up() {
    for model in [
        SignalModel::ExactSparse,
        SignalModel::GaussianTail,
        SignalModel::AdversarialBucketTail,
    ] {
        for r in run_experiment(&spec(5, model, vec![1, 2])).unwrap() {
            assert_eq!(
                r.samples_total,
                r.samples_location
                    + r.samples_estimation
                    + r.samples_inf_norm
                    + r.samples_const_snr
            );
        }
    }
}

#[test]
fn dump_of_real_measurements_roundtrips() {
    let grid = Grid::new(256, 1).unwrap();
    let g = generate_signal(
        &SignalSpec {
            grid,
            k: 4,
            model: SignalModel::ExactSparse,
            snr: 1.0,
            tail_energy: 0.0,
        },
        3,
    )
    .unwrap();
    let params = AcquisitionParams {
        buckets: 16,
        sharpness: 2,
        r_max: 2,
        c_max: 3,
        precision: 3,
    };
    let mset = acquire_measurements(&g.xhat, &params, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let dump = Dump::from_measurements(&mset, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    dump.save(&path).unwrap();
    let back = Dump::load(&path).unwrap();
    assert_eq!(back, dump);
    assert_eq!(back.header.seed, 3);
    assert_eq!(back.table(1, 2, 4), mset.table(1, 2, 4));
}

#[test]
fn missing_file_error_names_the_path() {
    let err = Dump::load(std::path::Path::new("/nonexistent/dump.bin")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dump.bin"));
}
