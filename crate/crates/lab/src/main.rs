use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfft_core::hashing::{acquire_measurements, AcquisitionParams};
use sfft_core::recovery::Plan;
use sfft_core::RecoveryParams;
use sfft_lab::dump::Dump;
use sfft_lab::experiment::{run_experiment, ExperimentSpec, RunRecord};
use sfft_lab::output::{summarize, write_records, write_sidecar, write_summary};
use sfft_lab::signal::{generate_signal, SignalSpec};
use sfft_lab::{acceptance, LabError};

#[derive(Parser)]
#[command(
    name = "sfft-lab",
    version,
    about = "Experiments and self-checks for the sparse FFT"
)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "SFFT_LAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of a JSON experiment spec.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run a spec once per value of one parameter.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// A top-level spec field (`k`, `n`, `snr`, ...) or an override (`r_max`, ...).
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run the acceptance checks; exits nonzero if any fails.
    Selftest {
        /// Only run these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
    /// Write the location measurements of one seeded instance to a binary file.
    Dump {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_spec(path: &Path) -> anyhow::Result<ExperimentSpec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec =
        ExperimentSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    spec.validate()?;
    Ok(spec)
}

fn with_param(spec: &ExperimentSpec, param: &str, value: &str) -> anyhow::Result<ExperimentSpec> {
    let mut json = serde_json::to_value(spec)?;
    let parsed: serde_json::Value = serde_json::from_str(value)
        .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
    if json.get(param).is_some() && param != "overrides" {
        json[param] = parsed;
    } else if json["overrides"].get(param).is_some() {
        json["overrides"][param] = parsed;
    } else {
        bail!("unknown parameter {param}");
    }
    let spec: ExperimentSpec =
        serde_json::from_value(json).with_context(|| format!("{param} = {value}"))?;
    spec.validate()?;
    Ok(spec)
}

fn emit(
    out: &Path,
    stem: &str,
    specs: &[ExperimentSpec],
    records: &[RunRecord],
) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let csv = out.join(format!("{stem}.csv"));
    write_records(&csv, records)?;
    for spec in specs {
        let count = records
            .iter()
            .filter(|r| r.spec_hash == spec.hash())
            .count();
        write_sidecar(&out.join(format!("{}.json", spec.hash())), spec, count)?;
    }
    write_summary(
        &out.join(format!("{stem}_summary.csv")),
        &summarize(records),
    )?;
    let failed = records.iter().filter(|r| r.status != "ok").count();
    println!(
        "{} runs ({failed} failed) -> {}",
        records.len(),
        csv.display()
    );
    Ok(())
}

fn selftest(only: &[u32]) -> bool {
    let mut all = true;
    for (id, _, _) in acceptance::CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let result = acceptance::run_criterion(id).expect("listed criterion");
        println!("{result}");
        all &= result.passed;
    }
    all
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    match cli.command {
        Command::Run { spec, out } => {
            let spec = load_spec(&spec)?;
            let records = run_experiment(&spec)?;
            emit(&out, &spec.hash(), std::slice::from_ref(&spec), &records)?;
        }
        Command::Sweep {
            spec,
            param,
            values,
            out,
        } => {
            let base = load_spec(&spec)?;
            let specs = values
                .iter()
                .map(|v| with_param(&base, &param, v))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut records = Vec::new();
            for s in &specs {
                records.extend(run_experiment(s)?);
            }
            emit(
                &out,
                &format!("sweep_{param}_{}", base.hash()),
                &specs,
                &records,
            )?;
        }
        Command::Selftest { only } => {
            return Ok(if selftest(&only) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Dump { spec, seed, out } => {
            let spec = load_spec(&spec)?;
            let grid = spec.validate()?;
            let signal = SignalSpec {
                grid,
                k: spec.k,
                model: spec.signal_model,
                snr: spec.snr,
                tail_energy: spec.tail_energy,
            };
            let generated = generate_signal(&signal, seed)?;
            let mut params = RecoveryParams::new(spec.k, spec.epsilon, 1.0, generated.mu, seed);
            params.buckets = spec.overrides.buckets;
            params.sharpness = spec.overrides.sharpness;
            params.r_max = spec.overrides.r_max;
            params.c_max = spec.overrides.c_max;
            let plan = Plan::new(grid, &params).map_err(LabError::from)?;
            let acquisition = AcquisitionParams {
                buckets: plan.buckets,
                sharpness: plan.sharpness,
                r_max: plan.r_max,
                c_max: plan.c_max,
                precision: plan.constants.precision,
            };
            let mset = acquire_measurements(
                &generated.xhat,
                &acquisition,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )
            .map_err(LabError::from)?;
            Dump::from_measurements(&mset, seed).save(&out)?;
            println!(
                "{} tables -> {}",
                mset.raw_tables().len() / plan.buckets,
                out.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
