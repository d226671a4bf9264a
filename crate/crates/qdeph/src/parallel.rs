//! Thread-parallel drivers for the sampling-heavy operations.
//!
//! Every driver maps over fixed work items (samples, trajectory blocks,
//! bipartitions), collects results in index order, and reduces sequentially,
//! so its output is bit-identical to the sequential core function for any
//! thread count.

use qdeph_core::dynamics::DensityMatrix;
use qdeph_core::ensembles::{
    bin_fractions, check_fraction_range, sample_record, EnsembleRecord, Fig2Scan, FractionPoint, Metric, ScanConfig,
};
use qdeph_core::pt::{enumerate_bipartitions, witness, Bipartition, WitnessOutcome, WITNESS_QUBIT_CAP};
use qdeph_core::verify::{finish_classical_mc, prepare_classical_mc, ClassicalNoise, MonteCarloResult};
use qdeph_core::{Coefficients, DephasingModel, Error, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

/// Pool with `threads` workers, or one per available core.
pub fn pool(threads: Option<usize>) -> std::result::Result<ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()
}

pub fn scan(pool: &ThreadPool, cfg: &ScanConfig, metric: Metric) -> Result<Vec<EnsembleRecord>> {
    cfg.validate()?;
    pool.install(|| (0..cfg.n_samples).into_par_iter().map(|k| sample_record(cfg, metric, k)).collect())
}

pub fn fig2_scan(pool: &ThreadPool, cfg: &ScanConfig) -> Result<Fig2Scan> {
    if cfg.n != 3 {
        return Err(Error::InvalidArgument("the imaginary-norm scan is defined for n = 3".into()));
    }
    let records = scan(pool, cfg, Metric::RelImagNorm)?;
    let bins = bin_fractions(&records, cfg.bin_width)?;
    Ok(Fig2Scan { records, bins })
}

pub fn fig3_scan(pool: &ThreadPool, cfg: &ScanConfig) -> Result<Vec<EnsembleRecord>> {
    scan(pool, cfg, Metric::RankProxy)
}

pub fn fraction_vs_n(
    pool: &ThreadPool,
    n_min: usize,
    n_max: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<FractionPoint>> {
    check_fraction_range(n_min, n_max)?;
    (n_min..=n_max)
        .map(|n| {
            let records = scan(pool, &ScanConfig::new(n, n_samples, seed), Metric::RankProxy)?;
            Ok(FractionPoint::from_records(n, &records))
        })
        .collect()
}

pub fn classical_mc(
    pool: &ThreadPool,
    model: &DephasingModel,
    rho0: &DensityMatrix,
    t: f64,
    n_traj: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    let noise = prepare_classical_mc(model, rho0, t, n_traj)?;
    let sums: Vec<_> = pool.install(|| {
        (0..ClassicalNoise::block_count(n_traj))
            .into_par_iter()
            .map(|b| noise.block_sum(rho0, seed, b, n_traj))
            .collect()
    });
    finish_classical_mc(model, rho0, t, n_traj, sums)
}

/// Witness value for every bipartition representative, in enumeration order.
pub fn witness_each(pool: &ThreadPool, model: &DephasingModel) -> Result<Vec<(Bipartition, f64)>> {
    let n = model.n();
    if n > WITNESS_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: WITNESS_QUBIT_CAP });
    }
    let parts = enumerate_bipartitions(n)?;
    pool.install(|| parts.into_par_iter().map(|p| Ok((p, witness(model, p)?))).collect())
}

/// Same tie-breaking as the sequential search: earliest partition wins.
pub fn witness_all(pool: &ThreadPool, model: &DephasingModel) -> Result<WitnessOutcome> {
    let each = witness_each(pool, model)?;
    let mut best = WitnessOutcome { lambda_min: each[0].1, partition: each[0].0 };
    for &(partition, lambda_min) in &each[1..] {
        if lambda_min < best.lambda_min {
            best = WitnessOutcome { lambda_min, partition };
        }
    }
    Ok(best)
}
