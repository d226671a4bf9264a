//! Random-environment studies over Ginibre-distributed `C = W W^dagger`.
//!
//! Sample `k` of a scan with master seed `s` is drawn from the stream
//! `derive_seed(s, k)`, so every record depends only on `(s, k, n)`. Drivers
//! may evaluate [`sample_record`] in any order or in parallel.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::model::{rank_proxy, rel_imag_norm, sample_ginibre, Coefficients, DephasingModel};
use crate::pt::{neg_tolerance, witness, witness_all, Bipartition};
use crate::rng::derive_seed;

pub const DEFAULT_BIN_WIDTH: f64 = 0.02;
/// Qubit counts accepted by [`fraction_vs_n`].
pub const FRACTION_N_RANGE: (usize, usize) = (3, 50);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionChoice {
    /// `A = {0}`.
    FirstQubit,
    /// Minimum over every bipartition.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    RelImagNorm,
    RankProxy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub n: usize,
    pub n_samples: usize,
    pub master_seed: u64,
    pub partition: PartitionChoice,
    pub bin_width: f64,
}

impl ScanConfig {
    pub fn new(n: usize, n_samples: usize, master_seed: u64) -> Self {
        Self { n, n_samples, master_seed, partition: PartitionChoice::FirstQubit, bin_width: DEFAULT_BIN_WIDTH }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("ensemble scans need n >= 2"));
        }
        if self.n_samples == 0 {
            return Err(invalid("need at least one sample"));
        }
        if !(self.bin_width > 0.0 && self.bin_width <= 1.0) {
            return Err(invalid("bin width must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleRecord {
    pub index: usize,
    /// Rel-imag norm or rank proxy, depending on the scan.
    pub metric: f64,
    pub lambda_min: f64,
    /// Threshold the flag was judged against: `lambda_min < -threshold`.
    pub threshold: f64,
    pub entangling: bool,
}

fn metric_of(model: &DephasingModel, metric: Metric) -> Result<f64> {
    match metric {
        Metric::RelImagNorm => rel_imag_norm(model),
        Metric::RankProxy => rank_proxy(model),
    }
}

/// Draws sample `index` of the scan and evaluates it.
pub fn sample_record(cfg: &ScanConfig, metric: Metric, index: usize) -> Result<EnsembleRecord> {
    let model = sample_ginibre(cfg.n, derive_seed(cfg.master_seed, index as u64))?;
    let lambda_min = match cfg.partition {
        PartitionChoice::FirstQubit => witness(&model, Bipartition::first_qubit(cfg.n)?)?,
        PartitionChoice::All => witness_all(&model)?.lambda_min,
    };
    let threshold = neg_tolerance(model.c());
    Ok(EnsembleRecord {
        index,
        metric: metric_of(&model, metric)?,
        lambda_min,
        threshold,
        entangling: lambda_min < -threshold,
    })
}

fn run(cfg: &ScanConfig, metric: Metric) -> Result<Vec<EnsembleRecord>> {
    cfg.validate()?;
    (0..cfg.n_samples).map(|k| sample_record(cfg, metric, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub entangling: usize,
}

impl Bin {
    /// `None` for an empty bin.
    pub fn fraction(&self) -> Option<f64> {
        (self.count > 0).then(|| self.entangling as f64 / self.count as f64)
    }
}

/// Bins on `[0, 1]` of width `bin_width` (the last one absorbs any
/// remainder and the right endpoint).
pub fn bin_fractions(records: &[EnsembleRecord], bin_width: f64) -> Result<Vec<Bin>> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(invalid("bin width must lie in (0, 1]"));
    }
    let count = ((1.0 / bin_width) - 1e-9).ceil().max(1.0) as usize;
    let mut bins: Vec<Bin> = (0..count)
        .map(|b| Bin {
            lo: b as f64 * bin_width,
            hi: if b + 1 == count { 1.0 } else { (b + 1) as f64 * bin_width },
            count: 0,
            entangling: 0,
        })
        .collect();
    for r in records {
        if !(0.0..=1.0).contains(&r.metric) {
            return Err(invalid(alloc::format!("metric {} outside [0, 1]", r.metric)));
        }
        let b = ((r.metric / bin_width).floor() as usize).min(count - 1);
        bins[b].count += 1;
        bins[b].entangling += usize::from(r.entangling);
    }
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Scan {
    pub records: Vec<EnsembleRecord>,
    pub bins: Vec<Bin>,
}

/// Three-qubit scan of the witness against the relative imaginary norm.
pub fn fig2_scan(cfg: &ScanConfig) -> Result<Fig2Scan> {
    if cfg.n != 3 {
        return Err(invalid("the imaginary-norm scan is defined for n = 3"));
    }
    let records = run(cfg, Metric::RelImagNorm)?;
    let bins = bin_fractions(&records, cfg.bin_width)?;
    Ok(Fig2Scan { records, bins })
}

/// Witness against the rank proxy.
pub fn fig3_scan(cfg: &ScanConfig) -> Result<Vec<EnsembleRecord>> {
    run(cfg, Metric::RankProxy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionPoint {
    pub n: usize,
    pub f: f64,
    /// Binomial standard error `sqrt(f (1 - f) / samples)`.
    pub stderr: f64,
}

impl FractionPoint {
    pub fn from_records(n: usize, records: &[EnsembleRecord]) -> Self {
        let m = records.len() as f64;
        let f = records.iter().filter(|r| r.entangling).count() as f64 / m;
        Self { n, f, stderr: (f * (1.0 - f) / m).sqrt() }
    }
}

pub fn check_fraction_range(n_min: usize, n_max: usize) -> Result<()> {
    let (lo, hi) = FRACTION_N_RANGE;
    if n_min < lo || n_max > hi || n_min > n_max {
        return Err(invalid(alloc::format!("qubit range must satisfy {lo} <= nmin <= nmax <= {hi}")));
    }
    Ok(())
}

/// Fraction of entangling samples (first-qubit witness) for each `n` in
/// `n_min..=n_max`.
pub fn fraction_vs_n(n_min: usize, n_max: usize, n_samples: usize, seed: u64) -> Result<Vec<FractionPoint>> {
    check_fraction_range(n_min, n_max)?;
    (n_min..=n_max)
        .map(|n| {
            let records = run(&ScanConfig::new(n, n_samples, seed), Metric::RankProxy)?;
            Ok(FractionPoint::from_records(n, &records))
        })
        .collect()
}

/// Largest bin fraction, ignoring empty bins.
pub fn peak_fraction(bins: &[Bin]) -> Result<f64> {
    bins.iter().filter_map(Bin::fraction).reduce(f64::max).ok_or(Error::Undefined("no populated bins"))
}
