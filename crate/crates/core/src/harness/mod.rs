//! Monte Carlo experiment runner.
//!
//! Trial `t` takes all of its randomness from child streams of
//! `(master_seed, t)`, so results do not depend on scheduling. Trials run on
//! the current rayon pool and are collected in trial order.

mod config;
mod report;
mod summary;

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{csv_header, summary_path, write_report, Report, ReportFormat, CSV_HEADER};
pub use summary::{summarize, CorrRowsSummary, ErrorQuantiles, Summary};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{trace_dataset, AttackParams, Decision};
use crate::dataset::{fixed_sum_column_with, marginals, DatasetMatrix, SignVector, TopKVector};
use crate::error::Result;
use crate::mechanisms::{release, MechanismConfig};
use crate::rng::{self, derive_seed, Purpose};

/// A fraction serialized as numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i64,
    pub den: i64,
}

impl From<Ratio<i64>> for Fraction {
    fn from(r: Ratio<i64>) -> Self {
        Self {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl Fraction {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn ratio(self) -> Ratio<i64> {
        Ratio::new(self.num, self.den)
    }
}

/// What one trial produced. Fields a kind does not measure are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u64,
    /// Rows of the dataset the attack declared IN.
    pub traced_count: Option<u64>,
    pub out_sample_decision: Option<Decision>,
    /// `q_(k)`, the k-th largest marginal.
    pub q_k: Option<Fraction>,
    /// `#{j : q_j > lambda}`
    pub count_above: Option<u64>,
    pub release_error: Option<f64>,
    /// Smallest `<x_i, t>` over rows (row sums for `claim-corr-rows`).
    pub inner_min: Option<i64>,
    pub inner_mean: Option<f64>,
    /// `<y, t>` for the out-of-sample target.
    pub out_sample_inner: Option<i64>,
    /// Per-row flags: traced rows, or the low-row-sum events for
    /// `claim-corr-rows`.
    pub row_flags: Vec<bool>,
}

impl TrialResult {
    fn empty(trial_index: u64) -> Self {
        Self {
            trial_index,
            traced_count: None,
            out_sample_decision: None,
            q_k: None,
            count_above: None,
            release_error: None,
            inner_min: None,
            inner_mean: None,
            out_sample_inner: None,
            row_flags: Vec::new(),
        }
    }
}

/// Runs every trial of `config`. The config is validated before any trial
/// starts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    config.validate()?;
    (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect()
}

/// Runs a single trial; `run_experiment` is this over `0..trials`.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<TrialResult> {
    if config.kind == ExperimentKind::ClaimCorrRows {
        corr_rows_trial(config, trial_index)
    } else {
        dataset_trial(config, trial_index)
    }
}

fn dataset_trial(config: &ExperimentConfig, t: u64) -> Result<TrialResult> {
    let seed = |p| derive_seed(config.master_seed, t, p);
    let (n, d, k) = (config.n, config.d, config.k);
    let x = DatasetMatrix::generate_uniform(n, d, seed(Purpose::Dataset))?;
    let mut out = TrialResult::empty(t);

    out.q_k = Some(marginals(&x).kth_largest(k).into());
    out.count_above = config.lambda.map(|l| crate::dataset::count_above(&x, l) as u64);

    let outcome = release(
        &x,
        k,
        &MechanismConfig {
            mechanism: config.mechanism()?,
            seed: seed(Purpose::Mechanism),
        },
    )?;
    out.release_error = Some(outcome.error);

    if let Some(rho) = config.rho {
        let params = AttackParams::new(k, rho)?;
        let y = SignVector::uniform(d, seed(Purpose::OutSample));
        let report = trace_dataset(&x, &outcome.t_hat, &params, &y)?;
        out.traced_count = Some(report.traced_count as u64);
        out.out_sample_decision = Some(report.out_sample_decision);
        out.inner_min = Some(report.inner_min());
        out.inner_mean = Some(report.inner_mean());
        out.out_sample_inner = Some(report.out_sample_inner);
        out.row_flags = report.decisions.iter().map(|d| d.is_in()).collect();
    }
    Ok(out)
}

/// `k lambda - sqrt(2 k ln(1/rho))`, the row-sum level below which a row of
/// a fixed-sum matrix counts as an event.
pub fn corr_rows_threshold(k: usize, lambda: f64, rho: f64) -> f64 {
    k as f64 * lambda - (2.0 * k as f64 * (1.0 / rho).ln()).sqrt()
}

fn corr_rows_trial(config: &ExperimentConfig, t: u64) -> Result<TrialResult> {
    let (n, k) = (config.n, config.k);
    let s = config.corr_rows_sum()?;
    let lambda = config.lambda.unwrap_or_default();
    let rho = config.rho.unwrap_or_default();
    let mut r = rng::stream(derive_seed(config.master_seed, t, Purpose::Columns));
    let columns: Vec<_> = (0..k).map(|_| fixed_sum_column_with(&mut r, n, s)).collect();
    let x = DatasetMatrix::from_columns(&columns)?;
    let row_sums = x.row_inner_products(&TopKVector::new(k, (0..k).collect())?)?;
    let threshold = corr_rows_threshold(k, lambda, rho);

    let mut out = TrialResult::empty(t);
    out.inner_min = row_sums.iter().copied().min();
    out.inner_mean = Some(row_sums.iter().sum::<i64>() as f64 / n as f64);
    out.row_flags = row_sums.iter().map(|&v| (v as f64) < threshold).collect();
    Ok(out)
}
