use serde::{Deserialize, Serialize};

use super::{corr_rows_threshold, ExperimentConfig, ExperimentKind, TrialResult};
use crate::bounds::{dp_witness, DpWitness};
use crate::error::{Error, Result};
use crate::exact;

const PROTOCOL: &str = "Each trial derives independent random streams from \
(master_seed, trial_index, purpose). Dataset kinds draw a fresh uniform n x d \
matrix X and, when rho is set, a fresh uniform out-of-sample target y; the \
configured mechanism releases a top-k vector from X, and the inner-product \
attack is applied to every row of X and to y. claim-corr-rows draws k \
independent fixed-sum columns per trial. Per-row rates pool all trials; rates \
are exact ratios of integer counters.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorQuantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRowsSummary {
    /// Column sum actually used (`lambda n` rounded up to the parity of `n`).
    pub realized_sum: i64,
    pub event_threshold: f64,
    pub single_rate_max: f64,
    pub single_rate_mean: f64,
    pub pair_rate_max: f64,
    pub pair_rate_mean: f64,
    pub pairs_tested: u64,
    /// `rho^2`, the bound on any pair's joint rate.
    pub pair_bound: f64,
}

/// Aggregates over all trials of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub protocol: String,
    pub trials: u64,

    pub out_sample_in_count: Option<u64>,
    pub in_rate_out_sample: Option<f64>,
    pub out_sample_inner_mean: Option<f64>,
    pub out_sample_inner_variance: Option<f64>,

    pub mean_traced_fraction: Option<f64>,
    pub row_traced_rates: Vec<f64>,
    pub row_traced_rate_min: Option<f64>,
    pub row_traced_rate_median: Option<f64>,
    pub target_row_traced_rate: Option<f64>,
    pub other_rows_traced_rate: Option<f64>,

    /// `sqrt(ln(d / 2k) / n)`, when `d > 2k`.
    pub gamma: Option<f64>,
    pub q_k_failures: Option<u64>,
    pub q_k_failure_rate: Option<f64>,

    /// `2d exp(-lambda^2 n / 2)`
    pub d_lambda: Option<f64>,
    pub count_above_violations: Option<u64>,
    pub count_above_violation_rate: Option<f64>,

    pub corr_rows: Option<CorrRowsSummary>,
    pub release_error: Option<ErrorQuantiles>,
    /// Derived from the out-of-sample IN rate and the untraced fraction, at
    /// `delta = 0`.
    pub witness: Option<DpWitness>,
}

fn rate(count: u64, total: u64) -> f64 {
    count as f64 / total as f64
}

/// Nearest-rank quantile of a sorted slice.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Neumaier-compensated sum, taken in slice order.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

fn quantiles(mut values: Vec<f64>) -> ErrorQuantiles {
    let mean = compensated_sum(values.iter().copied()) / values.len() as f64;
    values.sort_by(f64::total_cmp);
    ErrorQuantiles {
        min: values[0],
        q25: nearest_rank(&values, 0.25),
        median: nearest_rank(&values, 0.5),
        q75: nearest_rank(&values, 0.75),
        q90: nearest_rank(&values, 0.9),
        max: values[values.len() - 1],
        mean,
    }
}

/// Builds the summary of `results`, which must come from `config`.
pub fn summarize(results: &[TrialResult], config: &ExperimentConfig) -> Result<Summary> {
    if results.is_empty() {
        return Err(Error::InvalidParameter("cannot summarize zero trials".into()));
    }
    let trials = results.len() as u64;
    let n = config.n;
    let flag_len = results[0].row_flags.len();
    if results.iter().any(|r| r.row_flags.len() != flag_len) {
        return Err(Error::InvalidParameter("trials disagree on the number of rows".into()));
    }

    let mut s = Summary {
        config: config.clone(),
        protocol: PROTOCOL.to_string(),
        trials,
        out_sample_in_count: None,
        in_rate_out_sample: None,
        out_sample_inner_mean: None,
        out_sample_inner_variance: None,
        mean_traced_fraction: None,
        row_traced_rates: Vec::new(),
        row_traced_rate_min: None,
        row_traced_rate_median: None,
        target_row_traced_rate: None,
        other_rows_traced_rate: None,
        gamma: None,
        q_k_failures: None,
        q_k_failure_rate: None,
        d_lambda: None,
        count_above_violations: None,
        count_above_violation_rate: None,
        corr_rows: None,
        release_error: None,
        witness: None,
    };

    let decisions: Option<Vec<_>> = results.iter().map(|r| r.out_sample_decision).collect();
    if let Some(decisions) = decisions {
        let ins = decisions.iter().filter(|d| d.is_in()).count() as u64;
        s.out_sample_in_count = Some(ins);
        s.in_rate_out_sample = Some(rate(ins, trials));
    }

    let inners: Option<Vec<i64>> = results.iter().map(|r| r.out_sample_inner).collect();
    if let Some(inners) = inners {
        let sum: i128 = inners.iter().map(|&v| v as i128).sum();
        let sq: i128 = inners.iter().map(|&v| (v as i128) * (v as i128)).sum();
        let t = trials as i128;
        s.out_sample_inner_mean = Some(sum as f64 / trials as f64);
        if trials > 1 {
            // (T sum x^2 - (sum x)^2) / (T (T - 1)), exact up to the final division
            let num = t * sq - sum * sum;
            s.out_sample_inner_variance = Some(num as f64 / (t * (t - 1)) as f64);
        }
    }

    let traced: Option<Vec<u64>> = results.iter().map(|r| r.traced_count).collect();
    if let Some(traced) = traced {
        let total: u64 = traced.iter().sum();
        s.mean_traced_fraction = Some(rate(total, trials * n as u64));

        let mut per_row = vec![0u64; flag_len];
        for r in results {
            for (c, &f) in per_row.iter_mut().zip(&r.row_flags) {
                *c += u64::from(f);
            }
        }
        let rates: Vec<f64> = per_row.iter().map(|&c| rate(c, trials)).collect();
        let mut sorted = rates.clone();
        sorted.sort_by(f64::total_cmp);
        s.row_traced_rate_min = sorted.first().copied();
        s.row_traced_rate_median = (!sorted.is_empty()).then(|| nearest_rank(&sorted, 0.5));
        if let Some(target) = config.target_row.filter(|&r| r < flag_len) {
            s.target_row_traced_rate = Some(rates[target]);
            if flag_len > 1 {
                let others: u64 = per_row.iter().sum::<u64>() - per_row[target];
                s.other_rows_traced_rate = Some(rate(others, trials * (flag_len as u64 - 1)));
            }
        }
        s.row_traced_rates = rates;
    }

    if config.kind.uses_uniform_dataset() && config.d > 2 * config.k {
        let gamma = ((config.d as f64 / (2.0 * config.k as f64)).ln() / n as f64).sqrt();
        let q_ks: Option<Vec<_>> = results.iter().map(|r| r.q_k).collect();
        if let Some(q_ks) = q_ks {
            // q_(k) < gamma  <=>  not (num >= gamma * den)
            let failures = q_ks
                .iter()
                .filter(|q| !exact::int_ge_scaled(q.num, gamma, q.den as u64))
                .count() as u64;
            s.q_k_failures = Some(failures);
            s.q_k_failure_rate = Some(rate(failures, trials));
        }
        s.gamma = Some(gamma);
    }

    if let Some(lambda) = config.lambda.filter(|_| config.kind.uses_uniform_dataset()) {
        let d_lambda = 2.0 * config.d as f64 * (-0.5 * lambda * lambda * n as f64).exp();
        let counts: Option<Vec<u64>> = results.iter().map(|r| r.count_above).collect();
        if let Some(counts) = counts {
            let violations = counts.iter().filter(|&&c| c as f64 > d_lambda).count() as u64;
            s.count_above_violations = Some(violations);
            s.count_above_violation_rate = Some(rate(violations, trials));
        }
        s.d_lambda = Some(d_lambda);
    }

    if config.kind == ExperimentKind::ClaimCorrRows {
        s.corr_rows = Some(corr_rows_summary(results, config, flag_len)?);
    }

    let errors: Option<Vec<f64>> = results.iter().map(|r| r.release_error).collect();
    if let Some(errors) = errors {
        s.release_error = Some(quantiles(errors));
    }

    if let (Some(in_rate), Some(traced)) = (s.in_rate_out_sample, s.mean_traced_fraction) {
        s.witness = Some(dp_witness(in_rate, 1.0 - traced, 0.0)?);
    }
    Ok(s)
}

fn corr_rows_summary(results: &[TrialResult], config: &ExperimentConfig, rows: usize) -> Result<CorrRowsSummary> {
    let trials = results.len() as u64;
    let rho = config.rho.unwrap_or_default();
    let mut single = vec![0u64; rows];
    let mut pairs = vec![0u64; rows * rows];
    let mut hit = Vec::with_capacity(rows);
    for r in results {
        hit.clear();
        hit.extend(r.row_flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i));
        for (a, &i) in hit.iter().enumerate() {
            single[i] += 1;
            for &j in &hit[a + 1..] {
                pairs[i * rows + j] += 1;
            }
        }
    }
    let pair_counts: Vec<u64> = (0..rows)
        .flat_map(|i| (i + 1..rows).map(move |j| (i, j)))
        .map(|(i, j)| pairs[i * rows + j])
        .collect();
    let pairs_tested = pair_counts.len() as u64;
    let max_of = |v: &[u64]| v.iter().copied().max().unwrap_or(0);
    Ok(CorrRowsSummary {
        realized_sum: config.corr_rows_sum()?,
        event_threshold: corr_rows_threshold(config.k, config.lambda.unwrap_or_default(), rho),
        single_rate_max: rate(max_of(&single), trials),
        single_rate_mean: rate(single.iter().sum(), trials * rows.max(1) as u64),
        pair_rate_max: rate(max_of(&pair_counts), trials),
        pair_rate_mean: if pairs_tested == 0 {
            0.0
        } else {
            rate(pair_counts.iter().sum(), trials * pairs_tested)
        },
        pairs_tested,
        pair_bound: rho * rho,
    })
}
