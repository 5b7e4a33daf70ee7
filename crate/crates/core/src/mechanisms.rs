//! Top-k release mechanisms.
//!
//! * [`Mechanism::Exact`] returns the lexicographically first exact top-k.
//! * [`Mechanism::ExpMechPeeling`] runs the exponential mechanism `k` times
//!   without replacement, each round with budget `epsilon / k`, utility
//!   `q_j` and sensitivity `2 / n`. A column is picked in a round with
//!   probability proportional to `exp((epsilon / k) * q_j * n / 4)`.
//! * [`Mechanism::Adversarial`] returns an `alpha`-accurate top-k chosen to
//!   keep one target row from being traced.
//!
//! Peeling is sampled with the Gumbel-max trick: adding independent
//! standard Gumbel noise to every log-weight and keeping the `k` largest
//! perturbed scores gives exactly the same distribution over selected sets
//! as `k` sequential exponential-mechanism draws without replacement.

use std::fmt;

use num_rational::Ratio;
use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::topk::check_k;
use crate::dataset::{exact_top_k, marginals, DatasetMatrix, TopKVector};
use crate::error::{Error, Result};
use crate::exact;
use crate::rng;

/// Privacy budget for the peeling mechanism. `Noiseless` is the
/// zero-noise limit and releases the exact top-k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BudgetRepr", into = "BudgetRepr")]
pub enum Budget {
    Noiseless,
    Epsilon(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BudgetRepr {
    Number(f64),
    Word(String),
}

impl TryFrom<BudgetRepr> for Budget {
    type Error = String;

    fn try_from(r: BudgetRepr) -> Result<Self, String> {
        match r {
            BudgetRepr::Number(e) => Ok(Budget::Epsilon(e)),
            BudgetRepr::Word(w) if w == "noiseless" => Ok(Budget::Noiseless),
            BudgetRepr::Word(w) => Err(format!("expected a number or \"noiseless\", found {w:?}")),
        }
    }
}

impl From<Budget> for BudgetRepr {
    fn from(b: Budget) -> Self {
        match b {
            Budget::Noiseless => BudgetRepr::Word("noiseless".into()),
            Budget::Epsilon(e) => BudgetRepr::Number(e),
        }
    }
}

impl Budget {
    pub fn validate(self) -> Result<Self> {
        match self {
            Budget::Epsilon(e) if !(e.is_finite() && e > 0.0) => Err(Error::InvalidBudget(e)),
            b => Ok(b),
        }
    }
}

impl std::str::FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "noiseless" {
            return Ok(Budget::Noiseless);
        }
        s.parse::<f64>()
            .map(Budget::Epsilon)
            .map_err(|_| Error::InvalidParameter(format!("bad epsilon {s:?}")))
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Noiseless => f.write_str("noiseless"),
            Budget::Epsilon(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Exact,
    #[serde(alias = "exp-mech-peeling")]
    Expmech,
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mechanism {
    Exact,
    #[serde(rename = "expmech")]
    ExpMechPeeling {
        epsilon: Budget,
    },
    Adversarial {
        alpha: f64,
        target_row: usize,
    },
}

impl Mechanism {
    pub fn kind(&self) -> MechanismKind {
        match self {
            Mechanism::Exact => MechanismKind::Exact,
            Mechanism::ExpMechPeeling { .. } => MechanismKind::Expmech,
            Mechanism::Adversarial { .. } => MechanismKind::Adversarial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub mechanism: Mechanism,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseOutcome {
    pub t_hat: TopKVector,
    pub mechanism: MechanismConfig,
    /// `release_error` of `t_hat`.
    pub error: f64,
}

/// Runs the configured mechanism on `x`.
pub fn release(x: &DatasetMatrix, k: usize, config: &MechanismConfig) -> Result<ReleaseOutcome> {
    let t_hat = match config.mechanism {
        Mechanism::Exact => exact_top_k(x, k)?,
        Mechanism::ExpMechPeeling { epsilon } => peeling_selection(x, k, epsilon, config.seed)?,
        Mechanism::Adversarial { alpha, target_row } => adversarial_selection(x, k, alpha, target_row)?,
    };
    let error = release_error(x, k, &t_hat)?;
    Ok(ReleaseOutcome {
        t_hat,
        mechanism: *config,
        error,
    })
}

pub fn exp_mech_peeling(x: &DatasetMatrix, k: usize, epsilon: Budget, seed: u64) -> Result<ReleaseOutcome> {
    release(
        x,
        k,
        &MechanismConfig {
            mechanism: Mechanism::ExpMechPeeling { epsilon },
            seed,
        },
    )
}

pub fn adversarial_topk(
    x: &DatasetMatrix,
    k: usize,
    alpha: f64,
    target_row: usize,
    seed: u64,
) -> Result<ReleaseOutcome> {
    release(
        x,
        k,
        &MechanismConfig {
            mechanism: Mechanism::Adversarial { alpha, target_row },
            seed,
        },
    )
}

/// Log-weight of one unit of column sum in a single peeling round.
pub fn peeling_log_weight_per_unit(epsilon: f64, k: usize) -> f64 {
    epsilon / (4.0 * k as f64)
}

fn peeling_selection(x: &DatasetMatrix, k: usize, epsilon: Budget, seed: u64) -> Result<TopKVector> {
    check_k(k, x.d())?;
    let epsilon = match epsilon.validate()? {
        Budget::Noiseless => return exact_top_k(x, k),
        Budget::Epsilon(e) => e,
    };
    let per_unit = peeling_log_weight_per_unit(epsilon, k);
    let mut rng = rng::stream(seed);
    let mut scored: Vec<(f64, usize)> = x
        .col_sums()
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let u: f64 = rng.sample(Open01);
            (per_unit * s as f64 - (-u.ln()).ln(), j)
        })
        .collect();
    let by_score = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_score);
    }
    TopKVector::new(x.d(), scored[..k].iter().map(|&(_, j)| j).collect())
}

fn adversarial_selection(x: &DatasetMatrix, k: usize, alpha: f64, target_row: usize) -> Result<TopKVector> {
    check_k(k, x.d())?;
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be >= 0")));
    }
    if target_row >= x.n() {
        return Err(Error::InvalidParameter(format!(
            "target_row = {target_row} out of range for n = {}",
            x.n()
        )));
    }
    let kth = marginals(x).kth_largest_sum(k);
    let slack = exact::ceil_mul(-alpha, x.n() as u64);
    // Eligible columns are exactly those any alpha-accurate vector may use;
    // the k largest always qualify.
    let mut eligible: Vec<(i8, usize)> = x
        .col_sums()
        .iter()
        .enumerate()
        .filter(|&(_, &s)| (s - kth) as i128 >= slack)
        .map(|(j, _)| (x.entry(target_row, j), j))
        .collect();
    debug_assert!(eligible.len() >= k);
    eligible.sort_unstable();
    TopKVector::new(x.d(), eligible[..k].iter().map(|&(_, j)| j).collect())
}

/// `max(0, q_(k) - min_{j in t_hat} q_j)` as an exact fraction.
pub fn release_error_exact(x: &DatasetMatrix, k: usize, t_hat: &TopKVector) -> Result<Ratio<i64>> {
    check_k(k, x.d())?;
    t_hat.check_shape(x.d(), k)?;
    let kth = marginals(x).kth_largest_sum(k);
    let sums = x.col_sums();
    let min = t_hat.selected().iter().map(|&j| sums[j]).min().unwrap_or(kth);
    Ok(Ratio::new((kth - min).max(0), x.n() as i64))
}

/// `max(0, q_(k) - min_{j in t_hat} q_j)`; zero iff `t_hat` is 0-accurate.
pub fn release_error(x: &DatasetMatrix, k: usize, t_hat: &TopKVector) -> Result<f64> {
    let e = release_error_exact(x, k, t_hat)?;
    Ok(*e.numer() as f64 / *e.denom() as f64)
}
