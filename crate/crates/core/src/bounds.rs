//! Closed-form tail bounds, regime checks and the DP-violation witness.
//!
//! Several results carry universal constants that are never pinned down
//! numerically (the anticoncentration constant and the constants bounding
//! `d` against `2^n` and `k` against `d`). Those conditions are reported as
//! advisories rather than evaluated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn clamp_prob(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn check_rho(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must lie in (0, 1)")));
    }
    Ok(-rho.ln())
}

/// `P[Z - E Z >= nu] <= exp(-nu^2 n / 2)` for the mean `Z` of `n`
/// independent ±1 variables.
pub fn hoeffding_tail(nu: f64, n: u64) -> Result<f64> {
    if nu.is_nan() || nu <= 0.0 {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be > 0")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(clamp_prob((-0.5 * nu * nu * n as f64).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffBounds {
    /// `P[Z >= (1 + nu) mu] <= exp(-nu^2 mu / (2 + nu))`
    pub upper_tail: f64,
    /// `P[Z <= (1 - nu) mu] <= exp(-nu^2 mu / 2)`; only for `nu in (0, 1)`.
    pub lower_tail: Option<f64>,
}

pub fn chernoff_bounds(nu: f64, mu: f64) -> Result<ChernoffBounds> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidParameter(format!("mu = {mu} must be > 0")));
    }
    if nu.is_nan() || nu <= 0.0 {
        return Err(Error::InvalidParameter(format!("nu = {nu} must be > 0")));
    }
    Ok(ChernoffBounds {
        upper_tail: clamp_prob((-nu * nu * mu / (2.0 + nu)).exp()),
        lower_tail: (nu < 1.0).then(|| clamp_prob((-0.5 * nu * nu * mu).exp())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Validity {
    /// The bound holds only for `nu` inside a window set by an unknown constant.
    Unverified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiConcentration {
    pub value: f64,
    pub validity: Validity,
}

/// `exp(-(1 + beta) nu^2 n / 2)`, the anticoncentration lower bound on
/// `P[Z >= nu]`. Its range of validity depends on a constant with no known
/// value, so the result is always flagged unverified.
pub fn anticonc_lower(beta: f64, nu: f64, n: u64) -> Result<AntiConcentration> {
    if (beta.is_nan() || beta <= 0.0) || (nu.is_nan() || nu <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} and nu = {nu} must both be > 0"
        )));
    }
    Ok(AntiConcentration {
        value: clamp_prob((-0.5 * (1.0 + beta) * nu * nu * n as f64).exp()),
        validity: Validity::Unverified,
    })
}

const EXACT_ADVISORIES: [&str; 2] = [
    "d <= 2^(C n) for an unspecified universal constant C",
    "k <= C d for an unspecified universal constant C",
];

/// The exact-top-k tracing regime `k ln(d/2k) >= 8 n ln(1/rho)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRegime {
    pub n: u64,
    pub d: u64,
    pub k: u64,
    pub rho: f64,
    /// `k ln(d / 2k)`
    pub lhs: f64,
    /// `8 n ln(1/rho)`
    pub rhs: f64,
    pub satisfied: bool,
    /// `sqrt(ln(d / 2k) / n)`, the high-probability floor on `q_(k)`.
    pub gamma: f64,
    /// `sqrt(2 k ln(1/rho))`
    pub tau: f64,
    /// `k gamma - tau`, the completeness margin; `>= tau` when satisfied.
    pub completeness_margin: f64,
    /// `rho + exp(-k/4)`, the per-row completeness failure bound.
    pub completeness_failure: f64,
    pub advisories: Vec<String>,
}

pub fn exact_regime_check(n: u64, d: u64, k: u64, rho: f64) -> Result<ExactRegime> {
    let log_inv_rho = check_rho(rho)?;
    if n == 0 || k == 0 || d <= 2 * k {
        return Err(Error::InvalidRegime(format!(
            "need n >= 1 and d > 2k >= 2 (n = {n}, d = {d}, k = {k})"
        )));
    }
    let (nf, df, kf) = (n as f64, d as f64, k as f64);
    let log_ratio = (df / (2.0 * kf)).ln();
    let lhs = kf * log_ratio;
    let rhs = 8.0 * nf * log_inv_rho;
    let gamma = (log_ratio / nf).sqrt();
    let tau = (2.0 * kf * log_inv_rho).sqrt();
    Ok(ExactRegime {
        n,
        d,
        k,
        rho,
        lhs,
        rhs,
        satisfied: lhs >= rhs,
        gamma,
        tau,
        completeness_margin: kf * gamma - tau,
        completeness_failure: clamp_prob(rho + (-kf / 4.0).exp()),
        advisories: EXACT_ADVISORIES.iter().map(|s| s.to_string()).collect(),
    })
}

/// `sqrt(2 / (1 + c / (scale ln(1/rho))))`, the shape shared by the
/// completeness constants.
pub fn completeness_constant(c: f64, log_inv_rho: f64, scale: f64) -> f64 {
    (2.0 / (1.0 + c / (scale * log_inv_rho))).sqrt()
}

/// Constants for tracing from an approximate top-k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyRegimeConstants {
    pub rho: f64,
    pub n: f64,
    pub d: u64,
    pub k: u64,
    /// `e^2 rho`, the fraction of rows allowed to escape tracing.
    pub c: f64,
    /// `sqrt(2 / (1 + c / (8 ln(1/rho))))`
    pub c1: f64,
    /// `c / (2c + 4 ln(1/rho))`
    pub c2: f64,
    /// `sqrt(2 / (1 + c / (4 ln(1/rho))))`
    pub c3: f64,
    /// `C1 - C3`
    pub c5: f64,
    /// `C1 sqrt(ln(2d) / n)`
    pub gamma_n: f64,
    /// `C3 sqrt(ln(2d) / n)`
    pub lambda: f64,
    /// `2d exp(-lambda^2 n / 2)`, the high-probability cap on `#{j : q_j > lambda}`.
    pub d_lambda: f64,
    /// `C3 k sqrt(ln(2d) / n) - sqrt(2 k ln(1/rho))`
    pub tau_c: f64,
    /// `sqrt(2 k ln(1/rho))`
    pub tau: f64,
    /// `C5 sqrt(ln(2d) / n)`, the largest accuracy slack covered.
    pub alpha_max: f64,
    /// `C3^2 k ln(2d) / (8 ln(1/rho))`
    pub n_critical: f64,
    /// `n <= n_critical`
    pub n_condition: bool,
    /// `4k <= (2d)^C2`
    pub k_power_condition: bool,
    /// `2 rho + 2 exp(-k/6)`, completeness failure as stated for the theorem.
    pub theorem_failure: f64,
    /// `2 rho + exp(-k/4) + exp(-k/6)`, as concluded by the lemma.
    pub lemma_failure: f64,
    /// C1 and C3 come out above 1 although the constants are said to lie in (0, 1).
    pub constants_exceed_unit: bool,
    pub advisories: Vec<String>,
}

const NOISY_ADVISORIES: [&str; 2] = [
    "4k <= 4 C4 d for an unspecified universal constant C4",
    "d <= 2^(C4 n) for an unspecified universal constant C4",
];

/// Noisy-regime constants at an integer `n`.
pub fn noisy_constants(rho: f64, n: u64, d: u64, k: u64) -> Result<NoisyRegimeConstants> {
    NoisyRegimeConstants::evaluate(rho, n as f64, d, k)
}

impl NoisyRegimeConstants {
    /// Evaluates every closed form at a real-valued `n`. Requires
    /// `rho in (0, e^-2)` so that `c < 1`.
    pub fn evaluate(rho: f64, n: f64, d: u64, k: u64) -> Result<Self> {
        let log_inv_rho = check_rho(rho)?;
        // c = e^2 rho < 1  <=>  ln(1/rho) > 2
        if log_inv_rho <= 2.0 {
            return Err(Error::InvalidParameter(format!("rho = {rho} must be below e^-2")));
        }
        let c = (2.0 - log_inv_rho).exp();
        if (n.is_nan() || n <= 0.0) || d == 0 || k == 0 {
            return Err(Error::InvalidParameter("n, d and k must be positive".into()));
        }
        let (df, kf) = (d as f64, k as f64);
        let c1 = completeness_constant(c, log_inv_rho, 8.0);
        let c3 = completeness_constant(c, log_inv_rho, 4.0);
        // C1^2 - C3^2 = 2a / ((1 + a)(1 + 2a)) with a = c / (8 ln(1/rho)),
        // divided by C1 + C3; avoids cancellation when c is tiny
        let a = c / (8.0 * log_inv_rho);
        let c5 = 2.0 * a / ((1.0 + a) * (1.0 + 2.0 * a)) / (c1 + c3);
        let c2 = c / (2.0 * c + 4.0 * log_inv_rho);
        let scale = ((2.0 * df).ln() / n).sqrt();
        let lambda = c3 * scale;
        let tau = (2.0 * kf * log_inv_rho).sqrt();
        let n_critical = c3 * c3 * kf * (2.0 * df).ln() / (8.0 * log_inv_rho);
        Ok(Self {
            rho,
            n,
            d,
            k,
            c,
            c1,
            c2,
            c3,
            c5,
            gamma_n: c1 * scale,
            lambda,
            d_lambda: 2.0 * df * (-0.5 * lambda * lambda * n).exp(),
            tau_c: c3 * kf * scale - tau,
            tau,
            alpha_max: c5 * scale,
            n_critical,
            n_condition: n <= n_critical,
            k_power_condition: 4.0 * kf <= (2.0 * df).powf(c2),
            theorem_failure: clamp_prob(2.0 * rho + 2.0 * (-kf / 6.0).exp()),
            lemma_failure: clamp_prob(2.0 * rho + (-kf / 4.0).exp() + (-kf / 6.0).exp()),
            constants_exceed_unit: c1 > 1.0 || c3 > 1.0,
            advisories: NOISY_ADVISORIES.iter().map(|s| s.to_string()).collect(),
        })
    }

    /// Constants at the critical sample size `8 n ln(1/rho) = C3^2 k ln(2d)`,
    /// where `tau_c` coincides with the attack threshold.
    pub fn at_critical_n(rho: f64, d: u64, k: u64) -> Result<Self> {
        let log_inv_rho = check_rho(rho)?;
        let c = (2.0 - log_inv_rho).exp();
        let c3 = completeness_constant(c, log_inv_rho, 4.0);
        let n = c3 * c3 * k as f64 * (2.0 * d as f64).ln() / (8.0 * log_inv_rho);
        Self::evaluate(rho, n, d, k)
    }
}

/// Upper end of the ruled-out epsilon range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMax {
    Finite(f64),
    /// Soundness error zero: no finite epsilon is consistent.
    Unbounded,
}

impl EpsilonMax {
    pub fn as_f64(self) -> f64 {
        match self {
            EpsilonMax::Finite(e) => e,
            EpsilonMax::Unbounded => f64::INFINITY,
        }
    }
}

/// Which `(epsilon, delta)` pairs an attack with the given soundness and
/// completeness rules out: every `epsilon < epsilon_max` at this `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpWitness {
    pub rho_sound: f64,
    pub untraced_fraction: f64,
    pub delta: f64,
    pub epsilon_max: Option<EpsilonMax>,
}

/// Applies `e^eps rho + delta < 1 - rho - m/n`.
pub fn dp_witness(rho_sound: f64, untraced_fraction: f64, delta: f64) -> Result<DpWitness> {
    for (name, v) in [
        ("rho_sound", rho_sound),
        ("untraced_fraction", untraced_fraction),
        ("delta", delta),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must lie in [0, 1]")));
        }
    }
    let slack = 1.0 - rho_sound - untraced_fraction - delta;
    let epsilon_max = if rho_sound == 0.0 {
        (slack > 0.0).then_some(EpsilonMax::Unbounded)
    } else if slack > rho_sound {
        Some(EpsilonMax::Finite((slack / rho_sound).ln()))
    } else {
        None
    };
    Ok(DpWitness {
        rho_sound,
        untraced_fraction,
        delta,
        epsilon_max,
    })
}
