use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::mechanisms::{Budget, Mechanism, MechanismKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Soundness,
    Completeness,
    Adversarial,
    ClaimTopkbias,
    ClaimCountAbove,
    ClaimCorrRows,
    MechanismAccuracy,
}

impl ExperimentKind {
    /// Kinds whose trials draw a uniform `n x d` dataset.
    pub fn uses_uniform_dataset(self) -> bool {
        self != ExperimentKind::ClaimCorrRows
    }
}

/// One Monte Carlo experiment. The JSON form uses these field names as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Ignored by `claim-corr-rows`, whose matrices have `k` columns.
    #[serde(default)]
    pub d: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Budget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_row: Option<usize>,
    /// Defaults to `adversarial` for the adversarial kind, `expmech` for
    /// mechanism-accuracy and `exact` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismKind>,
    pub trials: u64,
    pub master_seed: u64,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn require<T: Copy>(&self, value: Option<T>, name: &str) -> Result<T> {
        value.ok_or_else(|| cfg_err(format!("kind {:?} requires `{name}`", self.kind)))
    }

    pub fn mechanism_kind(&self) -> MechanismKind {
        self.mechanism.unwrap_or(match self.kind {
            ExperimentKind::Adversarial => MechanismKind::Adversarial,
            ExperimentKind::MechanismAccuracy => MechanismKind::Expmech,
            _ => MechanismKind::Exact,
        })
    }

    /// The release mechanism for dataset-based kinds.
    pub fn mechanism(&self) -> Result<Mechanism> {
        Ok(match self.mechanism_kind() {
            MechanismKind::Exact => Mechanism::Exact,
            MechanismKind::Expmech => Mechanism::ExpMechPeeling {
                epsilon: self
                    .require(self.epsilon, "epsilon")?
                    .validate()
                    .map_err(|e| cfg_err(e.to_string()))?,
            },
            MechanismKind::Adversarial => Mechanism::Adversarial {
                alpha: self.require(self.alpha, "alpha")?,
                target_row: self.require(self.target_row, "target_row")?,
            },
        })
    }

    /// Column sum used by `claim-corr-rows`: `ceil(lambda n)`, raised to the
    /// parity of `n`.
    pub fn corr_rows_sum(&self) -> Result<i64> {
        let lambda = self.require(self.lambda, "lambda")?;
        let mut s = exact::ceil_mul(lambda, self.n as u64);
        if (s - self.n as i128).rem_euclid(2) != 0 {
            s += 1;
        }
        if s.unsigned_abs() > self.n as u128 {
            return Err(cfg_err(format!(
                "lambda = {lambda} gives column sum {s} outside [-n, n]"
            )));
        }
        Ok(s as i64)
    }

    /// Checks that every parameter the kind needs is present and in range.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        if self.trials == 0 {
            return Err(cfg_err("trials must be at least 1"));
        }
        if self.n == 0 || self.k == 0 {
            return Err(cfg_err("n and k must be at least 1"));
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(cfg_err(format!("rho = {rho} must lie in (0, 1)")));
            }
        }
        if let Some(alpha) = self.alpha {
            if alpha.is_nan() || alpha < 0.0 {
                return Err(cfg_err(format!("alpha = {alpha} must be >= 0")));
            }
        }
        if let Some(lambda) = self.lambda {
            if !(lambda > -1.0 && lambda < 1.0) {
                return Err(cfg_err(format!("lambda = {lambda} must lie in (-1, 1)")));
            }
        }
        if self.kind.uses_uniform_dataset() {
            if self.d == 0 {
                return Err(cfg_err("d must be at least 1"));
            }
            if self.k > self.d {
                return Err(cfg_err(format!("k = {} exceeds d = {}", self.k, self.d)));
            }
            if let Mechanism::Adversarial { target_row, .. } = self.mechanism()? {
                if target_row >= self.n {
                    return Err(cfg_err(format!(
                        "target_row = {target_row} out of range for n = {}",
                        self.n
                    )));
                }
            }
        }
        match self.kind {
            Soundness | Completeness | Adversarial => {
                self.require(self.rho, "rho")?;
            }
            ClaimTopkbias => {
                if self.d <= 2 * self.k {
                    return Err(cfg_err("claim-topkbias needs d > 2k"));
                }
            }
            ClaimCountAbove => {
                self.require(self.lambda, "lambda")?;
            }
            ClaimCorrRows => {
                self.require(self.rho, "rho")?;
                self.corr_rows_sum()?;
            }
            MechanismAccuracy => {}
        }
        if self.kind == Adversarial && self.mechanism_kind() != MechanismKind::Adversarial {
            return Err(cfg_err("kind adversarial needs the adversarial mechanism"));
        }
        Ok(())
    }
}
