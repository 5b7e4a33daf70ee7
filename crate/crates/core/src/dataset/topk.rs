use serde::{Deserialize, Serialize};

use super::DatasetMatrix;
use crate::error::{Error, Result};
use crate::exact;

/// Indicator of exactly `k` columns out of `d`, stored as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TopKRepr")]
pub struct TopKVector {
    d: usize,
    selected: Vec<usize>,
}

#[derive(Deserialize)]
struct TopKRepr {
    d: usize,
    selected: Vec<usize>,
}

impl TryFrom<TopKRepr> for TopKVector {
    type Error = Error;

    fn try_from(r: TopKRepr) -> Result<Self> {
        Self::new(r.d, r.selected)
    }
}

impl TopKVector {
    /// Validates that the indices are distinct and lie in `[0, d)`.
    pub fn new(d: usize, mut selected: Vec<usize>) -> Result<Self> {
        selected.sort_unstable();
        if let Some(&j) = selected.iter().find(|&&j| j >= d) {
            return Err(Error::InvalidVector(format!("index {j} out of range for d = {d}")));
        }
        if selected.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidVector("duplicate column index".into()));
        }
        Ok(Self { d, selected })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.selected.len()
    }

    /// Selected column indices, ascending.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn contains(&self, j: usize) -> bool {
        self.selected.binary_search(&j).is_ok()
    }

    /// The `{0,1}^d` form.
    pub fn indicator(&self) -> Vec<u8> {
        let mut v = vec![0u8; self.d];
        for &j in &self.selected {
            v[j] = 1;
        }
        v
    }

    pub(crate) fn check_shape(&self, d: usize, k: usize) -> Result<()> {
        if self.d != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: self.d,
            });
        }
        if self.k() != k {
            return Err(Error::InvalidVector(format!(
                "expected {k} selected columns, found {}",
                self.k()
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::InvalidK { k, d });
    }
    Ok(())
}

/// The lexicographically first exact top-k of a sum vector: the first `k`
/// columns in `(-sum, index)` order.
pub fn top_k_from_sums(sums: &[i64], k: usize) -> Result<TopKVector> {
    let d = sums.len();
    check_k(k, d)?;
    // Distinct keys, so selection alone fixes the chosen set.
    let mut keys: Vec<(i64, usize)> = sums.iter().enumerate().map(|(j, &s)| (-s, j)).collect();
    if k < d {
        keys.select_nth_unstable(k - 1);
    }
    let selected = keys[..k].iter().map(|&(_, j)| j).collect();
    TopKVector::new(d, selected)
}

pub fn exact_top_k(x: &DatasetMatrix, k: usize) -> Result<TopKVector> {
    top_k_from_sums(x.col_sums(), k)
}

/// Whether every selected column has `q_j >= q_(k) - alpha`, compared exactly.
pub fn validate_alpha_accurate(x: &DatasetMatrix, k: usize, alpha: f64, t_hat: &TopKVector) -> Result<bool> {
    check_k(k, x.d())?;
    t_hat.check_shape(x.d(), k)?;
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be >= 0")));
    }
    let kth = super::marginals(x).kth_largest_sum(k);
    // s_j >= s_(k) - alpha n  <=>  s_j - s_(k) >= ceil(-alpha n)
    let slack = exact::ceil_mul(-alpha, x.n() as u64);
    let sums = x.col_sums();
    Ok(t_hat.selected().iter().all(|&j| (sums[j] - kth) as i128 >= slack))
}
