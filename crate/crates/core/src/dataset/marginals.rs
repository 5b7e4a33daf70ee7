use num_rational::Ratio;

use super::DatasetMatrix;
use crate::exact;

/// Column means `q_j = sums[j] / n`, held as exact integer sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalVector {
    n: usize,
    sums: Vec<i64>,
}

pub fn marginals(x: &DatasetMatrix) -> MarginalVector {
    MarginalVector {
        n: x.n(),
        sums: x.col_sums().to_vec(),
    }
}

impl MarginalVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.sums.len()
    }

    pub fn sums(&self) -> &[i64] {
        &self.sums
    }

    /// `q_j` as a reduced fraction.
    pub fn value(&self, j: usize) -> Ratio<i64> {
        Ratio::new(self.sums[j], self.n as i64)
    }

    pub fn value_f64(&self, j: usize) -> f64 {
        self.sums[j] as f64 / self.n as f64
    }

    /// Column indices in sorted order: decreasing sum, ties by increasing
    /// index. `order()[r]` is the column holding the `(r+1)`-th largest
    /// marginal.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.sums.len()).collect();
        idx.sort_by_key(|&j| (std::cmp::Reverse(self.sums[j]), j));
        idx
    }

    /// The `k`-th largest column sum (1-based), `n * q_(k)`.
    pub fn kth_largest_sum(&self, k: usize) -> i64 {
        assert!(k >= 1 && k <= self.sums.len(), "k = {k} out of range");
        let mut sums = self.sums.clone();
        let (_, kth, _) = sums.select_nth_unstable_by(k - 1, |a, b| b.cmp(a));
        *kth
    }

    pub fn kth_largest(&self, k: usize) -> Ratio<i64> {
        Ratio::new(self.kth_largest_sum(k), self.n as i64)
    }

    /// `|{j : q_j > lambda}|` with the comparison done exactly.
    pub fn count_above(&self, lambda: f64) -> usize {
        let bound = exact::floor_mul(lambda, self.n as u64);
        self.sums.iter().filter(|&&s| s as i128 > bound).count()
    }
}

/// `|{j : q_j > lambda}|` for the columns of `x`.
pub fn count_above(x: &DatasetMatrix, lambda: f64) -> usize {
    let bound = exact::floor_mul(lambda, x.n() as u64);
    x.col_sums().iter().filter(|&&s| s as i128 > bound).count()
}
