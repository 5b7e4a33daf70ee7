//! ±1 datasets, their marginals, and exact top-k selection.
//!
//! Entries are bit-packed column-major: bit `i % 64` of word
//! `j * words_per_col + i / 64` is set iff `x[i][j] = +1`. Integer column
//! sums are kept alongside and are the source of truth for every marginal
//! comparison.

mod marginals;
mod text;
pub(crate) mod topk;

pub use marginals::{count_above, marginals, MarginalVector};
pub use text::{parse_text, write_text};
pub use topk::{exact_top_k, top_k_from_sums, validate_alpha_accurate, TopKVector};

use rand::seq::index;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// An `n x d` matrix with entries in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetMatrix {
    n: usize,
    d: usize,
    words_per_col: usize,
    bits: Vec<u64>,
    col_sums: Vec<i64>,
}

/// Pulls an arbitrary number of bits out of a 64-bit generator without
/// discarding any.
struct BitSource<R> {
    rng: R,
    buf: u64,
    avail: u32,
}

#[inline]
fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl<R: RngCore> BitSource<R> {
    fn new(rng: R) -> Self {
        Self { rng, buf: 0, avail: 0 }
    }

    /// Next `bits` (1..=64) uniform bits, in the low positions.
    #[inline]
    fn take(&mut self, bits: u32) -> u64 {
        debug_assert!((1..=64).contains(&bits));
        if self.avail >= bits {
            let v = self.buf & low_mask(bits);
            self.buf = if bits == 64 { 0 } else { self.buf >> bits };
            self.avail -= bits;
            return v;
        }
        let next = self.rng.next_u64();
        let need = bits - self.avail;
        let v = if self.avail == 0 {
            next & low_mask(need)
        } else {
            self.buf | ((next & low_mask(need)) << self.avail)
        };
        self.buf = if need == 64 { 0 } else { next >> need };
        self.avail = 64 - need;
        v
    }
}

impl DatasetMatrix {
    fn zeroed(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidDimension { n, d });
        }
        let words_per_col = n.div_ceil(64);
        Ok(Self {
            n,
            d,
            words_per_col,
            bits: vec![0; words_per_col * d],
            // all -1
            col_sums: vec![-(n as i64); d],
        })
    }

    /// Entries i.i.d. uniform on {-1, +1}, fully determined by `seed`.
    pub fn generate_uniform(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut x = Self::zeroed(n, d)?;
        let mut src = BitSource::new(rng::stream(seed));
        let tail = (n - 64 * (x.words_per_col - 1)) as u32;
        let wpc = x.words_per_col;
        for j in 0..d {
            let words = &mut x.bits[j * wpc..(j + 1) * wpc];
            let mut ones = 0i64;
            for (w, word) in words.iter_mut().enumerate() {
                let width = if w + 1 == wpc { tail } else { 64 };
                *word = src.take(width);
                ones += word.count_ones() as i64;
            }
            x.col_sums[j] = 2 * ones - n as i64;
        }
        Ok(x)
    }

    /// Builds a matrix from row vectors of ±1 values.
    pub fn from_rows<R: AsRef<[i8]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut x = Self::zeroed(n, d)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                x.set(i, j, v)?;
            }
        }
        Ok(x)
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[FixedSumColumn]) -> Result<Self> {
        let d = columns.len();
        let n = columns.first().map_or(0, FixedSumColumn::len);
        let mut x = Self::zeroed(n, d)?;
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: col.len(),
                });
            }
            for (i, &v) in col.values().iter().enumerate() {
                x.set(i, j, v)?;
            }
        }
        Ok(x)
    }

    /// A matrix with the given column sums: column `j` holds `(n + sums[j]) / 2`
    /// entries `+1` in its first rows and `-1` below.
    pub fn with_col_sums(n: usize, sums: &[i64]) -> Result<Self> {
        let mut x = Self::zeroed(n, sums.len())?;
        for (j, &s) in sums.iter().enumerate() {
            check_fixed_sum(n, s)?;
            for i in 0..((n as i64 + s) / 2) as usize {
                x.set(i, j, 1)?;
            }
        }
        Ok(x)
    }

    fn set(&mut self, i: usize, j: usize, v: i8) -> Result<()> {
        let word = &mut self.bits[j * self.words_per_col + i / 64];
        let mask = 1u64 << (i % 64);
        let was_plus = *word & mask != 0;
        let plus = match v {
            1 => true,
            -1 => false,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "entry ({i}, {j}) = {other} is not +1 or -1"
                )))
            }
        };
        // zeroed storage counts as all -1
        let before = if was_plus { 1 } else { -1 };
        if plus {
            *word |= mask;
        } else {
            *word &= !mask;
        }
        self.col_sums[j] += i64::from(v) - before;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn col_sums(&self) -> &[i64] {
        &self.col_sums
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> i8 {
        assert!(i < self.n && j < self.d, "entry ({i}, {j}) out of bounds");
        if self.bits[j * self.words_per_col + i / 64] >> (i % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn row(&self, i: usize) -> SignVector {
        SignVector((0..self.d).map(|j| self.entry(i, j)).collect())
    }

    /// Column sums recounted from the packed entries.
    pub fn recompute_col_sums(&self) -> Vec<i64> {
        self.bits
            .chunks(self.words_per_col)
            .map(|col| 2 * col.iter().map(|w| w.count_ones() as i64).sum::<i64>() - self.n as i64)
            .collect()
    }

    /// `<x_i, t>` for every row `i`.
    pub fn row_inner_products(&self, t: &TopKVector) -> Result<Vec<i64>> {
        if t.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: t.d(),
            });
        }
        let mut plus = vec![0i64; self.n];
        for &j in t.selected() {
            let col = &self.bits[j * self.words_per_col..(j + 1) * self.words_per_col];
            for (w, &word) in col.iter().enumerate() {
                let mut rest = word;
                while rest != 0 {
                    plus[w * 64 + rest.trailing_zeros() as usize] += 1;
                    rest &= rest - 1;
                }
            }
        }
        let k = t.k() as i64;
        Ok(plus.into_iter().map(|p| 2 * p - k).collect())
    }
}

/// A vector in {-1, +1}^d, such as an attack target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| **v != 1 && **v != -1) {
            return Err(Error::InvalidParameter(format!(
                "sign vector entry {bad} is not +1 or -1"
            )));
        }
        Ok(Self(values))
    }

    /// Uniform on {-1, +1}^d, fully determined by `seed`.
    pub fn uniform(d: usize, seed: u64) -> Self {
        let mut src = BitSource::new(rng::stream(seed));
        let mut values = Vec::with_capacity(d);
        let mut left = d;
        while left > 0 {
            let width = left.min(64);
            let word = src.take(width as u32);
            values.extend((0..width).map(|b| if word >> b & 1 == 1 { 1 } else { -1 }));
            left -= width;
        }
        Self(values)
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `<self, t>` as an exact integer.
    pub fn inner(&self, t: &TopKVector) -> Result<i64> {
        if t.d() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: t.d(),
                actual: self.0.len(),
            });
        }
        Ok(t.selected().iter().map(|&j| i64::from(self.0[j])).sum())
    }
}

impl TryFrom<Vec<i8>> for SignVector {
    type Error = Error;

    fn try_from(values: Vec<i8>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(v: SignVector) -> Self {
        v.0
    }
}

/// A ±1 column of length `n` whose entries sum to exactly `target_sum`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSumColumn {
    target_sum: i64,
    values: Vec<i8>,
}

impl FixedSumColumn {
    pub fn target_sum(&self) -> i64 {
        self.target_sum
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_fixed_sum(n: usize, s: i64) -> Result<()> {
    if s.unsigned_abs() > n as u64 || (s - n as i64).rem_euclid(2) != 0 {
        return Err(Error::InvalidSum { n, sum: s });
    }
    Ok(())
}

/// Uniformly random arrangement of `(n+s)/2` entries `+1` and `(n-s)/2`
/// entries `-1`.
pub fn generate_fixed_sum_column(n: usize, s: i64, seed: u64) -> Result<FixedSumColumn> {
    check_fixed_sum(n, s)?;
    Ok(fixed_sum_column_with(&mut rng::stream(seed), n, s))
}

pub(crate) fn fixed_sum_column_with<R: RngCore>(rng: &mut R, n: usize, s: i64) -> FixedSumColumn {
    let plus = ((n as i64 + s) / 2) as usize;
    let mut values = vec![-1i8; n];
    for i in index::sample(rng, n, plus) {
        values[i] = 1;
    }
    FixedSumColumn { target_sum: s, values }
}
