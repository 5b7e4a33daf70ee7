//! The inner-product tracing attack.
//!
//! Given a released top-k indicator `t` and a target `y in {-1,+1}^d`, the
//! attack answers IN iff `<y, t> > tau` with `tau = sqrt(2 k ln(1/rho))`.
//! The attack only ever sees `t` and the target's own row.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetMatrix, SignVector, TopKVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "IN")]
    In,
    #[serde(rename = "OUT")]
    Out,
}

impl Decision {
    pub fn is_in(self) -> bool {
        self == Decision::In
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::In => "IN",
            Decision::Out => "OUT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    k: usize,
    rho: f64,
    log_inv_rho: f64,
    tau: f64,
}

impl AttackParams {
    pub fn new(k: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho = {rho} must lie in (0, 1)")));
        }
        Self::from_log_inv_rho(k, -rho.ln())
    }

    /// Parameters given `ln(1/rho)` directly, avoiding a round trip through
    /// `rho` when the log is known exactly.
    pub fn from_log_inv_rho(k: usize, log_inv_rho: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(log_inv_rho > 0.0 && log_inv_rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ln(1/rho) = {log_inv_rho} must be positive and finite"
            )));
        }
        Ok(Self {
            k,
            rho: (-log_inv_rho).exp(),
            log_inv_rho,
            tau: (2.0 * k as f64 * log_inv_rho).sqrt(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn log_inv_rho(&self) -> f64 {
        self.log_inv_rho
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `tau^2 = 2 k ln(1/rho)`.
    pub fn tau_squared(&self) -> f64 {
        2.0 * self.k as f64 * self.log_inv_rho
    }

    /// Decision for a known inner product. Strict: `<y, t> = tau` is OUT.
    pub fn decide_inner(&self, inner: i64) -> Decision {
        // compare squares so the integer side is never rounded
        if inner > 0 && ((inner * inner) as f64) > self.tau_squared() {
            Decision::In
        } else {
            Decision::Out
        }
    }
}

/// `sqrt(2 k ln(1/rho))`.
pub fn threshold(k: usize, rho: f64) -> Result<f64> {
    AttackParams::new(k, rho).map(|p| p.tau())
}

pub fn decide(y: &SignVector, t: &TopKVector, params: &AttackParams) -> Result<Decision> {
    check_vector(t, params)?;
    Ok(params.decide_inner(y.inner(t)?))
}

fn check_vector(t: &TopKVector, params: &AttackParams) -> Result<()> {
    if t.k() != params.k {
        return Err(Error::InvalidVector(format!(
            "attack built for k = {}, vector selects {}",
            params.k,
            t.k()
        )));
    }
    Ok(())
}

/// Attack outcome on every row of a dataset plus one out-of-sample target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub decisions: Vec<Decision>,
    pub out_sample_decision: Decision,
    pub traced_count: usize,
    pub inner_products: Vec<i64>,
    pub out_sample_inner: i64,
}

impl TraceReport {
    pub fn inner_min(&self) -> i64 {
        self.inner_products.iter().copied().min().unwrap_or(0)
    }

    pub fn inner_mean(&self) -> f64 {
        self.inner_products.iter().sum::<i64>() as f64 / self.inner_products.len() as f64
    }
}

pub fn trace_dataset(
    x: &DatasetMatrix,
    t: &TopKVector,
    params: &AttackParams,
    y_out: &SignVector,
) -> Result<TraceReport> {
    check_vector(t, params)?;
    if y_out.len() != x.d() {
        return Err(Error::DimensionMismatch {
            expected: x.d(),
            actual: y_out.len(),
        });
    }
    let inner_products = x.row_inner_products(t)?;
    let decisions: Vec<Decision> = inner_products.iter().map(|&ip| params.decide_inner(ip)).collect();
    let out_sample_inner = y_out.inner(t)?;
    Ok(TraceReport {
        traced_count: decisions.iter().filter(|d| d.is_in()).count(),
        decisions,
        out_sample_decision: params.decide_inner(out_sample_inner),
        inner_products,
        out_sample_inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::exact_top_k;
    use proptest::prelude::*;

    const E_INV: f64 = 0.367_879_441_171_442_33;

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold(2, E_INV).unwrap(), 2.0);
        assert_eq!(threshold(8, E_INV).unwrap(), 4.0);
        assert!((threshold(100, 0.05).unwrap() - 24.478).abs() < 1e-3);
        assert!(threshold(0, 0.5).is_err());
        for rho in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(threshold(3, rho).is_err());
        }
    }

    #[test]
    fn params_tau_squared_identity() {
        for (k, rho) in [(1, 0.5), (100, 0.05), (7, 1e-9)] {
            let p = AttackParams::new(k, rho).unwrap();
            let rel = (p.tau() * p.tau() - 2.0 * k as f64 * (1.0 / rho).ln()).abs() / p.tau_squared();
            assert!(rel < 1e-14);
        }
    }

    fn top(d: usize, sel: Vec<usize>) -> TopKVector {
        TopKVector::new(d, sel).unwrap()
    }

    #[test]
    fn decide_examples() {
        let p = AttackParams::new(8, E_INV).unwrap();
        let t = top(10, (0..8).collect());
        let all_plus = SignVector::new(vec![1; 10]).unwrap();
        assert_eq!(decide(&all_plus, &t, &p).unwrap(), Decision::In);
        let half = SignVector::new(vec![1, -1, 1, -1, 1, -1, 1, -1, 1, 1]).unwrap();
        assert_eq!(decide(&half, &t, &p).unwrap(), Decision::Out);

        // <y, t> = tau = 2 exactly is OUT
        let p2 = AttackParams::new(2, E_INV).unwrap();
        let t2 = top(3, vec![0, 1]);
        let y = SignVector::new(vec![1, 1, -1]).unwrap();
        assert_eq!(decide(&y, &t2, &p2).unwrap(), Decision::Out);

        assert!(decide(&y, &t, &p).is_err());
        assert!(decide(&SignVector::new(vec![1; 4]).unwrap(), &t2, &p2).is_err());
    }

    #[test]
    fn trace_examples() {
        let p = AttackParams::new(2, E_INV).unwrap();
        let x = DatasetMatrix::from_rows(&[vec![1, 1, -1], vec![-1, -1, 1]]).unwrap();
        let t = top(3, vec![0, 1]);
        let y = SignVector::new(vec![-1, -1, -1]).unwrap();
        let r = trace_dataset(&x, &t, &p, &y).unwrap();
        assert_eq!(r.inner_products, vec![2, -2]);
        assert_eq!(r.decisions, vec![Decision::Out, Decision::Out]);
        assert_eq!(r.traced_count, 0);
        assert_eq!(r.out_sample_decision, Decision::Out);
        assert_eq!(r.out_sample_inner, -2);

        // all +1 with k > 2 ln(1/rho): every row IN; an all -1 row is OUT
        let mut rows = vec![vec![1i8; 6]; 4];
        rows.push(vec![-1; 6]);
        let x = DatasetMatrix::from_rows(&rows).unwrap();
        let t = top(6, vec![0, 2, 3, 5]);
        let p = AttackParams::new(4, E_INV).unwrap();
        let r = trace_dataset(&x, &t, &p, &SignVector::new(vec![1; 6]).unwrap()).unwrap();
        assert_eq!(r.decisions[..4], [Decision::In; 4]);
        assert_eq!(r.decisions[4], Decision::Out);
        assert_eq!(r.traced_count, 4);
    }

    #[test]
    fn trace_rejects_mismatches() {
        let x = DatasetMatrix::generate_uniform(3, 5, 0).unwrap();
        let t = exact_top_k(&x, 2).unwrap();
        let p = AttackParams::new(2, 0.1).unwrap();
        assert!(trace_dataset(&x, &t, &p, &SignVector::uniform(4, 0)).is_err());
        let p3 = AttackParams::new(3, 0.1).unwrap();
        assert!(trace_dataset(&x, &t, &p3, &SignVector::uniform(5, 0)).is_err());
    }

    proptest! {
        #[test]
        fn report_is_consistent(n in 1usize..40, d in 1usize..60, k_raw in 0usize..60, seed in any::<u64>(), rho in 0.001f64..0.999) {
            let k = k_raw % d + 1;
            let x = DatasetMatrix::generate_uniform(n, d, seed).unwrap();
            let t = exact_top_k(&x, k).unwrap();
            let p = AttackParams::new(k, rho).unwrap();
            let r = trace_dataset(&x, &t, &p, &SignVector::uniform(d, seed ^ 1)).unwrap();
            prop_assert_eq!(r.traced_count, r.decisions.iter().filter(|d| d.is_in()).count());
            for (i, &ip) in r.inner_products.iter().enumerate() {
                prop_assert!(ip.unsigned_abs() as usize <= k);
                prop_assert_eq!((ip - k as i64).rem_euclid(2), 0);
                prop_assert_eq!(r.decisions[i], decide(&x.row(i), &t, &p).unwrap());
                prop_assert_eq!(r.decisions[i].is_in(), ip as f64 > p.tau());
            }
        }

        #[test]
        fn flipping_a_selected_coordinate_up_never_untraces(seed in any::<u64>(), flip in 0usize..6, rho in 0.01f64..0.9) {
            let d = 20;
            let t = TopKVector::new(d, vec![1, 4, 7, 9, 12, 18]).unwrap();
            let p = AttackParams::new(6, rho).unwrap();
            let y = SignVector::uniform(d, seed);
            let mut v = y.values().to_vec();
            v[t.selected()[flip]] = 1;
            let up = SignVector::new(v).unwrap();
            if decide(&y, &t, &p).unwrap().is_in() {
                prop_assert!(decide(&up, &t, &p).unwrap().is_in());
            }
        }

        #[test]
        fn threshold_is_increasing(k in 1usize..1000, rho in 0.001f64..0.99) {
            let base = threshold(k, rho).unwrap();
            prop_assert!(threshold(k + 1, rho).unwrap() > base);
            prop_assert!(threshold(k, rho * 0.5).unwrap() > base);
        }
    }
}
